#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dexskin/calibration.hpp"

namespace dexskin {

/// Closed-form remap of a source sensor's raw counts into a target sensor's
/// count space through both sensors' pneumatic curves:
///
///   C2 = (C0_2 / b2) * ln((a1 * exp(b1 * (C1 - C0_1) / C0_1) + d1 - d2) / a2) + C0_2
class TransferMap {
 public:
  struct Entry {
    CalibrationCurve source;
    CalibrationCurve target;
  };

  TransferMap() = default;
  /// Pairs curves by taxel id. Throws InvalidArgument for non-pneumatic curves
  /// or non-positive baselines.
  static TransferMap build(std::span<const CalibrationCurve> source,
                           std::span<const CalibrationCurve> target, int source_sensor = 0,
                           int target_sensor = 1);

  void set(std::size_t taxel, Entry entry);
  const Entry* entry(std::size_t taxel) const;
  std::vector<std::size_t> taxels() const;
  /// Taxel ids in [0, taxel_count) without an entry.
  std::vector<std::size_t> missing(std::size_t taxel_count) const;

  TransferMap inverse() const;

  int source_sensor = 0;
  int target_sensor = 1;

 private:
  std::vector<std::optional<Entry>> entries_;
};

/// Throws NonPositiveLogArgument (with taxel id and c1) or CoverageGap.
double remap(const TransferMap& map, std::size_t taxel, double c1);
double remap(const TransferMap::Entry& entry, std::size_t taxel, double c1);

}  // namespace dexskin
