#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dexskin/layout.hpp"

namespace dexskin {

/// One raw readout of every taxel on the stream.
struct SensorFrame {
  std::int64_t timestamp_ms = 0;
  std::uint8_t sensor_id = 0;
  std::uint32_t seq = 0;
  std::vector<std::uint16_t> counts;

  bool operator==(const SensorFrame&) const = default;
};

/// Per-taxel no-load reference C0.
struct Baseline {
  std::vector<double> c0;
  std::size_t sample_count = 0;
};

/// dC/C0 per taxel. Negative values are kept as measured.
struct NormalizedFrame {
  std::int64_t timestamp_ms = 0;
  std::vector<double> values;
};

struct HeatmapGrid {
  int rows = 0;
  int cols = 0;
  std::vector<double> cells;          // row-major
  std::vector<std::uint8_t> mask;     // 1 where a taxel lives

  double at(int row, int col) const { return cells[static_cast<std::size_t>(row) * cols + col]; }
  bool populated(int row, int col) const {
    return mask[static_cast<std::size_t>(row) * cols + col] != 0;
  }
  std::size_t populated_count() const;
};

/// Mean of each taxel over the frames. Throws EmptyBaseline, LengthMismatch or
/// ZeroBaseline.
Baseline capture_baseline(std::span<const SensorFrame> frames);

NormalizedFrame normalize(const SensorFrame& frame, const Baseline& baseline);

HeatmapGrid grid_project(std::span<const double> values, const TaxelLayout& layout);
inline HeatmapGrid grid_project(const NormalizedFrame& frame, const TaxelLayout& layout) {
  return grid_project(frame.values, layout);
}

/// Inverse of grid_project: reads the populated cells back into taxel order.
std::vector<double> grid_unproject(const HeatmapGrid& grid, const TaxelLayout& layout);

/// Nominal stream clock: frame `seq` is stamped round(seq * 1000 / rate_hz) ms.
std::int64_t nominal_timestamp_ms(std::uint32_t seq, double rate_hz = 30.0);

/// Rounds real-valued counts to u16 for the wire. Throws RangeExceeded.
std::vector<std::uint16_t> to_counts(std::span<const double> values);

}  // namespace dexskin
