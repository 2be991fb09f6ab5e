#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dexskin/calibration.hpp"
#include "dexskin/frame.hpp"
#include "dexskin/layout.hpp"

namespace dexskin {

/// One loading/unloading cycle as (x, reference) pairs. Loading references are
/// non-decreasing, unloading non-increasing.
struct CycleSplit {
  std::vector<Pair> loading;
  std::vector<Pair> unloading;

  double max_x() const;
  double min_x() const;
};

/// Cycles are delimited by the reference-channel peaks and the minima between
/// them. Throws NoCompleteCycle.
std::vector<CycleSplit> split_cycles(const AlignedPairs& pairs);

/// Largest loading/unloading gap on a 200-point common reference grid, as a
/// percentage of the cycle's full-scale output. Throws NoOverlap.
double hysteresis_percent(const CycleSplit& split);

struct DriftResult {
  double peak_pct = 0.0;
  double zero_pct = 0.0;
};

/// First-to-last cycle change of per-cycle max (peak) and min (zero); zero
/// drift is normalised by the first cycle's span. Throws InvalidArgument with
/// fewer than two cycles.
DriftResult cyclic_drift(std::span<const CycleSplit> splits);

/// max_{j != loaded} P_j / P_loaded * 100, negatives read as 0. Works on any
/// per-taxel quantity linear in load. Throws InvalidArgument if P_loaded <= 0.
double crosstalk_percent(std::span<const double> pressures, std::size_t loaded);

/// Throws DegenerateData on an empty set.
double rmse_force(const CalibrationCurve& curve, const AlignedPairs& eval_pairs);

/// Largest populated value across both grids.
double default_dynamic_range(const HeatmapGrid& a, const HeatmapGrid& b);

/// Single-window SSIM over populated cells with C1 = (0.01 L)^2, C2 = (0.03 L)^2.
/// Throws ShapeMismatch or InvalidArgument (L <= 0).
double ssim(const HeatmapGrid& a, const HeatmapGrid& b, double dynamic_range);
inline double ssim(const HeatmapGrid& a, const HeatmapGrid& b) {
  return ssim(a, b, default_dynamic_range(a, b));
}

double mse(const HeatmapGrid& a, const HeatmapGrid& b);

struct MeanPressure {
  double kpa = 0.0;
  std::size_t samples = 0;
  bool empty_warning = false;
};

/// Pooled mean over every (taxel, frame) with x >= threshold, mapped x -> N
/// through that taxel's force curve and N -> kPa through its area.
MeanPressure mean_active_pressure(std::span<const NormalizedFrame> frames,
                                  std::span<const CalibrationCurve> curves,
                                  const TaxelLayout& layout, double threshold = 0.005);

/// Coefficient of variation (sample sd / mean).
double uniformity_cv(std::span<const double> responses);

struct Stats {
  double mean = 0.0;
  double sd = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

Stats summarize(std::span<const double> values);

struct TaxelHysteresis {
  std::size_t taxel = 0;
  double percent = 0.0;   // mean over cycles
  std::size_t cycles = 0;
};

struct CharacterizationReport {
  std::vector<TaxelHysteresis> hysteresis;
  std::optional<DriftResult> drift;
  std::optional<Stats> crosstalk_pct;
  std::optional<double> uniformity_cv;
  std::optional<double> rmse_force_n;
};

struct ReportOptions {
  int sensor_id = 0;
  std::vector<std::size_t> taxels;   // empty: the most responsive taxel (stage) or all (chamber)
  CalibrationInput input;
  std::vector<CalibrationCurve> force_curves;   // optional, indexed by taxel field
};

CharacterizationReport characterize(const Recording& recording, const TaxelLayout& layout,
                                    const ReportOptions& options = {});

}  // namespace dexskin
