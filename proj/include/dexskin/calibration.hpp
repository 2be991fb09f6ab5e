#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dexskin/recording.hpp"

namespace dexskin {

struct TimedValue {
  std::int64_t t_ms = 0;
  double value = 0.0;
};

/// Local maxima whose prominence is at least 20% of the series range, thinned
/// so that kept peaks are at least 25% of the median peak spacing apart.
/// Plateaus report their first sample. Throws SeriesTooShort below 3 samples.
std::vector<std::size_t> detect_peaks(std::span<const double> values);
std::vector<std::size_t> detect_peaks(std::span<const TimedValue> series);

struct Pair {
  double x = 0.0;   // dC/C0
  double y = 0.0;   // reference, in `unit`
};

struct AlignedPairs {
  std::vector<Pair> pairs;
  Unit unit = Unit::newton;
  std::size_t taxel = 0;
  double c0 = 0.0;              // baseline the x values were normalised with
  std::int64_t offset_ms = 0;   // sensor lag removed during alignment
};

struct AlignOptions {
  std::int64_t max_lag_ms = 1000;
};

/// Estimates the sensor lag as the median gauge-peak to nearest-sensor-peak
/// difference, shifts the sensor series by it, then pairs every gauge sample
/// with the nearest shifted sensor sample within half a frame period.
/// Throws NoPeaks or NoOverlap.
AlignedPairs align_by_peaks(std::span<const TimedValue> sensor, std::span<const TimedValue> gauge,
                            const AlignOptions& options = {});

enum class CurveForm { force, pneumatic };

const char* to_string(CurveForm form);

/// Fitted exponential calibration.
///   force:     F(x) = a * (exp(b * (x + d)) - exp(b * d))     [N]
///   pneumatic: P(x) = a * exp(b * x) + d                      [kPa]
/// Force fits are reported with d = 0: a and d only enter through a * exp(b d).
struct CalibrationCurve {
  CurveForm form = CurveForm::force;
  double a = 0.0;
  double b = 0.0;
  double d = 0.0;
  double c0 = 0.0;
  double r2 = 0.0;
  double rmse = 0.0;
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t taxel = 0;
  std::size_t pair_count = 0;
  int iterations = 0;

  double operator()(double x) const;
};

struct FitOptions {
  double tolerance = 1e-9;      // relative parameter change
  int max_iterations = 200;
  int restarts = 5;
  std::uint64_t seed = 0x5eed;
};

/// Throws DegenerateData (fewer than 10 pairs, constant x or y, wrong unit) or
/// NonConvergence.
CalibrationCurve fit_force_curve(const AlignedPairs& pairs, const FitOptions& options = {});
CalibrationCurve fit_pneumatic_curve(const AlignedPairs& pairs, const FitOptions& options = {});

struct Estimate {
  double value = 0.0;
  bool extrapolated = false;
};

Estimate estimate_force(const CalibrationCurve& curve, double x);
Estimate estimate_pressure(const CalibrationCurve& curve, double x);

/// Series helpers over a Recording: one taxel's dC/C0 and the gauge channel.
std::vector<TimedValue> taxel_series(std::span<const SensorFrame> frames, std::size_t taxel,
                                     double c0);
std::vector<TimedValue> gauge_series(std::span<const GaugeRecord> gauge);

struct CalibrationInput {
  std::size_t baseline_frames = 30;
  AlignOptions align;
  FitOptions fit;
};

/// Full per-taxel procedure on a rig recording: baseline from the first
/// frames, peak alignment and downsampling to the gauge rate, then the fit
/// matching the gauge unit.
AlignedPairs prepare_pairs(const Recording& recording, int sensor_id, std::size_t taxel,
                           const CalibrationInput& input = {});
CalibrationCurve calibrate_taxel(const Recording& recording, int sensor_id, std::size_t taxel,
                                 const CalibrationInput& input = {});

}  // namespace dexskin
