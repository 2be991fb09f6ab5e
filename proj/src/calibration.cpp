#include <algorithm>
#include <cmath>
#include <string>

#include "dexskin/calibration.hpp"
#include "dexskin/error.hpp"

namespace dexskin {

namespace {

template <typename T>
T lower_median(std::vector<T> v) {
  const std::size_t k = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

// Index of the sample in `series` (sorted by time) closest to t, ties to the earlier.
std::size_t nearest(std::span<const TimedValue> series, double t,
                    std::int64_t shift = 0) {
  auto it = std::lower_bound(series.begin(), series.end(), t,
                             [shift](const TimedValue& s, double tt) {
                               return static_cast<double>(s.t_ms - shift) < tt;
                             });
  if (it == series.end()) return series.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - series.begin());
  if (hi == 0) return 0;
  const double d_hi = static_cast<double>(series[hi].t_ms - shift) - t;
  const double d_lo = t - static_cast<double>(series[hi - 1].t_ms - shift);
  return d_lo <= d_hi ? hi - 1 : hi;
}

}  // namespace

AlignedPairs align_by_peaks(std::span<const TimedValue> sensor, std::span<const TimedValue> gauge,
                            const AlignOptions& options) {
  if (sensor.size() < 2) throw Error(Errc::SeriesTooShort, "sensor series has < 2 samples");
  const auto s_peaks = detect_peaks(sensor);
  const auto g_peaks = detect_peaks(gauge);
  if (s_peaks.empty()) throw Error(Errc::NoPeaks, "no peaks in the sensor series");
  if (g_peaks.empty()) throw Error(Errc::NoPeaks, "no peaks in the gauge series");

  std::vector<std::int64_t> lags;
  for (std::size_t gp : g_peaks) {
    const std::int64_t tg = gauge[gp].t_ms;
    std::int64_t best = 0;
    bool found = false;
    for (std::size_t sp : s_peaks) {
      const std::int64_t d = sensor[sp].t_ms - tg;
      if (std::llabs(d) > options.max_lag_ms) continue;
      if (!found || std::llabs(d) < std::llabs(best)) {
        best = d;
        found = true;
      }
    }
    if (found) lags.push_back(best);
  }
  if (lags.empty()) {
    throw Error(Errc::NoOverlap, "no sensor peak within " + std::to_string(options.max_lag_ms) +
                                     " ms of any gauge peak");
  }
  const std::int64_t offset = lower_median(lags);

  std::vector<std::int64_t> periods;
  periods.reserve(sensor.size() - 1);
  for (std::size_t i = 1; i < sensor.size(); ++i) periods.push_back(sensor[i].t_ms - sensor[i - 1].t_ms);
  const double half_period = 0.5 * static_cast<double>(lower_median(periods));

  AlignedPairs out;
  out.offset_ms = offset;
  out.pairs.reserve(gauge.size());
  for (const TimedValue& g : gauge) {
    const double t = static_cast<double>(g.t_ms);
    const std::size_t k = nearest(sensor, t, offset);
    if (std::abs(static_cast<double>(sensor[k].t_ms - offset) - t) <= half_period) {
      out.pairs.push_back({sensor[k].value, g.value});
    }
  }
  if (out.pairs.empty()) throw Error(Errc::NoOverlap, "aligned series do not overlap");
  return out;
}

std::vector<TimedValue> taxel_series(std::span<const SensorFrame> frames, std::size_t taxel,
                                     double c0) {
  if (c0 == 0.0) throw Error(Errc::ZeroBaseline, "taxel " + std::to_string(taxel));
  std::vector<TimedValue> out;
  out.reserve(frames.size());
  for (const SensorFrame& f : frames) {
    if (taxel >= f.counts.size()) {
      throw Error(Errc::OutOfBounds, "taxel " + std::to_string(taxel) + " of " +
                                         std::to_string(f.counts.size()));
    }
    out.push_back({f.timestamp_ms, (static_cast<double>(f.counts[taxel]) - c0) / c0});
  }
  return out;
}

std::vector<TimedValue> gauge_series(std::span<const GaugeRecord> gauge) {
  std::vector<TimedValue> out;
  out.reserve(gauge.size());
  for (const GaugeRecord& g : gauge) out.push_back({g.timestamp_ms, g.value});
  return out;
}

AlignedPairs prepare_pairs(const Recording& recording, int sensor_id, std::size_t taxel,
                           const CalibrationInput& input) {
  const auto frames = recording.frames(sensor_id);
  if (frames.empty()) {
    throw Error(Errc::InvalidArgument, "no frames for sensor " + std::to_string(sensor_id));
  }
  const auto gauge = recording.gauge();
  if (gauge.empty()) throw Error(Errc::InvalidArgument, "recording has no gauge channel");
  if (taxel >= frames.front().counts.size()) {
    throw Error(Errc::OutOfBounds, "taxel " + std::to_string(taxel) + " of " +
                                       std::to_string(frames.front().counts.size()));
  }
  const std::size_t nb = std::min(input.baseline_frames, frames.size());
  const Baseline baseline = capture_baseline(std::span(frames).first(nb));
  const double c0 = baseline.c0[taxel];

  const auto s = taxel_series(frames, taxel, c0);
  const auto g = gauge_series(gauge);
  AlignedPairs pairs = align_by_peaks(s, g, input.align);
  pairs.unit = gauge.front().unit;
  pairs.taxel = taxel;
  pairs.c0 = c0;
  return pairs;
}

CalibrationCurve calibrate_taxel(const Recording& recording, int sensor_id, std::size_t taxel,
                                 const CalibrationInput& input) {
  const AlignedPairs pairs = prepare_pairs(recording, sensor_id, taxel, input);
  return pairs.unit == Unit::newton ? fit_force_curve(pairs, input.fit)
                                    : fit_pneumatic_curve(pairs, input.fit);
}

}  // namespace dexskin
