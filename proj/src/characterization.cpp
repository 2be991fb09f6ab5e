#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dexskin/characterization.hpp"
#include "dexskin/error.hpp"

namespace dexskin {

namespace {

constexpr int kHysteresisGrid = 200;

// Sorted by reference with equal references averaged: a piecewise-linear x(ref).
std::vector<Pair> as_function(std::vector<Pair> seg) {
  std::stable_sort(seg.begin(), seg.end(), [](const Pair& a, const Pair& b) { return a.y < b.y; });
  std::vector<Pair> out;
  std::size_t i = 0;
  while (i < seg.size()) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < seg.size() && seg[j].y == seg[i].y) sum += seg[j++].x;
    out.push_back({sum / static_cast<double>(j - i), seg[i].y});
    i = j;
  }
  return out;
}

double interpolate(const std::vector<Pair>& f, double ref) {
  auto it = std::lower_bound(f.begin(), f.end(), ref,
                             [](const Pair& p, double r) { return p.y < r; });
  if (it == f.end()) return f.back().x;
  if (it == f.begin() || it->y == ref) return it->x;
  const Pair& hi = *it;
  const Pair& lo = *(it - 1);
  const double t = (ref - lo.y) / (hi.y - lo.y);
  return lo.x + t * (hi.x - lo.x);
}

void check_grids(const HeatmapGrid& a, const HeatmapGrid& b) {
  if (a.rows != b.rows || a.cols != b.cols || a.mask != b.mask ||
      a.cells.size() != b.cells.size()) {
    throw Error(Errc::ShapeMismatch, "heatmap grids differ in shape or mask");
  }
}

std::size_t most_responsive_taxel(std::span<const SensorFrame> frames, const Baseline& base) {
  std::size_t best = 0;
  double best_x = -std::numeric_limits<double>::infinity();
  for (const SensorFrame& f : frames) {
    for (std::size_t i = 0; i < f.counts.size(); ++i) {
      const double x = (static_cast<double>(f.counts[i]) - base.c0[i]) / base.c0[i];
      if (x > best_x) {
        best_x = x;
        best = i;
      }
    }
  }
  return best;
}

}  // namespace

double CycleSplit::max_x() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const Pair& p : loading) m = std::max(m, p.x);
  for (const Pair& p : unloading) m = std::max(m, p.x);
  return m;
}

double CycleSplit::min_x() const {
  double m = std::numeric_limits<double>::infinity();
  for (const Pair& p : loading) m = std::min(m, p.x);
  for (const Pair& p : unloading) m = std::min(m, p.x);
  return m;
}

std::vector<CycleSplit> split_cycles(const AlignedPairs& pairs) {
  const std::size_t n = pairs.pairs.size();
  if (n < 3) throw Error(Errc::NoCompleteCycle, "fewer than 3 pairs");
  std::vector<double> ref(n);
  for (std::size_t i = 0; i < n; ++i) ref[i] = pairs.pairs[i].y;
  const auto peaks = detect_peaks(ref);

  std::vector<CycleSplit> out;
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    const std::size_t p = peaks[k];
    const std::size_t lo = k == 0 ? 0 : peaks[k - 1];
    const std::size_t hi = k + 1 == peaks.size() ? n - 1 : peaks[k + 1];

    // Last minimum before the peak and first minimum after it.
    std::size_t start = lo;
    for (std::size_t i = lo; i <= p; ++i) {
      if (ref[i] <= ref[start]) start = i;
    }
    std::size_t end = hi;
    for (std::size_t i = hi + 1; i-- > p;) {
      if (ref[i] <= ref[end]) end = i;
    }
    if (start == p || end == p || !(ref[p] > ref[start]) || !(ref[p] > ref[end])) continue;

    CycleSplit split;
    split.loading.assign(pairs.pairs.begin() + static_cast<std::ptrdiff_t>(start),
                         pairs.pairs.begin() + static_cast<std::ptrdiff_t>(p) + 1);
    split.unloading.assign(pairs.pairs.begin() + static_cast<std::ptrdiff_t>(p),
                           pairs.pairs.begin() + static_cast<std::ptrdiff_t>(end) + 1);
    std::stable_sort(split.loading.begin(), split.loading.end(),
                     [](const Pair& a, const Pair& b) { return a.y < b.y; });
    std::stable_sort(split.unloading.begin(), split.unloading.end(),
                     [](const Pair& a, const Pair& b) { return a.y > b.y; });
    out.push_back(std::move(split));
  }
  if (out.empty()) throw Error(Errc::NoCompleteCycle, "no loading/unloading cycle found");
  return out;
}

double hysteresis_percent(const CycleSplit& split) {
  if (split.loading.empty() || split.unloading.empty()) {
    throw Error(Errc::NoOverlap, "empty cycle segment");
  }
  const auto load = as_function(split.loading);
  const auto unload = as_function(split.unloading);
  const double lo = std::max(load.front().y, unload.front().y);
  const double hi = std::min(load.back().y, unload.back().y);
  if (!(hi > lo)) throw Error(Errc::NoOverlap, "segments share no reference interval");

  double gap = 0.0;
  for (int i = 0; i < kHysteresisGrid; ++i) {
    const double g = i + 1 == kHysteresisGrid
                         ? hi
                         : lo + (hi - lo) * static_cast<double>(i) / (kHysteresisGrid - 1);
    gap = std::max(gap, std::abs(interpolate(unload, g) - interpolate(load, g)));
  }
  if (gap == 0.0) return 0.0;
  const double full_scale = split.max_x() - split.min_x();
  if (!(full_scale > 0.0)) throw Error(Errc::InvalidArgument, "cycle has no output span");
  return gap / full_scale * 100.0;
}

DriftResult cyclic_drift(std::span<const CycleSplit> splits) {
  if (splits.size() < 2) {
    throw Error(Errc::InvalidArgument,
                "drift needs >= 2 cycles, got " + std::to_string(splits.size()));
  }
  const double peak1 = splits.front().max_x();
  const double base1 = splits.front().min_x();
  const double peakn = splits.back().max_x();
  const double basen = splits.back().min_x();
  if (!(peak1 > 0.0) || !(peak1 > base1)) {
    throw Error(Errc::InvalidArgument, "first cycle has no positive peak span");
  }
  return {std::abs(peakn - peak1) / peak1 * 100.0,
          std::abs(basen - base1) / (peak1 - base1) * 100.0};
}

double crosstalk_percent(std::span<const double> pressures, std::size_t loaded) {
  if (loaded >= pressures.size()) {
    throw Error(Errc::OutOfBounds, "loaded taxel " + std::to_string(loaded) + " of " +
                                       std::to_string(pressures.size()));
  }
  const double p = pressures[loaded];
  if (!(p > 0.0)) throw Error(Errc::InvalidArgument, "loaded taxel pressure must be > 0");
  double worst = 0.0;
  for (std::size_t j = 0; j < pressures.size(); ++j) {
    if (j != loaded) worst = std::max(worst, pressures[j]);
  }
  return worst / p * 100.0;
}

double rmse_force(const CalibrationCurve& curve, const AlignedPairs& eval_pairs) {
  if (eval_pairs.pairs.empty()) throw Error(Errc::DegenerateData, "empty evaluation set");
  if (eval_pairs.unit != Unit::newton) {
    throw Error(Errc::InvalidArgument, "force RMSE needs a newton reference");
  }
  double ss = 0.0;
  for (const Pair& p : eval_pairs.pairs) {
    const double r = estimate_force(curve, p.x).value - p.y;
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(eval_pairs.pairs.size()));
}

double default_dynamic_range(const HeatmapGrid& a, const HeatmapGrid& b) {
  check_grids(a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    if (!a.mask[i]) continue;
    m = std::max({m, a.cells[i], b.cells[i]});
  }
  return m;
}

double ssim(const HeatmapGrid& a, const HeatmapGrid& b, double dynamic_range) {
  check_grids(a, b);
  if (!(dynamic_range > 0.0)) throw Error(Errc::InvalidArgument, "dynamic range must be > 0");
  double n = 0.0, ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    if (!a.mask[i]) continue;
    ma += a.cells[i];
    mb += b.cells[i];
    n += 1.0;
  }
  if (n == 0.0) throw Error(Errc::ShapeMismatch, "no populated cells");
  ma /= n;
  mb /= n;
  double va = 0.0, vb = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    if (!a.mask[i]) continue;
    const double da = a.cells[i] - ma;
    const double db = b.cells[i] - mb;
    va += da * da;
    vb += db * db;
    cov += da * db;
  }
  va /= n;
  vb /= n;
  cov /= n;
  const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
  const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
  return ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
         ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

double mse(const HeatmapGrid& a, const HeatmapGrid& b) {
  check_grids(a, b);
  double s = 0.0, n = 0.0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    if (!a.mask[i]) continue;
    const double d = a.cells[i] - b.cells[i];
    s += d * d;
    n += 1.0;
  }
  if (n == 0.0) throw Error(Errc::ShapeMismatch, "no populated cells");
  return s / n;
}

MeanPressure mean_active_pressure(std::span<const NormalizedFrame> frames,
                                  std::span<const CalibrationCurve> curves,
                                  const TaxelLayout& layout, double threshold) {
  std::vector<const CalibrationCurve*> by_taxel(layout.taxel_count(), nullptr);
  for (const CalibrationCurve& c : curves) {
    if (c.taxel < by_taxel.size()) by_taxel[c.taxel] = &c;
  }
  MeanPressure out;
  double sum = 0.0;
  for (const NormalizedFrame& f : frames) {
    if (f.values.size() != layout.taxel_count()) {
      throw Error(Errc::LengthMismatch, "frame has " + std::to_string(f.values.size()) +
                                            " taxels, layout " +
                                            std::to_string(layout.taxel_count()));
    }
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      if (f.values[i] < threshold) continue;
      if (!by_taxel[i]) {
        throw Error(Errc::CoverageGap, "no force curve for taxel " + std::to_string(i));
      }
      const double newton = estimate_force(*by_taxel[i], f.values[i]).value;
      sum += newton / layout.area_mm2(i) * 1000.0;
      ++out.samples;
    }
  }
  if (out.samples == 0) {
    out.empty_warning = true;
    return out;
  }
  out.kpa = sum / static_cast<double>(out.samples);
  return out;
}

double uniformity_cv(std::span<const double> responses) {
  const Stats s = summarize(responses);
  if (s.n < 2) throw Error(Errc::InvalidArgument, "uniformity needs >= 2 responses");
  if (s.mean == 0.0) throw Error(Errc::InvalidArgument, "uniformity undefined for zero mean");
  return s.sd / std::abs(s.mean);
}

Stats summarize(std::span<const double> values) {
  Stats s;
  s.n = values.size();
  if (s.n == 0) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  s.max = *std::max_element(values.begin(), values.end());
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

CharacterizationReport characterize(const Recording& recording, const TaxelLayout& layout,
                                    const ReportOptions& options) {
  const auto frames = recording.frames(options.sensor_id);
  const auto gauge = recording.gauge();
  if (frames.empty() || gauge.empty()) {
    throw Error(Errc::InvalidArgument, "recording needs frames for sensor " +
                                           std::to_string(options.sensor_id) +
                                           " and a gauge channel");
  }
  const std::size_t nb = std::min(options.input.baseline_frames, frames.size());
  const Baseline base = capture_baseline(std::span(frames).first(nb));
  const bool stage = gauge.front().unit == Unit::newton;

  std::vector<std::size_t> taxels = options.taxels;
  if (taxels.empty()) {
    if (stage) {
      taxels.push_back(most_responsive_taxel(frames, base));
    } else {
      taxels.resize(frames.front().counts.size());
      std::iota(taxels.begin(), taxels.end(), std::size_t{0});
    }
  }

  CharacterizationReport report;
  std::vector<double> peak_x;
  for (std::size_t k = 0; k < taxels.size(); ++k) {
    const std::size_t t = taxels[k];
    const AlignedPairs pairs = prepare_pairs(recording, options.sensor_id, t, options.input);
    const auto splits = split_cycles(pairs);
    TaxelHysteresis h{t, 0.0, splits.size()};
    for (const CycleSplit& s : splits) h.percent += hysteresis_percent(s);
    h.percent /= static_cast<double>(splits.size());
    report.hysteresis.push_back(h);
    if (k == 0 && splits.size() >= 2) report.drift = cyclic_drift(splits);
    if (k == 0 && stage) {
      for (const CalibrationCurve& c : options.force_curves) {
        if (c.taxel == t && c.form == CurveForm::force) {
          report.rmse_force_n = rmse_force(c, pairs);
          break;
        }
      }
    }
    double m = -std::numeric_limits<double>::infinity();
    for (const Pair& p : pairs.pairs) m = std::max(m, p.x);
    peak_x.push_back(m);
  }

  if (stage) {
    // Each frame where the target taxel is active is one crosstalk sample.
    const std::size_t loaded = taxels.front();
    std::vector<double> samples;
    for (const SensorFrame& f : frames) {
      const NormalizedFrame nf = normalize(f, base);
      if (nf.values[loaded] < 0.005) continue;
      samples.push_back(crosstalk_percent(nf.values, loaded));
    }
    if (!samples.empty()) report.crosstalk_pct = summarize(samples);
  } else if (peak_x.size() >= 2) {
    report.uniformity_cv = uniformity_cv(peak_x);
  }
  (void)layout;
  return report;
}

}  // namespace dexskin
