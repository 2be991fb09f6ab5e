#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "dexskin/calibration.hpp"
#include "dexskin/error.hpp"
#include "fitting.hpp"

namespace dexskin {

namespace {

// F(x) = A (exp(b x) - 1), the identifiable part of a (exp(b (x + d)) - exp(b d)).
//   dF/dA = exp(b x) - 1
//   dF/db = A x exp(b x)
// (With all three parameters, dF/dd = a b exp(b d) (exp(b x) - 1) = a b dF/da,
// so the three-parameter Jacobian is rank 2.)
struct ForceModel {
  using Vec = Eigen::Vector2d;
  double value(double x, const Vec& p) const { return p(0) * std::expm1(p(1) * x); }
  Vec gradient(double x, const Vec& p) const {
    const double e = std::exp(p(1) * x);
    return Vec(e - 1.0, p(0) * x * e);
  }
  bool valid(const Vec& p) const { return p(0) > 0.0 && p(1) > 0.0; }
};

// P(x) = a exp(b x) + d
//   dP/da = exp(b x), dP/db = a x exp(b x), dP/dd = 1
struct PneumaticModel {
  using Vec = Eigen::Vector3d;
  double value(double x, const Vec& p) const { return p(0) * std::exp(p(1) * x) + p(2); }
  Vec gradient(double x, const Vec& p) const {
    const double e = std::exp(p(1) * x);
    return Vec(e, p(0) * x * e, 1.0);
  }
  bool valid(const Vec& p) const { return p(0) > 0.0 && p(1) > 0.0; }
};

struct DataSummary {
  double x_min, x_max, y_min, y_max;
};

DataSummary check_data(const AlignedPairs& pairs, Unit expected) {
  if (pairs.unit != expected) {
    throw Error(Errc::DegenerateData, std::string("expected reference unit ") +
                                          to_string(expected) + ", got " + to_string(pairs.unit));
  }
  if (pairs.pairs.size() < 10) {
    throw Error(Errc::DegenerateData,
                "need >= 10 pairs, got " + std::to_string(pairs.pairs.size()));
  }
  DataSummary s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Pair& p : pairs.pairs) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(Errc::DegenerateData, "non-finite pair");
    }
    s.x_min = std::min(s.x_min, p.x);
    s.x_max = std::max(s.x_max, p.x);
    s.y_min = std::min(s.y_min, p.y);
    s.y_max = std::max(s.y_max, p.y);
  }
  const double x_tol = 1e-12 * std::max(1.0, std::max(std::abs(s.x_min), std::abs(s.x_max)));
  const double y_tol = 1e-12 * std::max(1.0, std::max(std::abs(s.y_min), std::abs(s.y_max)));
  if (s.x_max - s.x_min <= x_tol) throw Error(Errc::DegenerateData, "constant sensor values");
  if (s.y_max - s.y_min <= y_tol) throw Error(Errc::DegenerateData, "constant reference values");
  return s;
}

// Slope of ln(y - y_min + delta) against x; falls back to 1 / x-span.
double initial_rate(std::span<const Pair> data, const DataSummary& s) {
  const double delta = 0.05 * (s.y_max - s.y_min);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const Pair& p : data) {
    const double ly = std::log(p.y - s.y_min + delta);
    sx += p.x;
    sy += ly;
    sxx += p.x * p.x;
    sxy += p.x * ly;
  }
  const double n = static_cast<double>(data.size());
  const double den = n * sxx - sx * sx;
  const double slope = den > 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  return slope > 0.0 && std::isfinite(slope) ? slope : 1.0 / (s.x_max - s.x_min);
}

template <int N, typename Model, typename Init>
detail::LmResult<N> fit_with_restarts(const Model& model, std::span<const Pair> data,
                                      const DataSummary& s, const FitOptions& options,
                                      Init&& init) {
  const double b0 = initial_rate(data, s);
  auto best = detail::levenberg_marquardt<N>(model, data, init(b0), options);
  if (best.converged) return best;

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> log_factor(-std::log(4.0), std::log(4.0));
  for (int r = 0; r < options.restarts; ++r) {
    const double b = b0 * std::exp(log_factor(rng));
    auto trial = detail::levenberg_marquardt<N>(model, data, init(b), options);
    if (trial.converged && (!best.converged || trial.cost < best.cost)) best = trial;
  }
  if (!best.converged) {
    throw Error(Errc::NonConvergence, "no convergence after " +
                                          std::to_string(options.restarts) + " restarts");
  }
  return best;
}

void fill_quality(CalibrationCurve& c, const AlignedPairs& pairs, const DataSummary& s) {
  double mean = 0.0;
  for (const Pair& p : pairs.pairs) mean += p.y;
  mean /= static_cast<double>(pairs.pairs.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (const Pair& p : pairs.pairs) {
    const double r = p.y - c(p.x);
    ss_res += r * r;
    ss_tot += (p.y - mean) * (p.y - mean);
  }
  c.r2 = 1.0 - ss_res / ss_tot;
  c.rmse = std::sqrt(ss_res / static_cast<double>(pairs.pairs.size()));
  c.x_min = s.x_min;
  c.x_max = s.x_max;
  c.c0 = pairs.c0;
  c.taxel = pairs.taxel;
  c.pair_count = pairs.pairs.size();
}

double range_ratio(const DataSummary& s, double b) {
  return (s.y_max - s.y_min) / (std::exp(b * s.x_max) - std::exp(b * s.x_min));
}

}  // namespace

const char* to_string(CurveForm form) { return form == CurveForm::force ? "force" : "pneumatic"; }

double CalibrationCurve::operator()(double x) const {
  if (form == CurveForm::force) return a * (std::exp(b * (x + d)) - std::exp(b * d));
  return a * std::exp(b * x) + d;
}

CalibrationCurve fit_force_curve(const AlignedPairs& pairs, const FitOptions& options) {
  const DataSummary s = check_data(pairs, Unit::newton);
  const ForceModel model;
  const auto result = fit_with_restarts<2>(model, pairs.pairs, s, options, [&](double b) {
    return Eigen::Vector2d(range_ratio(s, b), b);
  });
  CalibrationCurve c;
  c.form = CurveForm::force;
  c.a = result.params(0);
  c.b = result.params(1);
  c.d = 0.0;
  c.iterations = result.iterations;
  fill_quality(c, pairs, s);
  return c;
}

CalibrationCurve fit_pneumatic_curve(const AlignedPairs& pairs, const FitOptions& options) {
  const DataSummary s = check_data(pairs, Unit::kilopascal);
  const PneumaticModel model;
  const auto result = fit_with_restarts<3>(model, pairs.pairs, s, options, [&](double b) {
    const double a = range_ratio(s, b);
    return Eigen::Vector3d(a, b, s.y_min - a);
  });
  CalibrationCurve c;
  c.form = CurveForm::pneumatic;
  c.a = result.params(0);
  c.b = result.params(1);
  c.d = result.params(2);
  c.iterations = result.iterations;
  fill_quality(c, pairs, s);
  return c;
}

Estimate estimate_force(const CalibrationCurve& curve, double x) {
  if (curve.form != CurveForm::force) {
    throw Error(Errc::InvalidArgument, "estimate_force needs a force-form curve");
  }
  return {curve(x), x < curve.x_min || x > curve.x_max};
}

Estimate estimate_pressure(const CalibrationCurve& curve, double x) {
  if (curve.form != CurveForm::pneumatic) {
    throw Error(Errc::InvalidArgument, "estimate_pressure needs a pneumatic-form curve");
  }
  return {curve(x), x < curve.x_min || x > curve.x_max};
}

}  // namespace dexskin
