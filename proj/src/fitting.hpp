#pragma once

// Levenberg-Marquardt for the small exponential calibration models.

#include <Eigen/Dense>

#include <cmath>
#include <span>

#include "dexskin/calibration.hpp"

namespace dexskin::detail {

template <int N>
struct LmResult {
  Eigen::Matrix<double, N, 1> params;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Model concept: value(x, p), gradient(x, p) -> dvalue/dp, valid(p).
template <int N, typename Model>
LmResult<N> levenberg_marquardt(const Model& model, std::span<const Pair> data,
                                Eigen::Matrix<double, N, 1> p, const FitOptions& options) {
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;

  auto cost_of = [&](const Vec& q) {
    double s = 0.0;
    for (const Pair& d : data) {
      const double r = d.y - model.value(d.x, q);
      s += r * r;
    }
    return s;
  };

  LmResult<N> out;
  out.params = p;
  if (!model.valid(p)) return out;
  double cost = cost_of(p);
  if (!std::isfinite(cost)) return out;

  double lambda = 1e-3;
  for (int it = 1; it <= options.max_iterations; ++it) {
    Mat jtj = Mat::Zero();
    Vec jtr = Vec::Zero();
    for (const Pair& d : data) {
      const Vec g = model.gradient(d.x, p);
      const double r = d.y - model.value(d.x, p);
      jtj.noalias() += g * g.transpose();
      jtr.noalias() += g * r;
    }

    Vec delta;
    Vec trial;
    double trial_cost = 0.0;
    bool accepted = false;
    while (!accepted) {
      Mat damped = jtj;
      for (int i = 0; i < N; ++i) damped(i, i) += lambda * std::max(jtj(i, i), 1e-300);
      delta = damped.ldlt().solve(jtr);
      trial = p + delta;
      if (delta.allFinite() && model.valid(trial)) {
        trial_cost = cost_of(trial);
        accepted = std::isfinite(trial_cost) && trial_cost <= cost;
      }
      if (!accepted) {
        lambda *= 10.0;
        if (lambda > 1e16) {
          // No descent direction left at working precision: stationary point.
          out.params = p;
          out.cost = cost;
          out.iterations = it;
          out.converged = true;
          return out;
        }
      }
    }

    double rel = 0.0;
    for (int i = 0; i < N; ++i) {
      rel = std::max(rel, std::abs(delta(i)) / std::max(std::abs(p(i)), 1e-12));
    }
    p = trial;
    cost = trial_cost;
    lambda = std::max(lambda / 10.0, 1e-15);
    if (rel < options.tolerance) {
      out.params = p;
      out.cost = cost;
      out.iterations = it;
      out.converged = true;
      return out;
    }
  }
  out.params = p;
  out.cost = cost;
  out.iterations = options.max_iterations;
  return out;
}

}  // namespace dexskin::detail
