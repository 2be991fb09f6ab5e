#include <algorithm>
#include <cmath>
#include <string>

#include "dexskin/error.hpp"
#include "dexskin/recording.hpp"
#include "dexskin/reward.hpp"

namespace dexskin {

namespace {

void check_residual(double a_r, const RewardConfig& cfg) {
  if (!(a_r >= cfg.residual_min && a_r <= cfg.residual_max)) {
    throw Error(Errc::OutOfBounds, "residual " + format_double(a_r) + " outside [" +
                                       format_double(cfg.residual_min) + ", " +
                                       format_double(cfg.residual_max) + "]");
  }
}

}  // namespace

void RewardConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(Errc::InvalidConfig, what); };
  if (!(t_thresh >= 0.0)) bad("t_thresh must be >= 0");
  if (!(spike_cutoff > t_thresh)) bad("spike_cutoff must exceed t_thresh");
  if (!(action_weight >= 0.0)) bad("action_weight must be >= 0");
  if (!(failure_penalty <= 0.0)) bad("failure_penalty must be <= 0");
  if (!(residual_min > 0.0 && residual_min <= 1.0 && residual_max >= 1.0)) {
    bad("residual bounds must bracket 1");
  }
  if (!(ema_alpha > 0.0 && ema_alpha <= 1.0)) bad("ema_alpha must be in (0, 1]");
}

ForceTerm force_reward(std::span<const double> tactile, const RewardConfig& cfg) {
  ForceTerm out;
  for (std::size_t i = 0; i < tactile.size(); ++i) {
    const double t = tactile[i];
    if (t > cfg.spike_cutoff) {
      out.masked.push_back(i);
      continue;
    }
    const double excess = std::max(0.0, t - cfg.t_thresh);
    out.raw += excess * excess;
  }
  out.penalty = 0.0 - out.raw;   // +0 rather than -0 when nothing exceeds
  return out;
}

double action_reward(double a_b, double a_r, const RewardConfig& cfg) {
  check_residual(a_r, cfg);
  return 0.0 - std::abs((1.0 - a_r) * a_b);
}

RewardBreakdown total_reward(std::span<const double> tactile, double a_b, double a_r, bool failed,
                             const RewardConfig& cfg) {
  RewardBreakdown r;
  ForceTerm f = force_reward(tactile, cfg);
  r.r_force = f.penalty;
  r.r_force_raw = f.raw;
  r.masked_taxels = std::move(f.masked);
  r.r_action = action_reward(a_b, a_r, cfg);
  r.r_failure = failed ? cfg.failure_penalty : 0.0;
  r.total = r.r_force + cfg.action_weight * r.r_action + r.r_failure;
  return r;
}

double compose_action(double a_b, double a_r, const RewardConfig& cfg) {
  if (!(a_b >= 0.0 && a_b <= 1.0)) {
    throw Error(Errc::OutOfBounds, "base action " + format_double(a_b) + " outside [0, 1]");
  }
  check_residual(a_r, cfg);
  return std::clamp(a_b * a_r, 0.0, 1.0);
}

double ema_smooth(double prev, double next, double alpha) {
  return alpha * next + (1.0 - alpha) * prev;
}

double ActionSmoother::step(double next) {
  state_ = state_ ? ema_smooth(*state_, next, alpha_) : next;
  return *state_;
}

}  // namespace dexskin
