#pragma once

#include <optional>
#include <span>
#include <vector>

namespace dexskin {

struct RewardConfig {
  double t_thresh = 0.1;
  double spike_cutoff = 0.35;
  double action_weight = 0.01;
  double failure_penalty = -10.0;
  double residual_min = 0.8;
  double residual_max = 1.2;
  double ema_alpha = 0.3;

  /// Throws InvalidConfig.
  void validate() const;
};

struct ForceTerm {
  double penalty = 0.0;   // -raw, <= 0
  double raw = 0.0;       // sum of squared excess over t_thresh, >= 0
  std::vector<std::size_t> masked;
};

/// Taxels above spike_cutoff are dropped first; the rest contribute
/// max(0, t - t_thresh)^2.
ForceTerm force_reward(std::span<const double> tactile, const RewardConfig& cfg = {});

/// -|(1 - a_r) * a_b|. Throws OutOfBounds when a_r leaves the residual bounds.
double action_reward(double a_b, double a_r, const RewardConfig& cfg = {});

struct RewardBreakdown {
  double r_force = 0.0;
  double r_force_raw = 0.0;
  double r_action = 0.0;
  double r_failure = 0.0;
  double total = 0.0;
  std::vector<std::size_t> masked_taxels;
};

RewardBreakdown total_reward(std::span<const double> tactile, double a_b, double a_r, bool failed,
                             const RewardConfig& cfg = {});

/// clamp(a_b * a_r, 0, 1). Throws OutOfBounds for a_b outside [0, 1] or a_r
/// outside the residual bounds.
double compose_action(double a_b, double a_r, const RewardConfig& cfg = {});

/// alpha * next + (1 - alpha) * prev.
double ema_smooth(double prev, double next, double alpha);

/// EMA over successive gripper commands; the first command passes through.
class ActionSmoother {
 public:
  explicit ActionSmoother(double alpha = 0.3) : alpha_(alpha) {}

  double step(double next);
  void reset() { state_.reset(); }

 private:
  double alpha_;
  std::optional<double> state_;
};

}  // namespace dexskin
