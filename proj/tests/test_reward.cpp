#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dexskin/error.hpp"
#include "dexskin/reward.hpp"

using namespace dexskin;

namespace {

// Distance in representable doubles; both arguments share a sign here.
std::uint64_t ulps(double a, double b) {
  const auto ia = std::bit_cast<std::int64_t>(a);
  const auto ib = std::bit_cast<std::int64_t>(b);
  return static_cast<std::uint64_t>(ia > ib ? ia - ib : ib - ia);
}

}  // namespace

TEST_CASE("force term") {
  std::vector<double> one{0.2};
  const ForceTerm f = force_reward(one);
  const double excess = 0.2 - 0.1;
  CHECK(f.raw == excess * excess);
  CHECK(f.penalty == -(excess * excess));
  CHECK(ulps(f.penalty, -0.01) <= 2);
  CHECK(f.masked.empty());

  std::vector<double> below{0.05, 0.1, -0.3};
  CHECK(force_reward(below).raw == 0.0);

  std::vector<double> spike{0.0, 0.5, 0.2};
  const ForceTerm s = force_reward(spike);
  REQUIRE(s.masked.size() == 1);
  CHECK(s.masked[0] == 1);
  CHECK(s.raw == excess * excess);

  // Exactly at the cutoff still counts.
  std::vector<double> edge{0.35};
  CHECK(force_reward(edge).masked.empty());
  CHECK(force_reward(edge).raw == (0.35 - 0.1) * (0.35 - 0.1));
}

TEST_CASE("force term is strictly monotone below the cutoff") {
  std::vector<double> t(120, 0.0);
  double prev = 0.0;
  for (double v = 0.11; v <= 0.35; v += 0.01) {
    t[7] = v;
    const double r = force_reward(t).penalty;
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("action term") {
  CHECK(action_reward(0.7, 1.0) == 0.0);
  CHECK(action_reward(0.0, 0.8) == 0.0);
  CHECK(action_reward(0.0, 1.2) == 0.0);
  const double r = action_reward(0.5, 1.2);
  CHECK(r == -std::abs((1.0 - 1.2) * 0.5));
  CHECK(ulps(r, -0.1) <= 2);
  CHECK(action_reward(0.5, 1.1) >= action_reward(0.5, 1.2));
  CHECK(action_reward(0.5, 0.9) >= action_reward(0.5, 0.8));
  CHECK_THROWS_WITH_AS(action_reward(0.5, 1.21), doctest::Contains("OutOfBounds"), Error);
  CHECK_THROWS_AS(action_reward(0.5, 0.79), Error);
}

TEST_CASE("total reward composes the terms exactly") {
  std::vector<double> t{0.2, 0.0};
  const RewardBreakdown r = total_reward(t, 0.5, 1.2, false);
  CHECK(r.total == r.r_force + 0.01 * r.r_action + r.r_failure);
  CHECK(r.r_failure == 0.0);
  CHECK(ulps(r.total, -0.011) <= 2);

  const RewardBreakdown f = total_reward(std::vector<double>(4, 0.0), 0.3, 1.0, true);
  CHECK(f.r_failure == -10.0);
  CHECK(f.total == -10.0);

  RewardConfig cfg;
  cfg.action_weight = 0.5;
  cfg.failure_penalty = -3.0;
  const RewardBreakdown c = total_reward(t, 0.5, 1.2, true, cfg);
  CHECK(c.total == c.r_force + 0.5 * c.r_action - 3.0);
}

TEST_CASE("compose_action") {
  CHECK(compose_action(0.5, 1.2) == 0.6);
  CHECK(compose_action(0.9, 1.2) == 1.0);
  CHECK(compose_action(0.0, 0.8) == 0.0);
  CHECK(compose_action(1.0, 1.0) == 1.0);
  CHECK_THROWS_AS(compose_action(1.1, 1.0), Error);
  CHECK_THROWS_AS(compose_action(-0.1, 1.0), Error);
  CHECK_THROWS_AS(compose_action(0.5, 1.3), Error);
}

TEST_CASE("ema smoothing") {
  CHECK(ema_smooth(0.0, 1.0, 0.3) == 0.3);
  CHECK(ema_smooth(0.4, 0.4, 0.3) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(ema_smooth(0.2, 0.9, 1.0) == 0.9);

  // Error against a constant input shrinks by (1 - alpha) each step.
  double y = 0.0;
  double err = 1.0;
  for (int i = 0; i < 20; ++i) {
    y = ema_smooth(y, 1.0, 0.3);
    err *= 0.7;
    CHECK(std::abs((1.0 - y) - err) < 1e-12);
  }

  ActionSmoother s;
  CHECK(s.step(0.8) == 0.8);
  CHECK(s.step(0.0) == ema_smooth(0.8, 0.0, 0.3));
  s.reset();
  CHECK(s.step(0.25) == 0.25);
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(RewardConfig{}.validate());
  auto invalid = [](auto mutate) {
    RewardConfig c;
    mutate(c);
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("InvalidConfig"), Error);
  };
  invalid([](RewardConfig& c) { c.t_thresh = -0.1; });
  invalid([](RewardConfig& c) { c.spike_cutoff = 0.1; });
  invalid([](RewardConfig& c) { c.action_weight = -1.0; });
  invalid([](RewardConfig& c) { c.residual_min = 0.0; });
  invalid([](RewardConfig& c) { c.residual_max = 0.9; });
  invalid([](RewardConfig& c) { c.ema_alpha = 0.0; });
  invalid([](RewardConfig& c) { c.ema_alpha = 1.5; });
}
