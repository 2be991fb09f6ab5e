#include <doctest.h>

#include <cmath>
#include <random>

#include "dexskin/calibration.hpp"
#include "dexskin/error.hpp"
#include "dexskin/simulator.hpp"

using namespace dexskin;

namespace {

// Triangle wave with `cycles` apexes at (k + 0.5) * period, sampled every dt ms.
std::vector<TimedValue> triangle(int cycles, std::int64_t period_ms, std::int64_t dt_ms,
                                 double amplitude = 1.0, std::int64_t shift_ms = 0) {
  std::vector<TimedValue> out;
  for (std::int64_t t = 0; t <= cycles * period_ms; t += dt_ms) {
    const double frac = std::fmod(static_cast<double>(t), static_cast<double>(period_ms)) /
                        static_cast<double>(period_ms);
    out.push_back({t + shift_ms, amplitude * (1.0 - std::abs(1.0 - 2.0 * frac))});
  }
  return out;
}

AlignedPairs force_pairs(double A, double b, double x_max, int n) {
  AlignedPairs p;
  p.unit = Unit::newton;
  for (int i = 0; i < n; ++i) {
    const double x = x_max * i / (n - 1);
    p.pairs.push_back({x, A * std::expm1(b * x)});
  }
  return p;
}

AlignedPairs pneumatic_pairs(double a, double b, double d, double p_max, int n) {
  AlignedPairs p;
  p.unit = Unit::kilopascal;
  for (int i = 0; i < n; ++i) {
    const double kpa = p_max * i / (n - 1);
    p.pairs.push_back({std::log((kpa - d) / a) / b, kpa});
  }
  return p;
}

}  // namespace

TEST_CASE("detect_peaks on clean triangles") {
  const auto tri = triangle(3, 3000, 100);
  const auto peaks = detect_peaks(tri);
  REQUIRE(peaks.size() == 3);
  CHECK(peaks[0] == 15);
  CHECK(peaks[1] == 45);
  CHECK(peaks[2] == 75);
}

TEST_CASE("detect_peaks with 1% noise stays within two samples") {
  auto tri = triangle(3, 3000, 100);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (auto& s : tri) s.value += noise(rng);
  const auto peaks = detect_peaks(tri);
  REQUIRE(peaks.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(std::llabs(static_cast<long long>(peaks[k]) - (15 + 30 * k)) <= 2);
}

TEST_CASE("detect_peaks edge cases") {
  std::vector<double> ramp(50);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
  CHECK(detect_peaks(ramp).empty());
  std::vector<double> flat(10, 2.0);
  CHECK(detect_peaks(flat).empty());
  std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_WITH_AS(detect_peaks(two), doctest::Contains("SeriesTooShort"), Error);
  // A plateau reports its first sample.
  std::vector<double> plateau{0, 1, 2, 3, 3, 3, 2, 1, 0};
  CHECK(detect_peaks(plateau) == std::vector<std::size_t>{3});
  // Small bumps below 20% of the range are not peaks.
  std::vector<double> bumps{0, 10, 0, 0.5, 0.4, 0.6, 0, 10, 0};
  CHECK(detect_peaks(bumps) == std::vector<std::size_t>{1, 7});
}

TEST_CASE("align identical series") {
  const auto tri = triangle(3, 3000, 100);
  const AlignedPairs p = align_by_peaks(tri, tri);
  CHECK(p.offset_ms == 0);
  REQUIRE(p.pairs.size() == tri.size());
  for (std::size_t i = 0; i < tri.size(); ++i) {
    CHECK(p.pairs[i].x == tri[i].value);
    CHECK(p.pairs[i].y == tri[i].value);
  }
}

TEST_CASE("align recovers an injected sensor delay") {
  // 30 Hz sensor delayed by 100 ms against a 10 Hz gauge.
  std::vector<TimedValue> sensor;
  for (std::uint32_t s = 0; s <= 270; ++s) {
    const std::int64_t t = nominal_timestamp_ms(s);
    const double frac = std::fmod(static_cast<double>(t - 100) + 3000.0, 3000.0) / 3000.0;
    sensor.push_back({t, 1.0 - std::abs(1.0 - 2.0 * frac)});
  }
  const auto gauge = triangle(3, 3000, 100);
  const AlignedPairs p = align_by_peaks(sensor, gauge);
  CHECK(std::abs(static_cast<double>(p.offset_ms) - 100.0) <= 1000.0 / 30.0);
  CHECK(p.pairs.size() >= gauge.size() - 2);
  for (const Pair& pr : p.pairs) CHECK(std::abs(pr.x - pr.y) <= 0.05);
}

TEST_CASE("align failures") {
  const auto a = triangle(3, 3000, 100);
  const auto far = triangle(3, 3000, 100, 1.0, 100000);
  CHECK_THROWS_WITH_AS(align_by_peaks(a, far), doctest::Contains("NoOverlap"), Error);
  std::vector<TimedValue> ramp;
  for (int i = 0; i < 50; ++i) ramp.push_back({i * 100, static_cast<double>(i)});
  CHECK_THROWS_WITH_AS(align_by_peaks(ramp, a), doctest::Contains("NoPeaks"), Error);
  CHECK_THROWS_WITH_AS(align_by_peaks(a, ramp), doctest::Contains("NoPeaks"), Error);
}

TEST_CASE("estimate_force") {
  CalibrationCurve c;
  c.form = CurveForm::force;
  c.a = 0.5;
  c.b = 4.0;
  c.d = 0.1;
  c.x_min = 0.0;
  c.x_max = 0.5;
  const Estimate e = estimate_force(c, 0.3);
  CHECK(e.value == doctest::Approx(1.7306038633769223).epsilon(1e-15));
  CHECK_FALSE(e.extrapolated);
  CHECK(estimate_force(c, 0.0).value == 0.0);
  CHECK(estimate_force(c, 0.9).extrapolated);
  double prev = -1.0;
  for (int i = 0; i <= 50; ++i) {
    const double f = estimate_force(c, 0.02 * i).value;
    CHECK(f > prev);
    prev = f;
  }
  CHECK_THROWS_AS(estimate_pressure(c, 0.1), Error);
}

TEST_CASE("force fit recovers the identifiable parameters") {
  // Truth a=0.5, b=4, d=0.1 only enters as a * exp(b d).
  const double A = 0.5 * std::exp(0.4);
  const CalibrationCurve c = fit_force_curve(force_pairs(A, 4.0, 0.5, 60));
  CHECK(c.form == CurveForm::force);
  CHECK(c.a == doctest::Approx(A).epsilon(1e-6));
  CHECK(c.b == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(c.d == 0.0);
  CHECK(c.r2 >= 1.0 - 1e-9);
  CHECK(c.rmse <= 1e-9);
  CHECK(c.x_min == 0.0);
  CHECK(c.x_max == 0.5);
  CHECK(c(0.0) == 0.0);
}

TEST_CASE("force fit with noise") {
  AlignedPairs p = force_pairs(0.4486, 2.5, 1.3 * 0.6, 400);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.025);
  for (auto& pr : p.pairs) pr.y += noise(rng);
  const CalibrationCurve c = fit_force_curve(p);
  CHECK(c.r2 >= 0.99);
  CHECK(c.rmse == doctest::Approx(0.025).epsilon(0.15));
}

TEST_CASE("pneumatic fit recovers (a, b, d)") {
  const double a = nominal_a_kpa() * 1.1, b = 2.5 * 0.9, d = -a;
  const CalibrationCurve c = fit_pneumatic_curve(pneumatic_pairs(a, b, d, 18.7, 100));
  CHECK(c.form == CurveForm::pneumatic);
  CHECK(c.a == doctest::Approx(a).epsilon(1e-6));
  CHECK(c.b == doctest::Approx(b).epsilon(1e-6));
  CHECK(c.d == doctest::Approx(d).epsilon(1e-6));
  CHECK(c.r2 >= 1.0 - 1e-9);
  CHECK(std::abs(c(0.0)) <= 1e-6);   // zero-consistent data: P(0) ~ 0
}

TEST_CASE("degenerate fits") {
  AlignedPairs zero_y = force_pairs(0.5, 4.0, 0.5, 20);
  for (auto& p : zero_y.pairs) p.y = 0.0;
  CHECK_THROWS_WITH_AS(fit_force_curve(zero_y), doctest::Contains("DegenerateData"), Error);

  AlignedPairs two = pneumatic_pairs(30.0, 2.5, -30.0, 18.7, 2);
  CHECK_THROWS_WITH_AS(fit_pneumatic_curve(two), doctest::Contains("DegenerateData"), Error);

  AlignedPairs const_x = force_pairs(0.5, 4.0, 0.5, 20);
  for (auto& p : const_x.pairs) p.x = 0.2;
  CHECK_THROWS_AS(fit_force_curve(const_x), Error);

  // Unit must match the form.
  CHECK_THROWS_AS(fit_pneumatic_curve(force_pairs(0.5, 4.0, 0.5, 20)), Error);
}

TEST_CASE("fitting ignores uniform time shifts") {
  const TaxelLayout layout = TaxelLayout::standard();
  PhysicsSpec spec;
  spec.spread = 0.0;
  SimulatedSensor sensor(make_physics(layout, spec));
  RigProgram prog;
  prog.stage.target_taxel = 5;
  prog.stage.cycles = 3;
  const Recording rec = run_rig(prog, sensor, layout).recording;
  const CalibrationCurve base = calibrate_taxel(rec, 0, 5);

  Recording shifted = rec;
  for (auto& row : shifted.rows) {
    std::visit([](auto& r) { r.timestamp_ms += 5000; }, row);
  }
  const CalibrationCurve moved = calibrate_taxel(shifted, 0, 5);
  CHECK(moved.a == base.a);
  CHECK(moved.b == base.b);
}

TEST_CASE("calibrate_taxel end to end on a quantized stage run") {
  const TaxelLayout layout = TaxelLayout::standard();
  SimulatedSensor sensor(make_physics(layout, PhysicsSpec{}));
  const TaxelPhysics truth = sensor.physics().taxels[30];
  RigProgram prog;
  prog.stage.target_taxel = 30;
  prog.stage.cycles = 4;
  const Recording rec = run_rig(prog, sensor, layout).recording;
  const AlignedPairs pairs = prepare_pairs(rec, 0, 30);
  CHECK(pairs.unit == Unit::newton);
  CHECK(pairs.c0 == truth.c0);
  CHECK(std::llabs(pairs.offset_ms) <= prog.stage.step_period_ms / 2);
  const CalibrationCurve c = calibrate_taxel(rec, 0, 30);
  CHECK(c.r2 >= 1.0 - 1e-6);
  const double A = layout.area_mm2(30) * truth.a_kpa / 1000.0;
  CHECK(c.a == doctest::Approx(A).epsilon(1e-3));
  CHECK(c.b == doctest::Approx(truth.b).epsilon(1e-3));

  // estimate o normalize o respond reproduces the applied force.
  for (double newton : {0.5, 1.0, 2.0, 2.5}) {
    std::vector<double> field(120, 0.0);
    field[30] = newton / layout.area_mm2(30) * 1000.0;
    SimulatedSensor probe(sensor.physics());
    const SensorFrame f = probe.respond(field, 0, 0);
    const double x = (f.counts[30] - truth.c0) / truth.c0;
    CHECK(estimate_force(c, x).value == doctest::Approx(newton).epsilon(2e-3));
  }
  CHECK_THROWS_AS(prepare_pairs(rec, 0, 120), Error);
  CHECK_THROWS_AS(prepare_pairs(rec, 3, 0), Error);
}

TEST_CASE("fit options are honoured") {
  FitOptions opts;
  opts.max_iterations = 1;
  opts.restarts = 0;
  CHECK_THROWS_WITH_AS(fit_pneumatic_curve(pneumatic_pairs(30.0, 2.5, -30.0, 18.7, 50), opts),
                       doctest::Contains("NonConvergence"), Error);
}
