#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dexskin/frame.hpp"
#include "dexskin/layout.hpp"
#include "dexskin/recording.hpp"

namespace dexskin {

/// Ground truth for one taxel in pneumatic form P = a * exp(b * x) + d, x = dC/C0.
struct TaxelPhysics {
  double a_kpa = 0.0;
  double b = 0.0;
  double d_kpa = 0.0;
  double c0 = 20000.0;

  /// Inverse of the pneumatic form: x = ln((P - d) / a) / b.
  double ideal_x(double pressure_kpa) const;
  double pressure_kpa(double x) const;
};

/// Scalar play (backlash) operator on x. The play band is width * full_scale_x.
struct HysteresisModel {
  enum class Kind { none, play };
  Kind kind = Kind::none;
  double width = 0.0;
  double full_scale_x = 1.0;

  double band() const { return kind == Kind::play ? width * full_scale_x : 0.0; }
};

/// Additive offsets growing linearly with cycle index so that after `cycles`
/// cycles the baseline has moved by zero_drift_total * full_scale_x and the
/// peak by peak_drift_total * full_scale_x.
struct DriftModel {
  double peak_drift_total = 0.0;
  double zero_drift_total = 0.0;
  std::size_t cycles = 1;
  double full_scale_x = 1.0;

  bool active() const { return peak_drift_total != 0.0 || zero_drift_total != 0.0; }
  double apply(double x, std::size_t cycle) const;
};

/// Square taxel-to-taxel coupling, sensed x' = K x. Row-major.
class CouplingMatrix {
 public:
  CouplingMatrix() = default;
  static CouplingMatrix identity(std::size_t n);
  /// Identity plus `coefficient` between every pair of grid neighbours.
  static CouplingMatrix neighbors(const TaxelLayout& layout, double coefficient);

  std::size_t size() const { return n_; }
  double at(std::size_t row, std::size_t col) const { return k_[row * n_ + col]; }
  void set(std::size_t row, std::size_t col, double value);
  std::span<const double> data() const { return k_; }
  bool is_identity() const;

  /// Throws InvalidConfig unless diag == 1 and off-diagonals lie in [0, 0.1].
  void validate() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> k_;
};

struct SensorPhysics {
  std::uint8_t sensor_id = 0;
  std::vector<TaxelPhysics> taxels;
  /// When set every taxel has d = -a so that x(P = 0) = 0 exactly.
  bool zero_consistent = true;
  double noise_sigma = 0.0;    // counts, Gaussian, per PCB sample
  int samples_per_frame = 4;   // PCB averages this many samples per frame
  std::uint64_t seed = 1;
  HysteresisModel hysteresis;
  DriftModel drift;
  CouplingMatrix coupling;     // empty means identity
};

/// Nominal curve: b = 2.5 and a chosen so that 702.1 kPa reads x = 1.3.
struct PhysicsSpec {
  double a_kpa = 0.0;   // 0 selects the nominal value
  double b = 2.5;
  double d_kpa = 0.0;   // used only when zero_consistent is false
  double c0 = 20000.0;
  double spread = 0.15;     // a and b drawn uniformly within +/- spread (relative)
  double c0_spread = 0.0;
  bool zero_consistent = true;
  std::uint64_t seed = 7;
};

double nominal_a_kpa();

SensorPhysics make_physics(const TaxelLayout& layout, const PhysicsSpec& spec);

/// Stateful virtual sensor (play memory, cycle index, noise stream). Single owner.
class SimulatedSensor {
 public:
  /// Validates the configuration; throws InvalidConfig.
  explicit SimulatedSensor(SensorPhysics physics, bool parallel_kernels = false);

  SensorFrame respond(std::span<const double> pressure_kpa, std::int64_t timestamp_ms,
                      std::uint32_t seq);

  /// dC/C0 of the last frame including noise but before rounding to counts.
  const std::vector<double>& sensed() const { return sensed_; }

  void set_cycle(std::size_t cycle) { cycle_ = cycle; }
  std::size_t cycle() const { return cycle_; }
  void reset();

  const SensorPhysics& physics() const { return physics_; }
  std::size_t taxel_count() const { return physics_.taxels.size(); }

 private:
  SensorPhysics physics_;
  bool parallel_;
  bool identity_coupling_;
  std::size_t cycle_ = 0;
  std::vector<double> ideal_;
  std::vector<double> mixed_;
  std::vector<double> play_;
  std::vector<double> sensed_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_{0.0, 1.0};
};

struct VerticalStageProgram {
  std::size_t target_taxel = 0;
  double step_mm = 0.01;
  double newton_per_step = 0.025;   // 2.5 N per 100 steps
  double max_force_n = 2.5;
  int cycles = 3;
  int step_period_ms = 100;

  int steps_to_peak() const;
};

struct PneumaticProgram {
  double max_kpa = 41.4;
  double cycle_s = 20.0;   // one ramp up and down
  int cycles = 1;
};

struct RigProgram {
  enum class Kind { vertical_stage, pneumatic_chamber };
  Kind kind = Kind::vertical_stage;
  VerticalStageProgram stage;
  PneumaticProgram chamber;
  std::int64_t preroll_ms = 1000;    // no-load lead-in, used for the baseline
  std::int64_t postroll_ms = 1000;
  double frame_rate_hz = 30.0;
  double gauge_rate_hz = 10.0;

  void validate() const;
  std::int64_t duration_ms() const;
  /// Reference load (N for the stage, kPa for the chamber) at time t.
  double load_at(std::int64_t t_ms) const;
  std::size_t cycle_at(std::int64_t t_ms) const;
  Unit unit() const { return kind == Kind::vertical_stage ? Unit::newton : Unit::kilopascal; }
};

struct RigRun {
  Recording recording;
  std::vector<NormalizedFrame> sensed;   // SimulatedSensor::sensed() per frame, when requested
};

RigRun run_rig(const RigProgram& program, SimulatedSensor& sensor, const TaxelLayout& layout,
               bool keep_sensed = false);

}  // namespace dexskin
