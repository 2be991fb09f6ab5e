#include "dexskin/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dexskin/error.hpp"
#include "dexskin/kernels.hpp"

namespace dexskin {

namespace {

constexpr double kLogFloor = 1e-300;

}  // namespace

double TaxelPhysics::ideal_x(double pressure_kpa) const {
  return std::log(std::max(pressure_kpa - d_kpa, kLogFloor) / a_kpa) / b;
}

double TaxelPhysics::pressure_kpa(double x) const { return a_kpa * std::exp(b * x) + d_kpa; }

double DriftModel::apply(double x, std::size_t cycle) const {
  if (!active()) return x;
  const std::size_t last = cycles > 1 ? cycles - 1 : 1;
  const double frac = static_cast<double>(std::min(cycle, last)) / static_cast<double>(last);
  const double zero = zero_drift_total * full_scale_x * frac;
  const double peak = peak_drift_total * full_scale_x * frac;
  return x + zero + (peak - zero) * (x / full_scale_x);
}

CouplingMatrix CouplingMatrix::identity(std::size_t n) {
  CouplingMatrix m;
  m.n_ = n;
  m.k_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m.k_[i * n + i] = 1.0;
  return m;
}

CouplingMatrix CouplingMatrix::neighbors(const TaxelLayout& layout, double coefficient) {
  CouplingMatrix m = identity(layout.taxel_count());
  for (std::size_t i = 0; i < layout.taxel_count(); ++i) {
    for (std::size_t j : layout.neighbors(i)) m.set(i, j, coefficient);
  }
  return m;
}

void CouplingMatrix::set(std::size_t row, std::size_t col, double value) {
  if (row >= n_ || col >= n_) throw Error(Errc::OutOfBounds, "coupling index");
  k_[row * n_ + col] = value;
}

bool CouplingMatrix::is_identity() const {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (k_[i * n_ + j] != (i == j ? 1.0 : 0.0)) return false;
    }
  }
  return true;
}

void CouplingMatrix::validate() const {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      const double v = k_[i * n_ + j];
      if (i == j ? v != 1.0 : !(v >= 0.0 && v <= 0.1)) {
        throw Error(Errc::InvalidConfig, "coupling (" + std::to_string(i) + "," +
                                             std::to_string(j) + ") = " + std::to_string(v));
      }
    }
  }
}

double nominal_a_kpa() { return 702.1 / (std::exp(2.5 * 1.3) - 1.0); }

SensorPhysics make_physics(const TaxelLayout& layout, const PhysicsSpec& spec) {
  if (spec.spread < 0.0 || spec.spread >= 1.0 || spec.c0_spread < 0.0 || spec.c0_spread >= 1.0) {
    throw Error(Errc::InvalidConfig, "spreads must lie in [0, 1)");
  }
  const double a = spec.a_kpa > 0.0 ? spec.a_kpa : nominal_a_kpa();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  SensorPhysics out;
  out.zero_consistent = spec.zero_consistent;
  out.taxels.resize(layout.taxel_count());
  for (auto& t : out.taxels) {
    t.a_kpa = a * (1.0 + spec.spread * u(rng));
    t.b = spec.b * (1.0 + spec.spread * u(rng));
    t.c0 = std::round(spec.c0 * (1.0 + spec.c0_spread * u(rng)));
    t.d_kpa = spec.zero_consistent ? -t.a_kpa : spec.d_kpa;
  }
  return out;
}

SimulatedSensor::SimulatedSensor(SensorPhysics physics, bool parallel_kernels)
    : physics_(std::move(physics)), parallel_(parallel_kernels), rng_(physics_.seed) {
  const std::size_t n = physics_.taxels.size();
  if (n == 0) throw Error(Errc::InvalidConfig, "sensor has no taxels");
  for (std::size_t i = 0; i < n; ++i) {
    auto& t = physics_.taxels[i];
    if (!(t.a_kpa > 0.0) || !(t.b > 0.0) || !(t.c0 > 0.0)) {
      throw Error(Errc::InvalidConfig, "taxel " + std::to_string(i) + " needs a > 0, b > 0, c0 > 0");
    }
    if (physics_.zero_consistent) {
      t.d_kpa = -t.a_kpa;
    } else if (!(t.d_kpa < 0.0)) {
      // Zero load must lie inside the curve's domain P > d.
      throw Error(Errc::InvalidConfig,
                  "taxel " + std::to_string(i) + ": d must be negative so that P = 0 > d");
    }
  }
  if (physics_.noise_sigma < 0.0 || physics_.samples_per_frame < 1) {
    throw Error(Errc::InvalidConfig, "noise_sigma >= 0 and samples_per_frame >= 1 required");
  }
  const auto& h = physics_.hysteresis;
  if (h.kind == HysteresisModel::Kind::play && (h.width < 0.0 || !(h.full_scale_x > 0.0))) {
    throw Error(Errc::InvalidConfig, "play width must be >= 0 with positive full_scale_x");
  }
  if (physics_.drift.active() && !(physics_.drift.full_scale_x > 0.0)) {
    throw Error(Errc::InvalidConfig, "drift needs positive full_scale_x");
  }
  if (physics_.coupling.size() == 0) {
    physics_.coupling = CouplingMatrix::identity(n);
  } else if (physics_.coupling.size() != n) {
    throw Error(Errc::InvalidConfig, "coupling matrix size does not match taxel count");
  }
  physics_.coupling.validate();
  identity_coupling_ = physics_.coupling.is_identity();

  ideal_.resize(n);
  mixed_.resize(n);
  sensed_.resize(n);
  reset();
}

void SimulatedSensor::reset() {
  cycle_ = 0;
  rng_.seed(physics_.seed);
  noise_.reset();
  play_.resize(physics_.taxels.size());
  for (std::size_t i = 0; i < play_.size(); ++i) play_[i] = physics_.taxels[i].ideal_x(0.0);
}

SensorFrame SimulatedSensor::respond(std::span<const double> pressure_kpa, std::int64_t timestamp_ms,
                                     std::uint32_t seq) {
  const std::size_t n = physics_.taxels.size();
  if (pressure_kpa.size() != n) {
    throw Error(Errc::LengthMismatch, "pressure field has " + std::to_string(pressure_kpa.size()) +
                                          " taxels, sensor " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (pressure_kpa[i] < 0.0) {
      throw Error(Errc::InvalidArgument, "negative pressure on taxel " + std::to_string(i));
    }
    ideal_[i] = physics_.taxels[i].ideal_x(pressure_kpa[i]);
  }

  if (identity_coupling_) {
    mixed_ = ideal_;
  } else {
    kernels::apply_coupling(physics_.coupling, ideal_, mixed_,
                            parallel_ ? kernels::Exec::parallel : kernels::Exec::serial);
  }

  const double half = physics_.hysteresis.band() / 2.0;
  SensorFrame frame;
  frame.timestamp_ms = timestamp_ms;
  frame.sensor_id = physics_.sensor_id;
  frame.seq = seq;
  frame.counts.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = mixed_[i];
    if (half > 0.0) {
      play_[i] = std::max(x - half, std::min(x + half, play_[i]));
      x = play_[i];
    }
    x = physics_.drift.apply(x, cycle_);

    double noise = 0.0;
    if (physics_.noise_sigma > 0.0) {
      for (int s = 0; s < physics_.samples_per_frame; ++s) noise += noise_(rng_);
      noise *= physics_.noise_sigma / physics_.samples_per_frame;
    }
    const double c0 = physics_.taxels[i].c0;
    const double counts = c0 * (1.0 + x) + noise;
    sensed_[i] = x + noise / c0;
    // Quantization is the last step; the ADC saturates at the u16 rails.
    frame.counts[i] = static_cast<std::uint16_t>(std::clamp(std::round(counts), 0.0, 65535.0));
  }
  return frame;
}

int VerticalStageProgram::steps_to_peak() const {
  return static_cast<int>(std::ceil(max_force_n / newton_per_step - 1e-9));
}

void RigProgram::validate() const {
  if (!(frame_rate_hz > 0.0) || !(gauge_rate_hz > 0.0) || preroll_ms < 0 || postroll_ms < 0) {
    throw Error(Errc::InvalidConfig, "rates must be positive and rolls non-negative");
  }
  if (kind == Kind::vertical_stage) {
    if (!(stage.newton_per_step > 0.0) || !(stage.max_force_n > 0.0) || stage.cycles < 1 ||
        stage.step_period_ms < 1 || !(stage.step_mm > 0.0)) {
      throw Error(Errc::InvalidConfig, "vertical stage needs positive step, force, cycles, period");
    }
  } else {
    if (!(chamber.max_kpa > 0.0) || !(chamber.cycle_s > 0.0) || chamber.cycles < 1) {
      throw Error(Errc::InvalidConfig, "chamber needs positive pressure, cycle length, cycles");
    }
  }
}

std::int64_t RigProgram::duration_ms() const {
  std::int64_t active = 0;
  if (kind == Kind::vertical_stage) {
    active = static_cast<std::int64_t>(stage.cycles) * 2 * stage.steps_to_peak() *
             stage.step_period_ms;
  } else {
    active = static_cast<std::int64_t>(std::llround(chamber.cycle_s * 1000.0)) * chamber.cycles;
  }
  return preroll_ms + active + postroll_ms;
}

double RigProgram::load_at(std::int64_t t_ms) const {
  const std::int64_t t = t_ms - preroll_ms;
  if (kind == Kind::vertical_stage) {
    const std::int64_t period = stage.step_period_ms;
    if (t < -period / 2) return 0.0;
    // Step j is held over [j * period - period / 2, j * period + period / 2).
    const std::int64_t j = (t + period / 2) / period;
    const std::int64_t n = stage.steps_to_peak();
    if (j >= static_cast<std::int64_t>(stage.cycles) * 2 * n) return 0.0;
    const std::int64_t s = n - std::llabs(n - j % (2 * n));
    return std::min(static_cast<double>(s) * stage.newton_per_step, stage.max_force_n);
  }
  const double cycle_ms = chamber.cycle_s * 1000.0;
  if (t < 0 || static_cast<double>(t) >= cycle_ms * chamber.cycles) return 0.0;
  const double u = static_cast<double>(t) / cycle_ms;
  const double frac = u - std::floor(u);
  return chamber.max_kpa * (1.0 - std::abs(1.0 - 2.0 * frac));
}

std::size_t RigProgram::cycle_at(std::int64_t t_ms) const {
  const std::int64_t t = t_ms - preroll_ms;
  std::int64_t cycle = 0;
  int cycles = 1;
  if (kind == Kind::vertical_stage) {
    const std::int64_t period = stage.step_period_ms;
    const std::int64_t j = t < -period / 2 ? 0 : (t + period / 2) / period;
    cycle = j / (2 * static_cast<std::int64_t>(stage.steps_to_peak()));
    cycles = stage.cycles;
  } else {
    const double cycle_ms = chamber.cycle_s * 1000.0;
    cycle = t < 0 ? 0 : static_cast<std::int64_t>(std::floor(static_cast<double>(t) / cycle_ms));
    cycles = chamber.cycles;
  }
  return static_cast<std::size_t>(std::clamp<std::int64_t>(cycle, 0, cycles - 1));
}

RigRun run_rig(const RigProgram& program, SimulatedSensor& sensor, const TaxelLayout& layout,
               bool keep_sensed) {
  program.validate();
  const std::size_t n = sensor.taxel_count();
  if (n != layout.taxel_count()) {
    throw Error(Errc::InvalidConfig, "sensor and layout taxel counts differ");
  }
  if (program.kind == RigProgram::Kind::vertical_stage && program.stage.target_taxel >= n) {
    throw Error(Errc::InvalidConfig, "target taxel out of range");
  }

  RigRun run;
  auto& rec = run.recording;
  rec.header.layout_id = layout.id();
  rec.header.channels.push_back(
      {ChannelDescriptor::Kind::frames, sensor.physics().sensor_id, n, Unit::newton});
  rec.header.channels.push_back({ChannelDescriptor::Kind::gauge, 0, 0, program.unit()});

  const std::int64_t end = program.duration_ms();
  std::vector<double> field(n, 0.0);
  const double area = program.kind == RigProgram::Kind::vertical_stage
                          ? layout.area_mm2(program.stage.target_taxel)
                          : 0.0;

  std::uint32_t seq = 0;
  std::int64_t gauge_index = 0;
  auto gauge_time = [&](std::int64_t g) {
    return static_cast<std::int64_t>(
        std::llround(static_cast<double>(g) * 1000.0 / program.gauge_rate_hz));
  };

  while (true) {
    const std::int64_t t = nominal_timestamp_ms(seq, program.frame_rate_hz);
    if (t > end) break;
    const double load = program.load_at(t);
    if (program.kind == RigProgram::Kind::vertical_stage) {
      field[program.stage.target_taxel] = load / area * 1000.0;  // N/mm^2 -> kPa
    } else {
      std::fill(field.begin(), field.end(), load);
    }
    sensor.set_cycle(program.cycle_at(t));
    rec.rows.emplace_back(sensor.respond(field, t, seq));
    if (keep_sensed) run.sensed.push_back({t, sensor.sensed()});

    // Gauge samples due up to and including this frame time follow it.
    for (std::int64_t tg = gauge_time(gauge_index); tg <= t; tg = gauge_time(++gauge_index)) {
      rec.rows.emplace_back(GaugeRecord{tg, program.load_at(tg), program.unit()});
    }
    ++seq;
  }
  for (std::int64_t tg = gauge_time(gauge_index); tg <= end; tg = gauge_time(++gauge_index)) {
    rec.rows.emplace_back(GaugeRecord{tg, program.load_at(tg), program.unit()});
  }
  return run;
}

}  // namespace dexskin
