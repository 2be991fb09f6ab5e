#include <fstream>
#include <string>

#include "dexskin/documents.hpp"
#include "dexskin/error.hpp"

namespace dexskin::docs {

namespace {

void expect_schema(const json& doc, const char* schema) {
  if (!doc.is_object() || !doc.contains("schema") || doc["schema"] != schema) {
    throw Error(Errc::ParseError, std::string("expected schema ") + schema);
  }
}

// Wraps library exceptions (missing keys, wrong types) as ParseError.
template <typename F>
auto parsing(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string(what) + ": " + e.what());
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json layout_to_json(const TaxelLayout& layout) {
  const auto& p = layout.params();
  json taxels = json::array();
  for (std::size_t i = 0; i < layout.taxel_count(); ++i) {
    const GridCell c = layout.cell_of(i);
    taxels.push_back({{"id", i},
                      {"region", to_string(layout.region_of(i))},
                      {"finger", layout.finger_of(i)},
                      {"row", c.row},
                      {"col", c.col},
                      {"area_mm2", layout.area_mm2(i)},
                      {"neighbors", layout.neighbors(i)}});
  }
  return {{"schema", kLayoutSchema},
          {"id", p.id},
          {"fingers", p.fingers},
          {"dome_count", p.dome_count},
          {"grid_columns", p.grid_columns},
          {"cylinder_rows", p.cylinder_rows},
          {"taxel_area_mm2", p.taxel_area_mm2},
          {"angular_coverage_deg", p.angular_coverage_deg},
          {"grid_rows", layout.grid_rows()},
          {"grid_cols", layout.grid_cols()},
          {"taxel_count", layout.taxel_count()},
          {"taxels", taxels}};
}

TaxelLayout layout_from_json(const json& doc) {
  expect_schema(doc, kLayoutSchema);
  return parsing("layout", [&] {
    TaxelLayout::Params p;
    read_opt(doc, "id", p.id);
    read_opt(doc, "fingers", p.fingers);
    read_opt(doc, "dome_count", p.dome_count);
    read_opt(doc, "grid_columns", p.grid_columns);
    read_opt(doc, "cylinder_rows", p.cylinder_rows);
    read_opt(doc, "taxel_area_mm2", p.taxel_area_mm2);
    read_opt(doc, "angular_coverage_deg", p.angular_coverage_deg);
    TaxelLayout layout = TaxelLayout::make(p);
    if (doc.contains("taxels")) {
      for (const json& t : doc.at("taxels")) {
        if (t.contains("area_mm2")) {
          layout.set_area_mm2(t.at("id").get<std::size_t>(), t.at("area_mm2").get<double>());
        }
      }
    }
    return layout;
  });
}

SensorPhysics build_physics(const SimulationConfig& config, const TaxelLayout& layout) {
  SensorPhysics physics = make_physics(layout, config.spec);
  physics.sensor_id = static_cast<std::uint8_t>(config.sensor_id);
  physics.noise_sigma = config.noise_sigma;
  physics.samples_per_frame = config.samples_per_frame;
  physics.seed = config.noise_seed;
  physics.hysteresis = config.hysteresis;
  physics.drift = config.drift;
  if (config.neighbor_coupling != 0.0) {
    physics.coupling = CouplingMatrix::neighbors(layout, config.neighbor_coupling);
  }
  return physics;
}

json physics_to_json(const SimulationConfig& c) {
  return {{"schema", kPhysicsSchema},
          {"sensor_id", c.sensor_id},
          {"a_kpa", c.spec.a_kpa},
          {"b", c.spec.b},
          {"d_kpa", c.spec.d_kpa},
          {"c0", c.spec.c0},
          {"spread", c.spec.spread},
          {"c0_spread", c.spec.c0_spread},
          {"zero_consistent", c.spec.zero_consistent},
          {"seed", c.spec.seed},
          {"noise_sigma", c.noise_sigma},
          {"samples_per_frame", c.samples_per_frame},
          {"noise_seed", c.noise_seed},
          {"hysteresis",
           {{"kind", c.hysteresis.kind == HysteresisModel::Kind::play ? "play" : "none"},
            {"width", c.hysteresis.width},
            {"full_scale_x", c.hysteresis.full_scale_x}}},
          {"drift",
           {{"peak_total", c.drift.peak_drift_total},
            {"zero_total", c.drift.zero_drift_total},
            {"cycles", c.drift.cycles},
            {"full_scale_x", c.drift.full_scale_x}}},
          {"neighbor_coupling", c.neighbor_coupling}};
}

SimulationConfig physics_from_json(const json& doc) {
  expect_schema(doc, kPhysicsSchema);
  return parsing("physics", [&] {
    SimulationConfig c;
    read_opt(doc, "sensor_id", c.sensor_id);
    read_opt(doc, "a_kpa", c.spec.a_kpa);
    read_opt(doc, "b", c.spec.b);
    read_opt(doc, "d_kpa", c.spec.d_kpa);
    read_opt(doc, "c0", c.spec.c0);
    read_opt(doc, "spread", c.spec.spread);
    read_opt(doc, "c0_spread", c.spec.c0_spread);
    read_opt(doc, "zero_consistent", c.spec.zero_consistent);
    read_opt(doc, "seed", c.spec.seed);
    read_opt(doc, "noise_sigma", c.noise_sigma);
    read_opt(doc, "samples_per_frame", c.samples_per_frame);
    read_opt(doc, "noise_seed", c.noise_seed);
    read_opt(doc, "neighbor_coupling", c.neighbor_coupling);
    if (doc.contains("hysteresis")) {
      const json& h = doc.at("hysteresis");
      const std::string kind = h.value("kind", "none");
      if (kind != "none" && kind != "play") {
        throw Error(Errc::ParseError, "unknown hysteresis kind " + kind);
      }
      c.hysteresis.kind = kind == "play" ? HysteresisModel::Kind::play : HysteresisModel::Kind::none;
      read_opt(h, "width", c.hysteresis.width);
      read_opt(h, "full_scale_x", c.hysteresis.full_scale_x);
    }
    if (doc.contains("drift")) {
      const json& d = doc.at("drift");
      read_opt(d, "peak_total", c.drift.peak_drift_total);
      read_opt(d, "zero_total", c.drift.zero_drift_total);
      read_opt(d, "cycles", c.drift.cycles);
      read_opt(d, "full_scale_x", c.drift.full_scale_x);
    }
    return c;
  });
}

json rig_to_json(const RigProgram& p) {
  json doc = {{"schema", kRigSchema},
              {"kind", p.kind == RigProgram::Kind::vertical_stage ? "vertical_stage"
                                                                  : "pneumatic_chamber"},
              {"preroll_ms", p.preroll_ms},
              {"postroll_ms", p.postroll_ms},
              {"frame_rate_hz", p.frame_rate_hz},
              {"gauge_rate_hz", p.gauge_rate_hz}};
  if (p.kind == RigProgram::Kind::vertical_stage) {
    doc["stage"] = {{"target_taxel", p.stage.target_taxel},
                    {"step_mm", p.stage.step_mm},
                    {"newton_per_step", p.stage.newton_per_step},
                    {"max_force_n", p.stage.max_force_n},
                    {"cycles", p.stage.cycles},
                    {"step_period_ms", p.stage.step_period_ms}};
  } else {
    doc["chamber"] = {{"max_kpa", p.chamber.max_kpa},
                      {"cycle_s", p.chamber.cycle_s},
                      {"cycles", p.chamber.cycles}};
  }
  return doc;
}

RigProgram rig_from_json(const json& doc) {
  expect_schema(doc, kRigSchema);
  RigProgram p = parsing("rig", [&] {
    RigProgram p;
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "vertical_stage") {
      p.kind = RigProgram::Kind::vertical_stage;
    } else if (kind == "pneumatic_chamber") {
      p.kind = RigProgram::Kind::pneumatic_chamber;
    } else {
      throw Error(Errc::ParseError, "unknown rig kind " + kind);
    }
    read_opt(doc, "preroll_ms", p.preroll_ms);
    read_opt(doc, "postroll_ms", p.postroll_ms);
    read_opt(doc, "frame_rate_hz", p.frame_rate_hz);
    read_opt(doc, "gauge_rate_hz", p.gauge_rate_hz);
    if (doc.contains("stage")) {
      const json& s = doc.at("stage");
      read_opt(s, "target_taxel", p.stage.target_taxel);
      read_opt(s, "step_mm", p.stage.step_mm);
      read_opt(s, "newton_per_step", p.stage.newton_per_step);
      read_opt(s, "max_force_n", p.stage.max_force_n);
      read_opt(s, "cycles", p.stage.cycles);
      read_opt(s, "step_period_ms", p.stage.step_period_ms);
    }
    if (doc.contains("chamber")) {
      const json& c = doc.at("chamber");
      read_opt(c, "max_kpa", p.chamber.max_kpa);
      read_opt(c, "cycle_s", p.chamber.cycle_s);
      read_opt(c, "cycles", p.chamber.cycles);
    }
    return p;
  });
  p.validate();
  return p;
}

json curve_to_json(const CalibrationCurve& c) {
  return {{"taxel", c.taxel},       {"form", to_string(c.form)}, {"a", c.a},
          {"b", c.b},               {"d", c.d},                  {"c0", c.c0},
          {"r2", c.r2},             {"rmse", c.rmse},            {"x_min", c.x_min},
          {"x_max", c.x_max},       {"pairs", c.pair_count},     {"iterations", c.iterations}};
}

CalibrationCurve curve_from_json(const json& j) {
  return parsing("curve", [&] {
    CalibrationCurve c;
    const std::string form = j.at("form").get<std::string>();
    if (form == "force") {
      c.form = CurveForm::force;
    } else if (form == "pneumatic") {
      c.form = CurveForm::pneumatic;
    } else {
      throw Error(Errc::ParseError, "unknown curve form " + form);
    }
    c.taxel = j.at("taxel").get<std::size_t>();
    c.a = j.at("a").get<double>();
    c.b = j.at("b").get<double>();
    c.d = j.at("d").get<double>();
    c.c0 = j.at("c0").get<double>();
    read_opt(j, "r2", c.r2);
    read_opt(j, "rmse", c.rmse);
    read_opt(j, "x_min", c.x_min);
    read_opt(j, "x_max", c.x_max);
    read_opt(j, "pairs", c.pair_count);
    read_opt(j, "iterations", c.iterations);
    return c;
  });
}

json curves_to_json(const CurveSet& set) {
  json curves = json::array();
  for (const CalibrationCurve& c : set.curves) curves.push_back(curve_to_json(c));
  return {{"schema", kCurvesSchema}, {"sensor_id", set.sensor_id}, {"curves", curves}};
}

CurveSet curves_from_json(const json& doc) {
  expect_schema(doc, kCurvesSchema);
  return parsing("curves", [&] {
    CurveSet set;
    set.sensor_id = doc.at("sensor_id").get<int>();
    for (const json& c : doc.at("curves")) set.curves.push_back(curve_from_json(c));
    return set;
  });
}

json transfer_to_json(const TransferMap& map) {
  json entries = json::array();
  for (std::size_t t : map.taxels()) {
    const TransferMap::Entry* e = map.entry(t);
    entries.push_back(
        {{"taxel", t}, {"source", curve_to_json(e->source)}, {"target", curve_to_json(e->target)}});
  }
  return {{"schema", kTransferSchema},
          {"source_sensor", map.source_sensor},
          {"target_sensor", map.target_sensor},
          {"entries", entries}};
}

TransferMap transfer_from_json(const json& doc) {
  expect_schema(doc, kTransferSchema);
  return parsing("transfer", [&] {
    TransferMap map;
    map.source_sensor = doc.at("source_sensor").get<int>();
    map.target_sensor = doc.at("target_sensor").get<int>();
    for (const json& e : doc.at("entries")) {
      map.set(e.at("taxel").get<std::size_t>(),
              {curve_from_json(e.at("source")), curve_from_json(e.at("target"))});
    }
    return map;
  });
}

json report_to_json(const CharacterizationReport& r) {
  json hyst = json::array();
  for (const TaxelHysteresis& h : r.hysteresis) {
    hyst.push_back({{"taxel", h.taxel}, {"percent", h.percent}, {"cycles", h.cycles}});
  }
  json doc = {{"schema", kReportSchema}, {"hysteresis_pct", hyst}};
  doc["peak_drift_pct"] = r.drift ? json(r.drift->peak_pct) : json(nullptr);
  doc["zero_drift_pct"] = r.drift ? json(r.drift->zero_pct) : json(nullptr);
  doc["crosstalk_pct"] = r.crosstalk_pct ? json{{"mean", r.crosstalk_pct->mean},
                                                {"sd", r.crosstalk_pct->sd},
                                                {"max", r.crosstalk_pct->max},
                                                {"n", r.crosstalk_pct->n}}
                                         : json(nullptr);
  doc["uniformity_cv"] = r.uniformity_cv ? json(*r.uniformity_cv) : json(nullptr);
  doc["rmse_force_n"] = r.rmse_force_n ? json(*r.rmse_force_n) : json(nullptr);
  return doc;
}

json frame_to_json(const SensorFrame& frame, const std::vector<double>* values) {
  json j = {{"ts", frame.timestamp_ms},
            {"sensor", frame.sensor_id},
            {"seq", frame.seq},
            {"counts", frame.counts}};
  if (values) j["values"] = *values;
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

}  // namespace dexskin::docs
