#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "dexskin/documents.hpp"
#include "dexskin/error.hpp"

using namespace dexskin;
using docs::json;

namespace {

CalibrationCurve curve(std::size_t taxel, CurveForm form, double a, double b) {
  CalibrationCurve c;
  c.taxel = taxel;
  c.form = form;
  c.a = a;
  c.b = b;
  c.d = form == CurveForm::pneumatic ? -a : 0.0;
  c.c0 = 20000.0 + static_cast<double>(taxel);
  c.r2 = 0.9999123;
  c.rmse = 0.0123;
  c.x_min = 0.0;
  c.x_max = 0.2027933962409402;
  c.pair_count = 181;
  c.iterations = 9;
  return c;
}

void check_same(const CalibrationCurve& a, const CalibrationCurve& b) {
  CHECK(a.taxel == b.taxel);
  CHECK(a.form == b.form);
  CHECK(a.a == b.a);
  CHECK(a.b == b.b);
  CHECK(a.d == b.d);
  CHECK(a.c0 == b.c0);
  CHECK(a.r2 == b.r2);
  CHECK(a.rmse == b.rmse);
  CHECK(a.x_max == b.x_max);
  CHECK(a.pair_count == b.pair_count);
  CHECK(a.iterations == b.iterations);
}

}  // namespace

TEST_CASE("layout document carries the derived grid table") {
  const TaxelLayout layout = TaxelLayout::standard();
  const json doc = docs::layout_to_json(layout);
  CHECK(doc["schema"] == docs::kLayoutSchema);
  CHECK(doc["taxel_count"] == 120);
  CHECK(doc["grid_rows"] == 5);
  CHECK(doc["grid_cols"] == 24);
  REQUIRE(doc["taxels"].size() == 120);
  const json& t = doc["taxels"][12];
  CHECK(t["region"] == "cylinder");
  CHECK(t["row"] == 1);
  CHECK(t["col"] == 0);
  auto neighbors = t["neighbors"].get<std::vector<std::size_t>>();
  std::sort(neighbors.begin(), neighbors.end());
  CHECK(neighbors == std::vector<std::size_t>{0, 13, 24});
  CHECK(doc["taxels"][60]["finger"] == 1);

  // Serialized and parsed text form, with one customized area.
  TaxelLayout custom = layout;
  custom.set_area_mm2(5, 16.5);
  const TaxelLayout back = docs::layout_from_json(json::parse(docs::layout_to_json(custom).dump()));
  CHECK(back.taxel_count() == 120);
  CHECK(back.id() == layout.id());
  CHECK(back.area_mm2(5) == 16.5);
  CHECK(back.area_mm2(6) == 15.84);
  for (std::size_t i = 0; i < 120; ++i) CHECK(back.cell_of(i) == layout.cell_of(i));
}

TEST_CASE("physics config round trip") {
  docs::SimulationConfig c;
  c.sensor_id = 3;
  c.spec.spread = 0.1;
  c.spec.seed = 99;
  c.noise_sigma = 12.5;
  c.noise_seed = 42;
  c.hysteresis = {HysteresisModel::Kind::play, 0.065, 1.3};
  c.drift = {0.0209, 0.0172, 500, 1.3};
  c.neighbor_coupling = 0.015;
  const auto back = docs::physics_from_json(json::parse(docs::physics_to_json(c).dump()));
  CHECK(back.sensor_id == 3);
  CHECK(back.spec.spread == 0.1);
  CHECK(back.spec.seed == 99);
  CHECK(back.noise_sigma == 12.5);
  CHECK(back.noise_seed == 42);
  CHECK(back.hysteresis.kind == HysteresisModel::Kind::play);
  CHECK(back.hysteresis.width == 0.065);
  CHECK(back.drift.peak_drift_total == 0.0209);
  CHECK(back.drift.cycles == 500);
  CHECK(back.neighbor_coupling == 0.015);

  const SensorPhysics phys = docs::build_physics(back, TaxelLayout::standard());
  CHECK(phys.sensor_id == 3);
  CHECK(phys.taxels.size() == 120);
  CHECK(phys.coupling.at(12, 13) == 0.015);

  // Absent keys keep defaults.
  const auto minimal = docs::physics_from_json({{"schema", docs::kPhysicsSchema}});
  CHECK(minimal.spec.b == 2.5);
  CHECK(minimal.hysteresis.kind == HysteresisModel::Kind::none);

  json bad = docs::physics_to_json(c);
  bad["hysteresis"]["kind"] = "preisach";
  CHECK_THROWS_WITH_AS(docs::physics_from_json(bad), doctest::Contains("ParseError"), Error);
}

TEST_CASE("rig program round trip") {
  RigProgram stage;
  stage.stage.target_taxel = 40;
  stage.stage.cycles = 4;
  const RigProgram s = docs::rig_from_json(docs::rig_to_json(stage));
  CHECK(s.kind == RigProgram::Kind::vertical_stage);
  CHECK(s.stage.target_taxel == 40);
  CHECK(s.stage.cycles == 4);
  CHECK(s.duration_ms() == stage.duration_ms());

  RigProgram chamber;
  chamber.kind = RigProgram::Kind::pneumatic_chamber;
  chamber.chamber.max_kpa = 18.7;
  const RigProgram c = docs::rig_from_json(docs::rig_to_json(chamber));
  CHECK(c.kind == RigProgram::Kind::pneumatic_chamber);
  CHECK(c.chamber.max_kpa == 18.7);

  json bad = docs::rig_to_json(stage);
  bad["stage"]["cycles"] = 0;
  CHECK_THROWS_AS(docs::rig_from_json(bad), Error);
  bad = docs::rig_to_json(stage);
  bad["kind"] = "press";
  CHECK_THROWS_WITH_AS(docs::rig_from_json(bad), doctest::Contains("ParseError"), Error);
  bad.erase("kind");
  CHECK_THROWS_WITH_AS(docs::rig_from_json(bad), doctest::Contains("ParseError"), Error);
}

TEST_CASE("curve sets round trip exactly") {
  docs::CurveSet set;
  set.sensor_id = 1;
  set.curves = {curve(0, CurveForm::force, 0.5 * std::exp(0.4), 4.0),
                curve(17, CurveForm::pneumatic, 28.321515652678343, 2.5)};
  const auto back = docs::curves_from_json(json::parse(docs::curves_to_json(set).dump()));
  CHECK(back.sensor_id == 1);
  REQUIRE(back.curves.size() == 2);
  check_same(back.curves[0], set.curves[0]);
  check_same(back.curves[1], set.curves[1]);

  json bad = docs::curves_to_json(set);
  bad["curves"][0]["form"] = "cubic";
  CHECK_THROWS_WITH_AS(docs::curves_from_json(bad), doctest::Contains("ParseError"), Error);
  bad = docs::curves_to_json(set);
  bad["curves"][1].erase("b");
  CHECK_THROWS_WITH_AS(docs::curves_from_json(bad), doctest::Contains("ParseError"), Error);
  bad["curves"] = "none";
  CHECK_THROWS_WITH_AS(docs::curves_from_json(bad), doctest::Contains("ParseError"), Error);
}

TEST_CASE("transfer map round trip") {
  TransferMap map;
  map.source_sensor = 2;
  map.target_sensor = 5;
  map.set(0, {curve(0, CurveForm::pneumatic, 27.0, 2.4), curve(0, CurveForm::pneumatic, 29.0, 2.6)});
  map.set(9, {curve(9, CurveForm::pneumatic, 26.0, 2.3), curve(9, CurveForm::pneumatic, 30.0, 2.7)});
  const TransferMap back = docs::transfer_from_json(json::parse(docs::transfer_to_json(map).dump()));
  CHECK(back.source_sensor == 2);
  CHECK(back.target_sensor == 5);
  CHECK(back.taxels() == std::vector<std::size_t>{0, 9});
  CHECK(remap(back, 9, 20500.0) == remap(map, 9, 20500.0));
}

TEST_CASE("every reader rejects a foreign schema") {
  const json wrong = {{"schema", "dexskin.other/1"}};
  CHECK_THROWS_WITH_AS(docs::layout_from_json(wrong), doctest::Contains("ParseError"), Error);
  CHECK_THROWS_WITH_AS(docs::physics_from_json(wrong), doctest::Contains("ParseError"), Error);
  CHECK_THROWS_WITH_AS(docs::rig_from_json(wrong), doctest::Contains("ParseError"), Error);
  CHECK_THROWS_WITH_AS(docs::curves_from_json(wrong), doctest::Contains("ParseError"), Error);
  CHECK_THROWS_WITH_AS(docs::transfer_from_json(wrong), doctest::Contains("ParseError"), Error);
  CHECK_THROWS_AS(docs::layout_from_json(json::array()), Error);
}

TEST_CASE("report document uses null for absent metrics") {
  CharacterizationReport r;
  r.hysteresis.push_back({40, 6.4, 3});
  r.crosstalk_pct = Stats{1.5, 0.1, 1.9, 1435};
  const json doc = docs::report_to_json(r);
  CHECK(doc["schema"] == docs::kReportSchema);
  CHECK(doc["hysteresis_pct"][0]["taxel"] == 40);
  CHECK(doc["hysteresis_pct"][0]["percent"] == 6.4);
  CHECK(doc["peak_drift_pct"].is_null());
  CHECK(doc["uniformity_cv"].is_null());
  CHECK(doc["rmse_force_n"].is_null());
  CHECK(doc["crosstalk_pct"]["n"] == 1435);
}

TEST_CASE("frame lines") {
  SensorFrame f{1234, 1, 37, {20000, 20010}};
  const json j = docs::frame_to_json(f);
  CHECK(j.dump() == R"({"counts":[20000,20010],"sensor":1,"seq":37,"ts":1234})");
  const std::vector<double> v{19990.5, 20001.25};
  CHECK(docs::frame_to_json(f, &v)["values"][1] == 20001.25);
}

TEST_CASE("json files") {
  const auto path = std::filesystem::temp_directory_path() / "dexskin_doc_test.json";
  docs::write_json_file(path, docs::layout_to_json(TaxelLayout::standard()));
  CHECK(docs::layout_from_json(docs::read_json_file(path)).taxel_count() == 120);
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_WITH_AS(docs::read_json_file(path), doctest::Contains("ParseError"), Error);
  std::filesystem::remove(path);
  CHECK_THROWS_WITH_AS(docs::read_json_file(path), doctest::Contains("Io"), Error);
}
