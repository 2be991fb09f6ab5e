#include <doctest.h>

#include <set>

#include "dexskin/error.hpp"
#include "dexskin/frame.hpp"
#include "dexskin/layout.hpp"

using namespace dexskin;

namespace {

SensorFrame frame_of(std::vector<std::uint16_t> counts) {
  SensorFrame f;
  f.counts = std::move(counts);
  return f;
}

}  // namespace

TEST_CASE("default layout geometry") {
  const TaxelLayout layout = TaxelLayout::standard();
  CHECK(layout.taxel_count() == 120);
  CHECK(layout.taxels_per_finger() == 60);
  CHECK(layout.grid_rows() == 5);
  CHECK(layout.grid_cols() == 24);
  CHECK(layout.area_mm2(0) == doctest::Approx(15.84));

  std::size_t dome = 0;
  for (std::size_t i = 0; i < 120; ++i) dome += layout.region_of(i) == Region::dome;
  CHECK(dome == 24);

  // Finger-major ids: dome first, then the cylinder row-major.
  CHECK(layout.cell_of(0) == GridCell{0, 0});
  CHECK(layout.cell_of(11) == GridCell{0, 11});
  CHECK(layout.cell_of(12) == GridCell{1, 0});
  CHECK(layout.cell_of(59) == GridCell{4, 11});
  CHECK(layout.cell_of(60) == GridCell{0, 12});
  CHECK(layout.finger_of(60) == 1);
}

TEST_CASE("every taxel owns exactly one grid cell") {
  const TaxelLayout layout = TaxelLayout::standard();
  std::set<std::pair<int, int>> cells;
  for (std::size_t i = 0; i < layout.taxel_count(); ++i) {
    const GridCell c = layout.cell_of(i);
    CHECK(cells.insert({c.row, c.col}).second);
    REQUIRE(layout.taxel_at(c).has_value());
    CHECK(*layout.taxel_at(c) == i);
  }
  CHECK(cells.size() == 120);
}

TEST_CASE("custom layouts validate their parameters") {
  TaxelLayout::Params p;
  p.cylinder_rows = 0;
  CHECK_THROWS_AS(TaxelLayout::make(p), Error);
  p = {};
  p.taxel_area_mm2 = 0.0;
  CHECK_THROWS_AS(TaxelLayout::make(p), Error);
  p = {};
  p.fingers = 1;
  p.grid_columns = 8;
  p.dome_count = 8;
  p.cylinder_rows = 3;
  const TaxelLayout small = TaxelLayout::make(p);
  CHECK(small.taxel_count() == 32);
}

TEST_CASE("neighbours are 4-connected within a finger") {
  const TaxelLayout layout = TaxelLayout::standard();
  const auto n12 = layout.neighbors(12);   // cylinder (1, 0)
  CHECK(std::set<std::size_t>(n12.begin(), n12.end()) == std::set<std::size_t>{0, 13, 24});
  for (std::size_t t : layout.neighbors(11)) CHECK(layout.finger_of(t) == 0);
}

TEST_CASE("capture_baseline") {
  std::vector<SensorFrame> frames(30, frame_of(std::vector<std::uint16_t>(3, 1000)));
  Baseline b = capture_baseline(frames);
  CHECK(b.sample_count == 30);
  CHECK(b.c0[0] == 1000.0);

  std::vector<SensorFrame> two{frame_of({998}), frame_of({1002})};
  CHECK(capture_baseline(two).c0[0] == 1000.0);

  CHECK_THROWS_WITH_AS(capture_baseline(std::span<const SensorFrame>{}), doctest::Contains("EmptyBaseline"), Error);
  std::vector<SensorFrame> ragged{frame_of({1, 2}), frame_of({1})};
  CHECK_THROWS_WITH_AS(capture_baseline(ragged), doctest::Contains("LengthMismatch"), Error);
  std::vector<SensorFrame> zero{frame_of({0, 5})};
  CHECK_THROWS_WITH_AS(capture_baseline(zero), doctest::Contains("ZeroBaseline"), Error);
}

TEST_CASE("normalize") {
  Baseline b{{1000.0, 1000.0, 1000.0}, 1};
  const NormalizedFrame n = normalize(frame_of({1000, 1100, 900}), b);
  CHECK(n.values[0] == 0.0);
  CHECK(n.values[1] == 0.1);
  CHECK(n.values[2] == -0.1);
  CHECK_THROWS_AS(normalize(frame_of({1000}), b), Error);
}

TEST_CASE("normalizing a constant baseline window gives zeros") {
  std::vector<SensorFrame> frames(5, frame_of({1234, 20000, 7}));
  const Baseline b = capture_baseline(frames);
  for (double v : normalize(frames[2], b).values) CHECK(v == 0.0);
}

TEST_CASE("grid projection is a bijection") {
  const TaxelLayout layout = TaxelLayout::standard();
  std::vector<double> zeros(120, 0.0);
  const HeatmapGrid g0 = grid_project(zeros, layout);
  CHECK(g0.rows == 5);
  CHECK(g0.cols == 24);
  CHECK(g0.populated_count() == 120);

  for (std::size_t k : {0u, 11u, 12u, 59u, 60u, 119u}) {
    std::vector<double> v(120, 0.0);
    v[k] = 1.0;
    const HeatmapGrid g = grid_project(v, layout);
    int nonzero = 0;
    for (double c : g.cells) nonzero += c != 0.0;
    CHECK(nonzero == 1);
    const GridCell cell = layout.cell_of(k);
    CHECK(g.at(cell.row, cell.col) == 1.0);
  }

  std::vector<double> v(120);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.001 * static_cast<double>(i) - 0.05;
  CHECK(grid_unproject(grid_project(v, layout), layout) == v);

  // Dome row: 12 populated cells per finger.
  int dome_cells = 0;
  for (int c = 0; c < g0.cols; ++c) dome_cells += g0.populated(0, c);
  CHECK(dome_cells == 24);
}

TEST_CASE("nominal timestamps and count conversion") {
  CHECK(nominal_timestamp_ms(0) == 0);
  CHECK(nominal_timestamp_ms(1) == 33);
  CHECK(nominal_timestamp_ms(2) == 67);
  CHECK(nominal_timestamp_ms(30) == 1000);
  std::vector<double> ok{0.0, 65535.0, 1.4999};
  CHECK(to_counts(ok) == std::vector<std::uint16_t>{0, 65535, 1});
  std::vector<double> high{65536.0};
  CHECK_THROWS_WITH_AS(to_counts(high), doctest::Contains("RangeExceeded"), Error);
  std::vector<double> low{-1.0};
  CHECK_THROWS_AS(to_counts(low), Error);
}
