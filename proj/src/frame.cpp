#include "dexskin/frame.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dexskin/error.hpp"

namespace dexskin {

std::size_t HeatmapGrid::populated_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

Baseline capture_baseline(std::span<const SensorFrame> frames) {
  if (frames.empty()) throw Error(Errc::EmptyBaseline, "baseline needs at least one frame");
  const std::size_t n = frames.front().counts.size();
  std::vector<double> sum(n, 0.0);
  for (const SensorFrame& f : frames) {
    if (f.counts.size() != n) {
      throw Error(Errc::LengthMismatch, "frame seq " + std::to_string(f.seq) + " has " +
                                            std::to_string(f.counts.size()) + " taxels, expected " +
                                            std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) sum[i] += f.counts[i];
  }
  Baseline out;
  out.sample_count = frames.size();
  out.c0.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.c0[i] = sum[i] / static_cast<double>(frames.size());
    if (out.c0[i] == 0.0) {
      throw Error(Errc::ZeroBaseline, "taxel " + std::to_string(i) + " has zero no-load mean");
    }
  }
  return out;
}

NormalizedFrame normalize(const SensorFrame& frame, const Baseline& baseline) {
  if (frame.counts.size() != baseline.c0.size()) {
    throw Error(Errc::LengthMismatch, "frame has " + std::to_string(frame.counts.size()) +
                                          " taxels, baseline " +
                                          std::to_string(baseline.c0.size()));
  }
  NormalizedFrame out;
  out.timestamp_ms = frame.timestamp_ms;
  out.values.resize(frame.counts.size());
  for (std::size_t i = 0; i < frame.counts.size(); ++i) {
    const double c0 = baseline.c0[i];
    out.values[i] = (static_cast<double>(frame.counts[i]) - c0) / c0;
  }
  return out;
}

HeatmapGrid grid_project(std::span<const double> values, const TaxelLayout& layout) {
  if (values.size() != layout.taxel_count()) {
    throw Error(Errc::LengthMismatch, "frame has " + std::to_string(values.size()) +
                                          " taxels, layout " +
                                          std::to_string(layout.taxel_count()));
  }
  HeatmapGrid g;
  g.rows = layout.grid_rows();
  g.cols = layout.grid_cols();
  g.cells.assign(static_cast<std::size_t>(g.rows) * g.cols, 0.0);
  g.mask.assign(g.cells.size(), 0);
  for (std::size_t id = 0; id < values.size(); ++id) {
    const GridCell c = layout.cell_of(id);
    const std::size_t k = static_cast<std::size_t>(c.row) * g.cols + c.col;
    g.cells[k] = values[id];
    g.mask[k] = 1;
  }
  return g;
}

std::vector<double> grid_unproject(const HeatmapGrid& grid, const TaxelLayout& layout) {
  if (grid.rows != layout.grid_rows() || grid.cols != layout.grid_cols()) {
    throw Error(Errc::ShapeMismatch, "grid shape does not match layout");
  }
  std::vector<double> out(layout.taxel_count());
  for (std::size_t id = 0; id < out.size(); ++id) {
    const GridCell c = layout.cell_of(id);
    out[id] = grid.at(c.row, c.col);
  }
  return out;
}

std::int64_t nominal_timestamp_ms(std::uint32_t seq, double rate_hz) {
  return static_cast<std::int64_t>(std::llround(static_cast<double>(seq) * 1000.0 / rate_hz));
}

std::vector<std::uint16_t> to_counts(std::span<const double> values) {
  std::vector<std::uint16_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double r = std::round(values[i]);
    if (!(r >= 0.0 && r <= 65535.0)) {
      throw Error(Errc::RangeExceeded,
                  "taxel " + std::to_string(i) + " count " + std::to_string(values[i]) +
                      " outside u16");
    }
    out[i] = static_cast<std::uint16_t>(r);
  }
  return out;
}

}  // namespace dexskin
