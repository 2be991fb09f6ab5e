#include "dexskin/layout.hpp"

#include <string>

#include "dexskin/error.hpp"

namespace dexskin {

const char* to_string(Region region) {
  return region == Region::dome ? "dome" : "cylinder";
}

TaxelLayout TaxelLayout::make(const Params& p) {
  if (p.fingers < 1 || p.grid_columns < 1 || p.cylinder_rows < 1 || p.dome_count < 0) {
    throw Error(Errc::InvalidLayout, "fingers, grid_columns and cylinder_rows must be positive");
  }
  if (p.dome_count > p.grid_columns) {
    throw Error(Errc::InvalidLayout, "dome taxels sit one per column; dome_count " +
                                         std::to_string(p.dome_count) + " exceeds grid_columns " +
                                         std::to_string(p.grid_columns));
  }
  if (!(p.taxel_area_mm2 > 0.0)) {
    throw Error(Errc::InvalidLayout, "taxel area must be positive");
  }
  return TaxelLayout(p);
}

TaxelLayout::TaxelLayout(const Params& p) : params_(p) {
  const std::size_t dome = static_cast<std::size_t>(p.dome_count);
  const std::size_t cyl = static_cast<std::size_t>(p.grid_columns) * p.cylinder_rows;
  const std::size_t per_finger = dome + cyl;
  const int cols = grid_cols();
  cell_to_taxel_.assign(static_cast<std::size_t>(grid_rows()) * cols, -1);
  cells_.reserve(per_finger * p.fingers);

  for (int f = 0; f < p.fingers; ++f) {
    const std::size_t base = per_finger * f;
    const int col0 = f * p.grid_columns;
    if (dome > 0) regions_.push_back({Region::dome, f, base, dome});
    regions_.push_back({Region::cylinder, f, base + dome, cyl});
    for (std::size_t k = 0; k < dome; ++k) {
      cells_.push_back({0, col0 + static_cast<int>(k)});
    }
    for (int r = 0; r < p.cylinder_rows; ++r) {
      for (int c = 0; c < p.grid_columns; ++c) cells_.push_back({1 + r, col0 + c});
    }
  }
  for (std::size_t id = 0; id < cells_.size(); ++id) {
    cell_to_taxel_[static_cast<std::size_t>(cells_[id].row) * cols + cells_[id].col] =
        static_cast<long>(id);
  }
  areas_.assign(cells_.size(), p.taxel_area_mm2);
}

std::size_t TaxelLayout::taxels_per_finger() const {
  return taxel_count() / static_cast<std::size_t>(params_.fingers);
}

Region TaxelLayout::region_of(std::size_t taxel) const {
  if (taxel >= taxel_count()) throw Error(Errc::OutOfBounds, "taxel " + std::to_string(taxel));
  return taxel % taxels_per_finger() < static_cast<std::size_t>(params_.dome_count)
             ? Region::dome
             : Region::cylinder;
}

int TaxelLayout::finger_of(std::size_t taxel) const {
  if (taxel >= taxel_count()) throw Error(Errc::OutOfBounds, "taxel " + std::to_string(taxel));
  return static_cast<int>(taxel / taxels_per_finger());
}

GridCell TaxelLayout::cell_of(std::size_t taxel) const {
  if (taxel >= taxel_count()) throw Error(Errc::OutOfBounds, "taxel " + std::to_string(taxel));
  return cells_[taxel];
}

std::optional<std::size_t> TaxelLayout::taxel_at(GridCell cell) const {
  if (cell.row < 0 || cell.row >= grid_rows() || cell.col < 0 || cell.col >= grid_cols()) {
    return std::nullopt;
  }
  const long id = cell_to_taxel_[static_cast<std::size_t>(cell.row) * grid_cols() + cell.col];
  if (id < 0) return std::nullopt;
  return static_cast<std::size_t>(id);
}

double TaxelLayout::area_mm2(std::size_t taxel) const {
  if (taxel >= taxel_count()) throw Error(Errc::OutOfBounds, "taxel " + std::to_string(taxel));
  return areas_[taxel];
}

void TaxelLayout::set_area_mm2(std::size_t taxel, double area_mm2) {
  if (taxel >= taxel_count()) throw Error(Errc::OutOfBounds, "taxel " + std::to_string(taxel));
  if (!(area_mm2 > 0.0)) throw Error(Errc::InvalidLayout, "taxel area must be positive");
  areas_[taxel] = area_mm2;
}

std::vector<std::size_t> TaxelLayout::neighbors(std::size_t taxel) const {
  const GridCell c = cell_of(taxel);
  const int finger = finger_of(taxel);
  const int lo = finger * params_.grid_columns;
  const int hi = lo + params_.grid_columns;
  std::vector<std::size_t> out;
  const GridCell around[] = {{c.row - 1, c.col}, {c.row + 1, c.col}, {c.row, c.col - 1},
                             {c.row, c.col + 1}};
  for (const GridCell& n : around) {
    if (n.col < lo || n.col >= hi) continue;
    if (auto id = taxel_at(n)) out.push_back(*id);
  }
  return out;
}

}  // namespace dexskin
