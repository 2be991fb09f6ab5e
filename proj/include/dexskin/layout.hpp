#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace dexskin {

enum class Region { dome, cylinder };

const char* to_string(Region region);

/// Contiguous block of taxel ids belonging to one region of one finger.
struct RegionSpan {
  Region kind;
  int finger;
  std::size_t first;
  std::size_t count;
};

struct GridCell {
  int row;
  int col;
  bool operator==(const GridCell&) const = default;
};

/// Geometry of a sensorized gripper: `fingers` identical fingertips, each with a
/// row of dome taxels (one under each column) over a `grid_columns` x
/// `cylinder_rows` cylinder grid. Ids are finger-major: finger f owns
/// [f * per_finger, (f + 1) * per_finger), dome taxels first, then the cylinder
/// grid in row-major order.
///
/// Grid projection puts the fingers side by side: grid row 0 holds the dome
/// taxels, rows 1..cylinder_rows hold the cylinder rows.
class TaxelLayout {
 public:
  struct Params {
    int fingers = 2;
    int dome_count = 12;
    int grid_columns = 12;
    int cylinder_rows = 4;
    double taxel_area_mm2 = 15.84;
    double angular_coverage_deg = 294.0;
    std::string id = "dexskin-standard";
  };

  /// Throws Error(InvalidLayout) when the parameters cannot form a layout.
  static TaxelLayout make(const Params& params);
  static TaxelLayout standard() { return make(Params{}); }

  const Params& params() const { return params_; }
  const std::string& id() const { return params_.id; }

  std::size_t taxel_count() const { return areas_.size(); }
  std::size_t taxels_per_finger() const;
  int fingers() const { return params_.fingers; }
  int grid_rows() const { return 1 + params_.cylinder_rows; }
  int grid_cols() const { return params_.grid_columns * params_.fingers; }

  const std::vector<RegionSpan>& regions() const { return regions_; }
  Region region_of(std::size_t taxel) const;
  int finger_of(std::size_t taxel) const;
  GridCell cell_of(std::size_t taxel) const;
  std::optional<std::size_t> taxel_at(GridCell cell) const;

  double area_mm2(std::size_t taxel) const;
  void set_area_mm2(std::size_t taxel, double area_mm2);
  const std::vector<double>& areas_mm2() const { return areas_; }

  /// 4-connected grid neighbours that are populated taxels of the same finger.
  std::vector<std::size_t> neighbors(std::size_t taxel) const;

 private:
  explicit TaxelLayout(const Params& params);

  Params params_;
  std::vector<RegionSpan> regions_;
  std::vector<GridCell> cells_;
  std::vector<long> cell_to_taxel_;  // -1 where unpopulated
  std::vector<double> areas_;
};

}  // namespace dexskin
