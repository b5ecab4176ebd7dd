#pragma once

// Segmentation-weighted A* over the label raster's pixel grid (8-connected).
//
// Moving from x_c to x_n costs w . [phi1(x_c), phi2(x_n), phi3(x_c)]:
//   phi1 = 1 / distance to nearest non-road cell   (x_c on road, else 0)
//   phi2 = 1 if x_n is not road                    (else 0)
//   phi3 = 1 / distance to nearest obstacle cell   (x_c on grass, else 0)

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radsearch/geo.hpp"
#include "radsearch/segmentation.hpp"

namespace radsearch::planner {

/// Exact Euclidean distance (in pixels) to the nearest set cell; +inf everywhere
/// when no cell is set.
ElevationRaster distance_transform(const Mask& mask);

class PlanGrid {
 public:
  PlanGrid() = default;
  /// `dem` may be empty; it is carried along for optional slope costs.
  PlanGrid(LabelRaster labels, ElevationRaster dem = {});

  int width() const noexcept { return labels_.width(); }
  int height() const noexcept { return labels_.height(); }
  const LabelRaster& labels() const noexcept { return labels_; }
  const ElevationRaster& dem() const noexcept { return dem_; }
  const ElevationRaster& d_nonroad() const noexcept { return d_nonroad_; }
  const ElevationRaster& d_obstacle() const noexcept { return d_obstacle_; }
  const Mask& removed() const noexcept { return removed_; }
  const GeoTransform& transform() const noexcept { return labels_.transform(); }

  bool in_bounds(Cell c) const noexcept { return labels_.in_bounds(c); }
  /// Road or grass, inside the grid, and not removed.
  bool traversable(Cell c) const;
  Category label(Cell c) const { return labels_[c]; }
  std::size_t removed_count() const;

  /// Copy with `cells` (and their Chebyshev dilation) removed; `clipped` counts
  /// requested cells outside the grid.
  PlanGrid with_removed(std::span<const Cell> cells, int dilation_radius, std::size_t& clipped) const;

 private:
  void recompute_obstacle_field();

  LabelRaster labels_;
  ElevationRaster dem_;
  ElevationRaster d_nonroad_;
  ElevationRaster d_obstacle_;
  Mask removed_;
};

struct CostWeights {
  std::array<double, 3> w{5.0, 2.0, 5.0};
  double base_step = 0.0;    // extra cost per pixel of Euclidean step length
  double slope_weight = 0.0; // extra cost per unit |dz| / step length; needs a DEM

  void validate() const;
};

struct Features {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double phi3 = 0.0;
};

/// Throws ContractViolation unless both cells are traversable and 8-adjacent.
Features features(const PlanGrid& grid, Cell current, Cell next);
double step_cost(const PlanGrid& grid, const CostWeights& w, Cell current, Cell next);

enum class Heuristic { euclidean, zero };

struct Path {
  std::vector<Cell> cells;
  double cost = 0.0;
  std::size_t expansions = 0;
};

struct SearchOptions {
  Heuristic heuristic = Heuristic::euclidean;
  double heuristic_scale = 1.0;  // multiplies the pixel distance; 1 = pixels
};

/// Expansion order is (f, h, row-major index). Diagonal moves require both
/// orthogonal neighbours to be traversable.
Path astar(const PlanGrid& grid, const CostWeights& w, Cell start, Cell goal,
           const SearchOptions& opts = {});

/// True when the move from `a` to the 8-neighbour `b` is allowed.
bool move_allowed(const PlanGrid& grid, Cell a, Cell b);

struct RemovalReport {
  PlanGrid grid;
  std::size_t clipped = 0;  // requested cells outside the grid
};

/// Marks `cells` and their Chebyshev dilation as removed and recomputes the
/// obstacle distance field with removed cells counted as obstacles.
RemovalReport remove_obstacle_nodes(const PlanGrid& grid, std::span<const Cell> cells, int dilation_radius);

// Plan request / path files.
struct PlanRequest {
  std::filesystem::path labels_path;
  std::filesystem::path dem_path;
  std::array<double, 2> start{};  // world metres
  std::array<double, 2> goal{};
  CostWeights weights;
  SearchOptions search;
  int dilation_radius = 0;
};

PlanRequest parse_plan_request(std::string_view json_text);
std::string path_to_json(const Path& path, const GeoTransform& gt);

}  // namespace radsearch::planner
