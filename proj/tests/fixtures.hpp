#pragma once

// Constructed scenes shared by unit and acceptance tests.

#include "radsearch/planner.hpp"
#include "radsearch/segmentation.hpp"
#include "radsearch/ugvsim.hpp"

namespace fixture {

using radsearch::Category;
using radsearch::Cell;
using radsearch::LabelRaster;

/// Square road ring `ring` px wide inside a `size` px grass field; the inner
/// field is dotted with single vegetation cells every `tree_step` px.
/// Start and goal sit mid-ring on the west and east sides.
struct RoadRing {
  LabelRaster labels;
  Cell start;
  Cell goal;
};

inline RoadRing road_ring(int size = 80, int margin = 3, int ring = 9, int tree_step = 4) {
  RoadRing f{radsearch::make_label_raster(size, size, Category::grass), {}, {}};
  const int lo = margin, hi = size - margin;
  for (int r = lo; r < hi; ++r)
    for (int c = lo; c < hi; ++c)
      if (r < lo + ring || r >= hi - ring || c < lo + ring || c >= hi - ring) f.labels(c, r) = Category::road;
  for (int r = lo + ring + 2; r < hi - ring - 2; r += tree_step)
    for (int c = lo + ring + 2; c < hi - ring - 2; c += tree_step) f.labels(c, r) = Category::vegetation;
  f.start = {lo + ring / 2, size / 2};
  f.goal = {hi - 1 - ring / 2, size / 2};
  return f;
}

/// Flat field for mission runs: start near the west edge, goal near the east edge
/// on the middle row. `corridor` > 0 walls everything but a road band of that
/// many rows with buildings.
struct Field {
  radsearch::ugvsim::TrueScene scene;
  radsearch::planner::PlanGrid grid;
  radsearch::WorldPoint start;
  radsearch::WorldPoint goal;
};

inline Field field(int w = 120, int h = 50, double ps = 0.6, int corridor = 0) {
  const radsearch::GeoTransform gt{ps / 2, ps / 2, ps};
  Field f;
  f.scene.dem = radsearch::ElevationRaster(w, h, 100.0, gt, -9999.0);
  f.scene.labels = radsearch::make_label_raster(w, h, corridor > 0 ? Category::building : Category::grass, gt);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const bool band = corridor > 0 ? std::abs(r - h / 2) <= corridor / 2 : std::abs(r - h / 2) <= 4;
      if (band) f.scene.labels(c, r) = Category::road;
    }
  f.grid = radsearch::planner::PlanGrid(f.scene.labels);
  f.start = gt.cell_center({5, h / 2});
  f.goal = gt.cell_center({w - 6, h / 2});
  return f;
}

}  // namespace fixture
