#pragma once

// Synthetic test area: a road loop through grass with buildings (and their
// shadows), parked vehicles, tree clumps and gentle hills.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "radsearch/geo.hpp"
#include "radsearch/rng.hpp"
#include "radsearch/segmentation.hpp"

namespace radsearch::scene {

struct SceneParams {
  int width = 240;
  int height = 200;
  double pixel_size = 0.6;
  int buildings = 5;
  int vehicles = 4;
  int trees = 8;
  double hill_amplitude_m = 1.0;

  void validate() const;
};

/// Axis-aligned footprint in pixel coordinates, inclusive bounds.
struct Footprint {
  Category kind = Category::building;
  int min_col = 0;
  int min_row = 0;
  int max_col = 0;
  int max_row = 0;
  double height_m = 0.0;
};

struct Scene {
  ElevationRaster dem;
  LabelRaster labels;
  RgbRaster ortho;
  std::vector<Footprint> features;
  WorldPoint start;        // a road cell on the loop
  WorldPoint source_site;  // open grass inside the loop
};

Scene generate_scene(const SceneParams& params, Rng& rng);

std::string truth_json(const Scene& scene, const SceneParams& params, std::uint64_t seed);

/// Writes ortho.ppm (+ sidecar), dem.asc, labels.asc, legend.json and truth.json.
void write_scene(const Scene& scene, const SceneParams& params, std::uint64_t seed,
                 const std::filesystem::path& dir);

}  // namespace radsearch::scene
