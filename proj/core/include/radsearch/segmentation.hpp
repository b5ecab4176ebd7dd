#pragma once

// Semantic label rasters, synthetic classifier scores, DEM-based obstacle regions
// and the refinement that relabels traversable pixels inside them.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "radsearch/geo.hpp"
#include "radsearch/rng.hpp"

namespace radsearch {

enum class Category : std::uint8_t {
  road = 0,
  grass = 1,
  vehicle = 2,
  building = 3,
  vegetation = 4,
  shadow = 5,
  unknown = 255,
};

inline constexpr int kCategoryCount = 6;
inline constexpr std::array<Category, kCategoryCount> kCategories{
    Category::road,     Category::grass,      Category::vehicle,
    Category::building, Category::vegetation, Category::shadow};

constexpr int code(Category c) { return static_cast<int>(c); }
constexpr bool is_valid_category(int code) { return code >= 0 && code < kCategoryCount; }
/// Road and grass only; shadows count as obstacles.
constexpr bool is_traversable(Category c) { return c == Category::road || c == Category::grass; }
std::string_view category_name(Category c);

using LabelRaster = Raster<Category>;
using Scores = std::array<double, kCategoryCount>;
using UnaryRaster = Raster<Scores>;
using Mask = Raster<std::uint8_t>;

LabelRaster make_label_raster(int width, int height, Category fill, GeoTransform gt = {});

}  // namespace radsearch

namespace radsearch::segmentation {

/// Row = true category, column = how that category's noise mass is shared.
using ConfuserMap = std::array<std::array<double, kCategoryCount>, kCategoryCount>;

/// Uniform over the other five categories, except buildings which leak toward
/// grass, vehicle and shadow.
ConfuserMap default_confusers();
/// Every row uniform over all six categories (including the true one).
ConfuserMap uniform_confusers();

/// Per pixel: 1 - noise on the true class; the remaining mass is split over the
/// row's confusers with Exp(1)-jittered weights. Nodata pixels get uniform scores.
UnaryRaster synth_unaries(const LabelRaster& truth, double noise_level, const ConfuserMap& confusers,
                          Rng& rng);

/// Per-pixel argmax, ties to the lowest code.
LabelRaster argmax_labels(const UnaryRaster& unaries);

struct RegionInfo {
  int id = 0;
  std::size_t cell_count = 0;
  int min_col = 0;
  int min_row = 0;
  int max_col = 0;
  int max_row = 0;
};

struct ObstacleRegions {
  Raster<int> ids;  // 0 = no region, otherwise 1..regions.size()
  std::vector<RegionInfo> regions;
  double tau = 0.0;
};

struct RegionParams {
  std::optional<double> tau;  // empty = mean + 2 sigma of gradient magnitudes
  int close_iterations = 2;
};

/// Cells of `barrier` unreachable from the raster border through non-barrier cells
/// (4-connected), grouped into 4-connected components, each grown by the barrier
/// cells 8-adjacent to it (border cells excluded).
ObstacleRegions enclosed_regions(const Mask& barrier);

/// 3x3 closing, `iterations` dilations followed by as many erosions; outside the
/// raster counts as set during erosion.
Mask morphological_close(const Mask& m, int iterations);

/// Gradient threshold -> closing -> enclosed regions.
ObstacleRegions detect_obstacle_regions(const ElevationRaster& dem, const RegionParams& params = {});

/// Within each region, relabels road/grass pixels to the mode of the per-pixel
/// most likely non-traversable category. Pixels outside regions are untouched.
LabelRaster refine_with_dem(const LabelRaster& labels, const UnaryRaster& unaries,
                            const ObstacleRegions& regions);

struct Metrics {
  using Confusion = std::array<std::array<std::int64_t, kCategoryCount>, kCategoryCount>;
  Confusion confusion{};  // row = truth, column = prediction
  std::array<std::optional<double>, kCategoryCount> precision{};
  std::array<std::optional<double>, kCategoryCount> recall{};
  double global_accuracy = 0.0;
  double average_recall = 0.0;  // mean over categories present in truth
  std::int64_t total = 0;
};

/// Nodata in either raster excludes the pixel.
Metrics precision_recall(const LabelRaster& pred, const LabelRaster& truth);

// File formats.
Raster<int> to_codes(const LabelRaster& labels);
LabelRaster from_codes(const ElevationRaster& grid);
void write_labels(const LabelRaster& labels, const std::filesystem::path& path);
LabelRaster read_labels(const std::filesystem::path& path);
void write_legend_json(const std::filesystem::path& path);
/// Writes unary_c0.asc .. unary_c5.asc into `dir`.
void write_unaries(const UnaryRaster& u, const std::filesystem::path& dir);
UnaryRaster read_unaries(const std::filesystem::path& dir);
void write_metrics_json(const Metrics& m, const std::filesystem::path& path);
std::string metrics_to_json(const Metrics& m);

}  // namespace radsearch::segmentation
