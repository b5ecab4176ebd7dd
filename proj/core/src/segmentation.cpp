#include "radsearch/segmentation.hpp"

#include <cmath>
#include <deque>
#include <fstream>

#include <nlohmann/json.hpp>

#include "radsearch/raster_io.hpp"

namespace radsearch {

std::string_view category_name(Category c) {
  switch (c) {
    case Category::road: return "road";
    case Category::grass: return "grass";
    case Category::vehicle: return "vehicle";
    case Category::building: return "building";
    case Category::vegetation: return "vegetation";
    case Category::shadow: return "shadow";
    case Category::unknown: break;
  }
  return "unknown";
}

LabelRaster make_label_raster(int width, int height, Category fill, GeoTransform gt) {
  return LabelRaster(width, height, fill, gt, Category::unknown);
}

}  // namespace radsearch

namespace radsearch::segmentation {
namespace {

constexpr std::array<Category, 4> kObstacleCategories{Category::vehicle, Category::building,
                                                      Category::vegetation, Category::shadow};

void require_same_grid(const auto& a, const auto& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height())
    throw DimensionError(std::string(what) + ": raster dimensions differ");
}

}  // namespace

ConfuserMap default_confusers() {
  ConfuserMap m{};
  for (int t = 0; t < kCategoryCount; ++t)
    for (int j = 0; j < kCategoryCount; ++j) m[t][j] = t == j ? 0.0 : 1.0;
  m[code(Category::building)] = {0.0, 0.5, 0.25, 0.0, 0.0, 0.25};
  return m;
}

ConfuserMap uniform_confusers() {
  ConfuserMap m{};
  for (auto& row : m) row.fill(1.0);
  return m;
}

UnaryRaster synth_unaries(const LabelRaster& truth, double noise_level, const ConfuserMap& confusers,
                          Rng& rng) {
  if (!(noise_level >= 0.0 && noise_level <= 1.0)) throw ParameterError("noise_level must be within [0,1]");
  Scores uniform;
  uniform.fill(1.0 / kCategoryCount);
  UnaryRaster out(truth.width(), truth.height(), uniform, truth.transform());
  std::exponential_distribution<double> jitter(1.0);
  auto src = truth.cells();
  auto dst = out.cells();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const int t = code(src[i]);
    if (!is_valid_category(t)) continue;
    Scores s{};
    s[t] = 1.0 - noise_level;
    if (noise_level > 0.0) {
      Scores w{};
      double total = 0.0;
      for (int j = 0; j < kCategoryCount; ++j) {
        const double e = jitter(rng);
        w[j] = confusers[t][j] * e;
        total += w[j];
      }
      if (total > 0.0) {
        for (int j = 0; j < kCategoryCount; ++j) s[j] += noise_level * w[j] / total;
      } else {
        s[t] = 1.0;
      }
    }
    dst[i] = s;
  }
  return out;
}

LabelRaster argmax_labels(const UnaryRaster& u) {
  LabelRaster out = make_label_raster(u.width(), u.height(), Category::road, u.transform());
  auto src = u.cells();
  auto dst = out.cells();
  for (std::size_t i = 0; i < src.size(); ++i) {
    int best = 0;
    for (int j = 1; j < kCategoryCount; ++j)
      if (src[i][j] > src[i][best]) best = j;
    dst[i] = static_cast<Category>(best);
  }
  return out;
}

Mask morphological_close(const Mask& m, int iterations) {
  if (iterations < 0) throw ParameterError("closing iterations must be >= 0");
  auto pass = [](const Mask& in, bool dilate) {
    Mask out = in;
    for (int row = 0; row < in.height(); ++row)
      for (int col = 0; col < in.width(); ++col) {
        bool v = !dilate;
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const int c = col + dc, r = row + dr;
            const bool set = in.in_bounds(c, r) ? in(c, r) != 0 : !dilate;
            if (dilate && set) v = true;
            if (!dilate && !set) v = false;
          }
        out(col, row) = v ? 1 : 0;
      }
    return out;
  };
  Mask cur = m;
  for (int i = 0; i < iterations; ++i) cur = pass(cur, true);
  for (int i = 0; i < iterations; ++i) cur = pass(cur, false);
  return cur;
}

ObstacleRegions enclosed_regions(const Mask& barrier) {
  const int w = barrier.width(), h = barrier.height();
  ObstacleRegions out;
  out.ids = Raster<int>(w, h, 0, barrier.transform(), std::nullopt);

  // 0 = unvisited, 1 = reachable from the border.
  Raster<std::uint8_t> outside(w, h, 0, barrier.transform());
  std::deque<Cell> queue;
  auto seed = [&](int c, int r) {
    if (!barrier(c, r) && !outside(c, r)) {
      outside(c, r) = 1;
      queue.push_back({c, r});
    }
  };
  for (int c = 0; c < w; ++c) {
    seed(c, 0);
    seed(c, h - 1);
  }
  for (int r = 0; r < h; ++r) {
    seed(0, r);
    seed(w - 1, r);
  }
  constexpr std::array<Cell, 4> k4{Cell{1, 0}, Cell{-1, 0}, Cell{0, 1}, Cell{0, -1}};
  while (!queue.empty()) {
    const Cell cur = queue.front();
    queue.pop_front();
    for (const Cell d : k4) {
      const int c = cur.col + d.col, r = cur.row + d.row;
      if (barrier.in_bounds(c, r)) seed(c, r);
    }
  }

  // Enclosed components.
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      if (barrier(col, row) || outside(col, row) || out.ids(col, row)) continue;
      RegionInfo info;
      info.id = static_cast<int>(out.regions.size()) + 1;
      info.min_col = info.max_col = col;
      info.min_row = info.max_row = row;
      out.ids(col, row) = info.id;
      queue.push_back({col, row});
      while (!queue.empty()) {
        const Cell cur = queue.front();
        queue.pop_front();
        ++info.cell_count;
        info.min_col = std::min(info.min_col, cur.col);
        info.max_col = std::max(info.max_col, cur.col);
        info.min_row = std::min(info.min_row, cur.row);
        info.max_row = std::max(info.max_row, cur.row);
        for (const Cell d : k4) {
          const int c = cur.col + d.col, r = cur.row + d.row;
          if (barrier.in_bounds(c, r) && !barrier(c, r) && !out.ids(c, r)) {
            out.ids(c, r) = info.id;
            queue.push_back({c, r});
          }
        }
      }
      out.regions.push_back(info);
    }
  }

  // Grow each region by its enclosing barrier band; lowest id wins shared cells.
  const Raster<int> core = out.ids;
  for (int row = 1; row < h - 1; ++row) {
    for (int col = 1; col < w - 1; ++col) {
      if (!barrier(col, row)) continue;
      int best = 0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const int id = core(col + dc, row + dr);
          if (id && (best == 0 || id < best)) best = id;
        }
      if (!best) continue;
      out.ids(col, row) = best;
      RegionInfo& info = out.regions[static_cast<std::size_t>(best - 1)];
      ++info.cell_count;
      info.min_col = std::min(info.min_col, col);
      info.max_col = std::max(info.max_col, col);
      info.min_row = std::min(info.min_row, row);
      info.max_row = std::max(info.max_row, row);
    }
  }
  return out;
}

ObstacleRegions detect_obstacle_regions(const ElevationRaster& dem, const RegionParams& params) {
  if (dem.width() < 3 || dem.height() < 3)
    throw DimensionError("detect_obstacle_regions needs a DEM of at least 3x3");
  const ElevationRaster grad = gradient_magnitude(dem);

  double tau = 0.0;
  if (params.tau) {
    tau = *params.tau;
  } else {
    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    for (double g : grad.cells()) {
      if (grad.is_nodata(g)) continue;
      sum += g;
      ++n;
    }
    const double mean = n ? sum / static_cast<double>(n) : 0.0;
    for (double g : grad.cells())
      if (!grad.is_nodata(g)) sum2 += (g - mean) * (g - mean);
    const double sd = n ? std::sqrt(sum2 / static_cast<double>(n)) : 0.0;
    tau = mean + 2.0 * sd;
  }

  Mask mask(dem.width(), dem.height(), 0, dem.transform());
  auto g = grad.cells();
  auto m = mask.cells();
  for (std::size_t i = 0; i < g.size(); ++i) m[i] = (!grad.is_nodata(g[i]) && g[i] > tau) ? 1 : 0;

  ObstacleRegions regions = enclosed_regions(morphological_close(mask, params.close_iterations));
  regions.tau = tau;
  return regions;
}

LabelRaster refine_with_dem(const LabelRaster& labels, const UnaryRaster& unaries,
                            const ObstacleRegions& regions) {
  require_same_grid(labels, unaries, "refine_with_dem");
  require_same_grid(labels, regions.ids, "refine_with_dem");
  if (regions.regions.empty()) return labels;

  // Votes per region for the most likely non-traversable category.
  std::vector<std::array<std::size_t, kCategoryCount>> votes(regions.regions.size());
  auto ids = regions.ids.cells();
  auto u = unaries.cells();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!ids[i]) continue;
    Category best = kObstacleCategories[0];
    for (Category c : kObstacleCategories)
      if (u[i][code(c)] > u[i][code(best)]) best = c;
    ++votes[static_cast<std::size_t>(ids[i] - 1)][code(best)];
  }
  std::vector<Category> mode(votes.size(), Category::vehicle);
  for (std::size_t r = 0; r < votes.size(); ++r) {
    for (Category c : kObstacleCategories)
      if (votes[r][code(c)] > votes[r][code(mode[r])]) mode[r] = c;
  }

  LabelRaster out = labels;
  auto dst = out.cells();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] && is_traversable(dst[i])) dst[i] = mode[static_cast<std::size_t>(ids[i] - 1)];
  }
  return out;
}

Metrics precision_recall(const LabelRaster& pred, const LabelRaster& truth) {
  require_same_grid(pred, truth, "precision_recall");
  Metrics m;
  auto p = pred.cells();
  auto t = truth.cells();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int pc = code(p[i]), tc = code(t[i]);
    if (!is_valid_category(pc) || !is_valid_category(tc)) continue;
    ++m.confusion[tc][pc];
    ++m.total;
  }
  std::int64_t tp_sum = 0;
  double recall_sum = 0.0;
  int recall_n = 0;
  for (int c = 0; c < kCategoryCount; ++c) {
    std::int64_t row = 0, col = 0;
    for (int j = 0; j < kCategoryCount; ++j) {
      row += m.confusion[c][j];
      col += m.confusion[j][c];
    }
    const std::int64_t tp = m.confusion[c][c];
    tp_sum += tp;
    if (col > 0) m.precision[c] = static_cast<double>(tp) / static_cast<double>(col);
    if (row > 0) {
      m.recall[c] = static_cast<double>(tp) / static_cast<double>(row);
      recall_sum += *m.recall[c];
      ++recall_n;
    }
  }
  m.global_accuracy = m.total ? static_cast<double>(tp_sum) / static_cast<double>(m.total) : 0.0;
  m.average_recall = recall_n ? recall_sum / recall_n : 0.0;
  return m;
}

Raster<int> to_codes(const LabelRaster& labels) {
  return map_raster<int>(labels, [](Category c) { return code(c); }, static_cast<int>(kDefaultNodata));
}

LabelRaster from_codes(const ElevationRaster& grid) {
  LabelRaster out = make_label_raster(grid.width(), grid.height(), Category::unknown, grid.transform());
  auto src = grid.cells();
  auto dst = out.cells();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (grid.is_nodata(src[i])) continue;
    const double v = src[i];
    if (v != std::floor(v) || !is_valid_category(static_cast<int>(v)))
      throw ParseError("label value " + std::to_string(v) + " is not a category code");
    dst[i] = static_cast<Category>(static_cast<int>(v));
  }
  return out;
}

void write_labels(const LabelRaster& labels, const std::filesystem::path& path) {
  write_ascii_grid_int(to_codes(labels), path);
}

LabelRaster read_labels(const std::filesystem::path& path) { return from_codes(read_ascii_grid(path)); }

void write_legend_json(const std::filesystem::path& path) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (Category c : kCategories) {
    j[std::to_string(code(c))] = {{"name", std::string(category_name(c))},
                                  {"traversable", is_traversable(c)}};
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_unaries(const UnaryRaster& u, const std::filesystem::path& dir) {
  for (int c = 0; c < kCategoryCount; ++c) {
    ElevationRaster layer = map_raster<double>(u, [c](const Scores& s) { return s[c]; });
    write_ascii_grid(layer, dir / ("unary_c" + std::to_string(c) + ".asc"));
  }
}

UnaryRaster read_unaries(const std::filesystem::path& dir) {
  UnaryRaster out;
  for (int c = 0; c < kCategoryCount; ++c) {
    const ElevationRaster layer = read_ascii_grid(dir / ("unary_c" + std::to_string(c) + ".asc"));
    if (c == 0) {
      out = UnaryRaster(layer.width(), layer.height(), Scores{}, layer.transform());
    } else {
      require_same_grid(out, layer, "read_unaries");
    }
    auto src = layer.cells();
    auto dst = out.cells();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i][c] = layer.is_nodata(src[i]) ? 0.0 : src[i];
  }
  return out;
}

std::string metrics_to_json(const Metrics& m) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json cats = nlohmann::ordered_json::object();
  for (Category c : kCategories) {
    nlohmann::ordered_json e;
    const auto& p = m.precision[code(c)];
    const auto& r = m.recall[code(c)];
    e["precision"] = p ? nlohmann::ordered_json(*p) : nlohmann::ordered_json(nullptr);
    e["recall"] = r ? nlohmann::ordered_json(*r) : nlohmann::ordered_json(nullptr);
    cats[std::string(category_name(c))] = e;
  }
  j["categories"] = cats;
  j["global_accuracy"] = m.global_accuracy;
  j["average_recall"] = m.average_recall;
  j["average_definition"] = "mean of per-category recall over categories present in truth";
  nlohmann::ordered_json conf = nlohmann::ordered_json::array();
  for (const auto& row : m.confusion)
    for (std::int64_t v : row) conf.push_back(v);
  j["confusion_row_major"] = conf;
  j["confusion_rows"] = "truth";
  j["pixels"] = m.total;
  return j.dump(2);
}

void write_metrics_json(const Metrics& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << metrics_to_json(m) << '\n';
}

}  // namespace radsearch::segmentation
