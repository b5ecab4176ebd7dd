#include "radsearch/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "radsearch/raster_io.hpp"

namespace radsearch::scene {

void SceneParams::validate() const {
  if (width < 60 || height < 60) throw ParameterError("scene must be at least 60 x 60 pixels");
  if (!(pixel_size > 0.0)) throw ParameterError("pixel_size must be positive");
  if (buildings < 1) throw ParameterError("scene needs at least one building");
  if (vehicles < 1 || trees < 1) throw ParameterError("scene needs at least one vehicle and one tree");
  if (!(hill_amplitude_m >= 0.0)) throw ParameterError("hill amplitude must be >= 0");
}

namespace {

struct Rect {
  int c0, r0, c1, r1;  // inclusive

  bool overlaps(const Rect& o, int margin) const {
    return c0 - margin <= o.c1 && o.c0 <= c1 + margin && r0 - margin <= o.r1 && o.r0 <= r1 + margin;
  }
  bool inside(int w, int h, int margin) const {
    return c0 >= margin && r0 >= margin && c1 < w - margin && r1 < h - margin;
  }
};

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Rgb base_colour(Category c) {
  switch (c) {
    case Category::road: return {110, 110, 115};
    case Category::grass: return {90, 150, 70};
    case Category::vehicle: return {170, 40, 40};
    case Category::building: return {185, 170, 150};
    case Category::vegetation: return {35, 85, 35};
    case Category::shadow: return {30, 35, 40};
    default: return {0, 0, 0};
  }
}

}  // namespace

Scene generate_scene(const SceneParams& p, Rng& rng) {
  p.validate();
  const int w = p.width, h = p.height;
  const double ps = p.pixel_size;
  const GeoTransform gt{ps / 2.0, ps / 2.0, ps};
  Scene s;
  s.labels = make_label_raster(w, h, Category::grass, gt);
  s.dem = ElevationRaster(w, h, 0.0, gt);

  // Rolling ground: two long-wavelength ripples plus a tilt.
  const double kx = 2.0 * std::numbers::pi / uniform(rng, 80.0, 120.0);
  const double ky = 2.0 * std::numbers::pi / uniform(rng, 80.0, 120.0);
  const double ph1 = uniform(rng, 0.0, 2.0 * std::numbers::pi), ph2 = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double tilt = uniform(rng, -0.01, 0.01);
  for (int row = 0; row < h; ++row)
    for (int col = 0; col < w; ++col) {
      const WorldPoint wp = gt.cell_center({col, row});
      s.dem(col, row) = 100.0 + p.hill_amplitude_m * std::sin(kx * wp.x + ph1) * std::sin(ky * wp.y + ph2) +
                        tilt * wp.x;
    }

  // Road loop.
  const int road_w = std::max(4, static_cast<int>(std::lround(6.0 / ps)));
  const Rect outer{w / 6, h / 6, w - 1 - w / 6, h - 1 - h / 6};
  const Rect inner{outer.c0 + road_w, outer.r0 + road_w, outer.c1 - road_w, outer.r1 - road_w};
  for (int row = outer.r0; row <= outer.r1; ++row)
    for (int col = outer.c0; col <= outer.c1; ++col)
      if (col < inner.c0 || col > inner.c1 || row < inner.r0 || row > inner.r1)
        s.labels(col, row) = Category::road;
  s.start = gt.cell_center({outer.c0 + road_w / 2, outer.r0 + road_w / 2});

  auto touches_road = [&](const Rect& r, int margin) {
    for (int row = std::max(0, r.r0 - margin); row <= std::min(h - 1, r.r1 + margin); ++row)
      for (int col = std::max(0, r.c0 - margin); col <= std::min(w - 1, r.c1 + margin); ++col)
        if (s.labels(col, row) == Category::road) return true;
    return false;
  };
  std::vector<Rect> occupied;

  // Buildings with a shadow band along their southern side.
  const int shadow_w = std::max(2, static_cast<int>(std::lround(2.5 / ps)));
  int placed = 0;
  for (int attempt = 0; attempt < 2000 && placed < p.buildings; ++attempt) {
    const int bw = uniform_int(rng, static_cast<int>(10.0 / ps), static_cast<int>(18.0 / ps));
    const int bh = uniform_int(rng, static_cast<int>(8.0 / ps), static_cast<int>(14.0 / ps));
    const int c0 = uniform_int(rng, 0, w - bw), r0 = uniform_int(rng, 0, h - bh);
    const Rect b{c0, r0, c0 + bw - 1, r0 + bh - 1};
    const Rect with_shadow{b.c0, b.r0 - shadow_w, b.c1, b.r1};
    if (!with_shadow.inside(w, h, 2) || touches_road(with_shadow, 4)) continue;
    if (std::any_of(occupied.begin(), occupied.end(), [&](const Rect& o) { return o.overlaps(with_shadow, 4); }))
      continue;
    occupied.push_back(with_shadow);
    const double height = uniform(rng, 4.0, 6.0);
    const double floor = s.dem(b.c0, b.r0);
    for (int row = b.r0; row <= b.r1; ++row)
      for (int col = b.c0; col <= b.c1; ++col) {
        s.labels(col, row) = Category::building;
        s.dem(col, row) = floor + height;
      }
    for (int row = with_shadow.r0; row < b.r0; ++row)
      for (int col = b.c0; col <= b.c1; ++col) s.labels(col, row) = Category::shadow;
    s.features.push_back({Category::building, b.c0, b.r0, b.c1, b.r1, height});
    s.features.push_back({Category::shadow, with_shadow.c0, with_shadow.r0, with_shadow.c1, b.r0 - 1, 0.0});
    ++placed;
  }
  if (placed == 0) throw ParameterError("could not place any building; enlarge the scene");

  // Vehicles parked against the outer edge of the loop.
  const int veh_len = std::max(3, static_cast<int>(std::lround(4.5 / ps)));
  const int veh_wid = std::max(2, static_cast<int>(std::lround(1.8 / ps)));
  std::vector<Rect> vehicles;
  placed = 0;
  for (int attempt = 0; attempt < 500 && placed < p.vehicles; ++attempt) {
    const int side = uniform_int(rng, 0, 3);
    Rect v{};
    if (side < 2) {
      const int c0 = uniform_int(rng, inner.c0, inner.c1 - veh_len);
      const int r0 = side == 0 ? outer.r0 : outer.r1 - veh_wid + 1;
      v = {c0, r0, c0 + veh_len - 1, r0 + veh_wid - 1};
    } else {
      const int r0 = uniform_int(rng, inner.r0, inner.r1 - veh_len);
      const int c0 = side == 2 ? outer.c0 : outer.c1 - veh_wid + 1;
      v = {c0, r0, c0 + veh_wid - 1, r0 + veh_len - 1};
    }
    if (std::any_of(vehicles.begin(), vehicles.end(), [&](const Rect& o) { return o.overlaps(v, 2); })) continue;
    vehicles.push_back(v);
    for (int row = v.r0; row <= v.r1; ++row)
      for (int col = v.c0; col <= v.c1; ++col) {
        s.labels(col, row) = Category::vehicle;
        s.dem(col, row) += 1.5;
      }
    s.features.push_back({Category::vehicle, v.c0, v.r0, v.c1, v.r1, 1.5});
    ++placed;
  }

  // Tree clumps on open grass.
  placed = 0;
  for (int attempt = 0; attempt < 2000 && placed < p.trees; ++attempt) {
    const int rad = uniform_int(rng, std::max(2, static_cast<int>(2.0 / ps)), std::max(3, static_cast<int>(4.0 / ps)));
    const int cc = uniform_int(rng, rad + 2, w - rad - 3), cr = uniform_int(rng, rad + 2, h - rad - 3);
    const Rect box{cc - rad, cr - rad, cc + rad, cr + rad};
    if (touches_road(box, 3)) continue;
    if (std::any_of(occupied.begin(), occupied.end(), [&](const Rect& o) { return o.overlaps(box, 3); })) continue;
    occupied.push_back(box);
    const double height = uniform(rng, 2.5, 4.0);
    for (int row = box.r0; row <= box.r1; ++row)
      for (int col = box.c0; col <= box.c1; ++col) {
        const int dc = col - cc, dr = row - cr;
        if (dc * dc + dr * dr > rad * rad) continue;
        s.labels(col, row) = Category::vegetation;
        s.dem(col, row) += height;
      }
    s.features.push_back({Category::vegetation, box.c0, box.r0, box.c1, box.r1, height});
    ++placed;
  }

  // Source site: open grass inside the loop, clear of everything by 5 m.
  const int clear = static_cast<int>(std::ceil(5.0 / ps));
  bool sited = false;
  for (int attempt = 0; attempt < 5000 && !sited; ++attempt) {
    const int col = uniform_int(rng, inner.c0 + clear, inner.c1 - clear);
    const int row = uniform_int(rng, inner.r0 + clear, inner.r1 - clear);
    bool ok = true;
    for (int r = row - clear; r <= row + clear && ok; ++r)
      for (int c = col - clear; c <= col + clear && ok; ++c) ok = s.labels(c, r) == Category::grass;
    if (ok) {
      s.source_site = gt.cell_center({col, row});
      sited = true;
    }
  }
  if (!sited) s.source_site = gt.cell_center({(inner.c0 + inner.c1) / 2, (inner.r0 + inner.r1) / 2});

  // Orthophoto: category colour with per-pixel jitter.
  s.ortho = RgbRaster(w, h, Rgb{}, gt);
  std::uniform_int_distribution<int> jitter(-12, 12);
  for (std::size_t i = 0; i < s.ortho.size(); ++i) {
    const Rgb b = base_colour(s.labels.cells()[i]);
    Rgb& px = s.ortho.cells()[i];
    for (int k = 0; k < 3; ++k) px[k] = static_cast<std::uint8_t>(std::clamp(b[k] + jitter(rng), 0, 255));
  }
  return s;
}

std::string truth_json(const Scene& s, const SceneParams& p, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["width"] = p.width;
  j["height"] = p.height;
  j["pixel_size"] = p.pixel_size;
  std::array<std::int64_t, kCategoryCount> census{};
  for (Category c : s.labels.cells()) ++census[static_cast<std::size_t>(code(c))];
  nlohmann::ordered_json cj;
  for (Category c : kCategories) cj[std::string(category_name(c))] = census[static_cast<std::size_t>(code(c))];
  j["census"] = cj;
  nlohmann::ordered_json feats = nlohmann::ordered_json::array();
  for (const Footprint& f : s.features)
    feats.push_back({{"kind", category_name(f.kind)},
                     {"min_col", f.min_col},
                     {"min_row", f.min_row},
                     {"max_col", f.max_col},
                     {"max_row", f.max_row},
                     {"height_m", f.height_m}});
  j["features"] = feats;
  j["start"] = {s.start.x, s.start.y};
  j["source_site"] = {s.source_site.x, s.source_site.y};
  return j.dump(2) + '\n';
}

void write_scene(const Scene& s, const SceneParams& p, std::uint64_t seed, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_ppm(s.ortho, dir / "ortho.ppm");
  write_sidecar(s.ortho.transform(), dir / "ortho.ppm");
  write_ascii_grid(s.dem, dir / "dem.asc");
  segmentation::write_labels(s.labels, dir / "labels.asc");
  segmentation::write_legend_json(dir / "legend.json");
  std::ofstream out(dir / "truth.json", std::ios::binary);
  if (!out) throw IoError("cannot write " + (dir / "truth.json").string());
  out << truth_json(s, p, seed);
}

}  // namespace radsearch::scene
