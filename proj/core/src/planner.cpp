#include "radsearch/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include <nlohmann/json.hpp>

namespace radsearch::planner {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher), squared distances in place.
void edt_1d(std::vector<double>& f, std::vector<int>& v, std::vector<double>& z, std::vector<double>& d) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (f[v[k]] == kInf) {
      v[k] = q;
      continue;
    }
    double s = 0.0;
    while (true) {
      s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (f[v[0]] == kInf) {
    for (int q = 0; q < n; ++q) d[q] = kInf;
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = double(q - v[k]);
    d[q] = dq * dq + f[v[k]];
  }
  f.swap(d);
}

constexpr std::array<Cell, 8> kNeighbours{Cell{1, 0},  Cell{-1, 0}, Cell{0, 1},  Cell{0, -1},
                                          Cell{1, 1},  Cell{1, -1}, Cell{-1, 1}, Cell{-1, -1}};

bool adjacent(Cell a, Cell b) {
  const int dc = std::abs(a.col - b.col), dr = std::abs(a.row - b.row);
  return std::max(dc, dr) == 1;
}

}  // namespace

ElevationRaster distance_transform(const Mask& mask) {
  const int w = mask.width(), h = mask.height();
  ElevationRaster out(w, h, kInf, mask.transform());
  if (w == 0 || h == 0) return out;
  const int n = std::max(w, h);
  std::vector<double> f, d(static_cast<std::size_t>(n));
  std::vector<int> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) + 1);

  // Columns first, then rows.
  for (int col = 0; col < w; ++col) {
    f.assign(static_cast<std::size_t>(h), kInf);
    for (int row = 0; row < h; ++row) f[row] = mask(col, row) ? 0.0 : kInf;
    d.resize(static_cast<std::size_t>(h));
    edt_1d(f, v, z, d);
    for (int row = 0; row < h; ++row) out(col, row) = f[row];
  }
  for (int row = 0; row < h; ++row) {
    f.assign(static_cast<std::size_t>(w), kInf);
    for (int col = 0; col < w; ++col) f[col] = out(col, row);
    d.resize(static_cast<std::size_t>(w));
    edt_1d(f, v, z, d);
    for (int col = 0; col < w; ++col) out(col, row) = std::sqrt(f[col]);
  }
  return out;
}

PlanGrid::PlanGrid(LabelRaster labels, ElevationRaster dem)
    : labels_(std::move(labels)), dem_(std::move(dem)) {
  if (!dem_.empty() && (dem_.width() != labels_.width() || dem_.height() != labels_.height()))
    throw DimensionError("PlanGrid: DEM and labels differ in size");
  removed_ = Mask(labels_.width(), labels_.height(), 0, labels_.transform());
  Mask nonroad(labels_.width(), labels_.height(), 0, labels_.transform());
  auto l = labels_.cells();
  auto m = nonroad.cells();
  for (std::size_t i = 0; i < l.size(); ++i) m[i] = l[i] != Category::road;
  d_nonroad_ = distance_transform(nonroad);
  recompute_obstacle_field();
}

void PlanGrid::recompute_obstacle_field() {
  Mask obstacle(labels_.width(), labels_.height(), 0, labels_.transform());
  auto l = labels_.cells();
  auto r = removed_.cells();
  auto m = obstacle.cells();
  for (std::size_t i = 0; i < l.size(); ++i) m[i] = !is_traversable(l[i]) || r[i];
  d_obstacle_ = distance_transform(obstacle);
}

bool PlanGrid::traversable(Cell c) const {
  return labels_.in_bounds(c) && is_traversable(labels_[c]) && !removed_[c];
}

std::size_t PlanGrid::removed_count() const {
  std::size_t n = 0;
  for (auto v : removed_.cells()) n += v != 0;
  return n;
}

PlanGrid PlanGrid::with_removed(std::span<const Cell> cells, int dilation_radius, std::size_t& clipped) const {
  if (dilation_radius < 0) throw ParameterError("dilation radius must be >= 0");
  clipped = 0;
  PlanGrid out = *this;
  if (cells.empty()) return out;
  for (const Cell c : cells) {
    if (!in_bounds(c)) {
      ++clipped;
      continue;
    }
    for (int dr = -dilation_radius; dr <= dilation_radius; ++dr)
      for (int dc = -dilation_radius; dc <= dilation_radius; ++dc) {
        const Cell n{c.col + dc, c.row + dr};
        if (in_bounds(n)) out.removed_[n] = 1;
      }
  }
  out.recompute_obstacle_field();
  return out;
}

void CostWeights::validate() const {
  for (double v : w)
    if (!(v >= 0.0)) throw ParameterError("cost weights must be non-negative");
  if (!(base_step >= 0.0)) throw ParameterError("base_step must be non-negative");
  if (!(slope_weight >= 0.0)) throw ParameterError("slope_weight must be non-negative");
}

Features features(const PlanGrid& grid, Cell xc, Cell xn) {
  if (!adjacent(xc, xn)) throw ContractViolation("features: nodes are not 8-adjacent");
  if (!grid.traversable(xc) || !grid.traversable(xn))
    throw ContractViolation("features: node is not traversable");
  Features f;
  const Category lc = grid.label(xc);
  if (lc == Category::road) {
    const double d = grid.d_nonroad()[xc];
    if (!(d >= 1.0)) throw ContractViolation("road cell closer than 1 px to a non-road cell");
    f.phi1 = std::isinf(d) ? 0.0 : 1.0 / d;
  }
  f.phi2 = grid.label(xn) != Category::road ? 1.0 : 0.0;
  if (lc == Category::grass) {
    const double d = grid.d_obstacle()[xc];
    if (!(d >= 1.0)) throw ContractViolation("grass cell closer than 1 px to an obstacle cell");
    f.phi3 = std::isinf(d) ? 0.0 : 1.0 / d;
  }
  return f;
}

namespace {

double extra_terms(const PlanGrid& grid, const CostWeights& w, Cell xc, Cell xn) {
  const double len = (xc.col != xn.col && xc.row != xn.row) ? std::sqrt(2.0) : 1.0;
  double extra = w.base_step * len;
  if (w.slope_weight > 0.0 && !grid.dem().empty()) {
    const double dz = grid.dem()[xn] - grid.dem()[xc];
    extra += w.slope_weight * std::abs(dz) / (len * grid.transform().pixel_size);
  }
  return extra;
}

}  // namespace

double step_cost(const PlanGrid& grid, const CostWeights& w, Cell xc, Cell xn) {
  const Features f = features(grid, xc, xn);
  return w.w[0] * f.phi1 + w.w[1] * f.phi2 + w.w[2] * f.phi3 + extra_terms(grid, w, xc, xn);
}

bool move_allowed(const PlanGrid& grid, Cell a, Cell b) {
  if (!grid.traversable(b)) return false;
  if (a.col != b.col && a.row != b.row)
    return grid.traversable({b.col, a.row}) && grid.traversable({a.col, b.row});
  return true;
}

Path astar(const PlanGrid& grid, const CostWeights& w, Cell start, Cell goal, const SearchOptions& opts) {
  w.validate();
  if (!grid.traversable(start)) throw EndpointError("start node is not traversable");
  if (!grid.traversable(goal)) throw EndpointError("goal node is not traversable");

  const int width = grid.width();
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(grid.height());
  auto idx = [width](Cell c) { return static_cast<std::size_t>(c.row) * width + static_cast<std::size_t>(c.col); };
  auto heuristic = [&](Cell c) {
    if (opts.heuristic == Heuristic::zero) return 0.0;
    const double dc = c.col - goal.col, dr = c.row - goal.row;
    return opts.heuristic_scale * std::sqrt(dc * dc + dr * dr);
  };

  std::vector<double> g(n, kInf);
  std::vector<std::size_t> parent(n, n);
  std::vector<std::uint8_t> closed(n, 0);
  using Entry = std::tuple<double, double, std::size_t>;  // f, h, index
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  const std::size_t s = idx(start), t = idx(goal);
  g[s] = 0.0;
  open.emplace(heuristic(start), heuristic(start), s);
  std::size_t expansions = 0;
  const LabelRaster& labels = grid.labels();
  const ElevationRaster& dnr = grid.d_nonroad();
  const ElevationRaster& dob = grid.d_obstacle();

  while (!open.empty()) {
    const auto [f, h, u] = open.top();
    open.pop();
    if (closed[u]) continue;
    closed[u] = 1;
    ++expansions;
    if (u == t) break;
    const Cell cu{static_cast<int>(u % width), static_cast<int>(u / width)};

    // Terms depending only on the current node.
    const Category lc = labels[cu];
    double from_cost = 0.0;
    if (lc == Category::road && !std::isinf(dnr[cu])) from_cost += w.w[0] * (1.0 / dnr[cu]);
    if (lc == Category::grass && !std::isinf(dob[cu])) from_cost += w.w[2] * (1.0 / dob[cu]);

    for (const Cell d : kNeighbours) {
      const Cell cv{cu.col + d.col, cu.row + d.row};
      if (!grid.in_bounds(cv) || !move_allowed(grid, cu, cv)) continue;
      const std::size_t v = idx(cv);
      if (closed[v]) continue;
      const double phi2 = labels[cv] != Category::road ? w.w[1] : 0.0;
      const double cand = g[u] + (from_cost + phi2 + extra_terms(grid, w, cu, cv));
      if (cand < g[v]) {
        g[v] = cand;
        parent[v] = u;
        const double hv = heuristic(cv);
        open.emplace(cand + hv, hv, v);
      }
    }
  }

  if (!closed[t]) {
    std::size_t reached = 0;
    for (double v : g) reached += !std::isinf(v);
    throw NoPathError(reached);
  }

  Path path;
  path.cost = g[t];
  path.expansions = expansions;
  for (std::size_t v = t; v != n; v = parent[v]) path.cells.push_back(labels.cell_of(v));
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

RemovalReport remove_obstacle_nodes(const PlanGrid& grid, std::span<const Cell> cells, int dilation_radius) {
  RemovalReport r;
  r.grid = grid.with_removed(cells, dilation_radius, r.clipped);
  return r;
}

PlanRequest parse_plan_request(std::string_view text) {
  PlanRequest req;
  try {
    const auto j = nlohmann::json::parse(text);
    req.labels_path = j.at("labels_path").get<std::string>();
    req.dem_path = j.value("dem_path", std::string());
    const auto start = j.at("start");
    const auto goal = j.at("goal");
    req.start = {start.at(0).get<double>(), start.at(1).get<double>()};
    req.goal = {goal.at(0).get<double>(), goal.at(1).get<double>()};
    if (j.contains("weights")) {
      const auto& wj = j.at("weights");
      if (!wj.is_array() || wj.size() != 3) throw ParseError("weights must have 3 entries");
      req.weights.w = {wj[0].get<double>(), wj[1].get<double>(), wj[2].get<double>()};
    }
    req.weights.base_step = j.value("base_step", 0.0);
    req.weights.slope_weight = j.value("slope_weight", 0.0);
    const std::string h = j.value("heuristic", std::string("euclidean"));
    if (h == "euclidean") {
      req.search.heuristic = Heuristic::euclidean;
    } else if (h == "zero") {
      req.search.heuristic = Heuristic::zero;
    } else {
      throw ParseError("heuristic must be \"euclidean\" or \"zero\"");
    }
    req.search.heuristic_scale = j.value("heuristic_scale", 1.0);
    req.dilation_radius = j.value("dilation_radius", 0);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad plan request: ") + e.what());
  }
  req.weights.validate();
  return req;
}

std::string path_to_json(const Path& path, const GeoTransform& gt) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json px = nlohmann::ordered_json::array();
  nlohmann::ordered_json world = nlohmann::ordered_json::array();
  for (const Cell c : path.cells) {
    px.push_back({c.col, c.row});
    const WorldPoint p = gt.cell_center(c);
    world.push_back({p.x, p.y});
  }
  j["pixels"] = px;
  j["world"] = world;
  j["cost"] = path.cost;
  j["expansions"] = path.expansions;
  return j.dump();
}

}  // namespace radsearch::planner
