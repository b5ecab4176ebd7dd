#include "radsearch/ugvsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace radsearch::ugvsim {

using radiation::Measurement;
using radiation::Vec3;

bool RuntimeObstacle::contains(double px, double py) const {
  const double dx = px - x, dy = py - y;
  if (shape == Shape::disc) return dx * dx + dy * dy <= radius * radius;
  return std::abs(dx) <= 0.5 * w && std::abs(dy) <= 0.5 * h;
}

void RuntimeObstacle::validate() const {
  if (!(height > 0.0)) throw ParameterError("obstacle height must be positive");
  if (!(appears_at >= 0.0)) throw ParameterError("obstacle appears_at must be >= 0");
  if (shape == Shape::disc && !(radius > 0.0)) throw ParameterError("disc obstacle needs radius > 0");
  if (shape == Shape::rect && !(w > 0.0 && h > 0.0)) throw ParameterError("rect obstacle needs w, h > 0");
}

double TrueScene::height_at(double x, double y, double t) const {
  const Cell c = dem.transform().world_to_cell(x, y);
  if (!dem.in_bounds(c)) throw BoundsError("position outside the scene raster");
  const double ground = dem[c];
  double z = ground;
  for (const RuntimeObstacle& o : obstacles)
    if (t >= o.appears_at && o.contains(x, y)) z = std::max(z, ground + o.height);
  return z;
}

std::vector<Cell> TrueScene::obstacle_cells() const {
  std::vector<Cell> out;
  const GeoTransform& gt = dem.transform();
  for (int row = 0; row < dem.height(); ++row)
    for (int col = 0; col < dem.width(); ++col) {
      const WorldPoint p = gt.cell_center({col, row});
      for (const RuntimeObstacle& o : obstacles)
        if (o.contains(p.x, p.y)) {
          out.push_back({col, row});
          break;
        }
    }
  return out;
}

void UgvState::validate() const {
  if (!(speed >= 0.0 && speed <= kMaxSpeed)) throw ParameterError("speed must lie in [0, 4.5] m/s");
}

FollowStep follow_path(UgvState& s, Follower& f, double dt) {
  if (!(dt > 0.0)) throw ParameterError("dt must be positive");
  if (f.waypoints.empty()) throw EmptyInputError("follow_path needs at least one waypoint");
  s.validate();
  FollowStep out;
  double budget = s.speed * dt;
  while (!f.done()) {
    const WorldPoint wp = f.waypoints[f.next];
    const double dx = wp.x - s.x, dy = wp.y - s.y;
    const double d = std::hypot(dx, dy);
    const bool last = f.next + 1 == f.waypoints.size();
    if (last && d <= f.capture_radius) {
      out.reached.push_back(f.next++);
      break;
    }
    if (d <= budget) {
      if (d > 0.0) s.heading = std::atan2(dy, dx);
      s.x = wp.x;
      s.y = wp.y;
      budget -= d;
      out.travelled += d;
      out.reached.push_back(f.next++);
      continue;
    }
    if (budget <= 0.0) break;
    s.heading = std::atan2(dy, dx);
    s.x += dx / d * budget;
    s.y += dy / d * budget;
    out.travelled += budget;
    if (last && d - budget <= f.capture_radius) out.reached.push_back(f.next++);
    break;
  }
  return out;
}

std::vector<ScanPoint> lidar_scan(const TrueScene& scene, const UgvState& pose, double t, double range_m,
                                  int n_rays) {
  if (!(range_m > 0.0)) throw ParameterError("lidar range must be positive");
  if (n_rays < 8) throw ParameterError("lidar needs at least 8 rays");
  const GeoTransform& gt = scene.dem.transform();
  if (!scene.dem.in_bounds(gt.world_to_cell(pose.x, pose.y)))
    throw BoundsError("LiDAR pose outside the scene raster");
  const int steps = static_cast<int>(std::floor(range_m / gt.pixel_size + 1e-9));
  std::vector<ScanPoint> out;
  out.reserve(static_cast<std::size_t>(n_rays) * static_cast<std::size_t>(steps));
  for (int i = 0; i < n_rays; ++i) {
    const double az = 2.0 * std::numbers::pi * i / n_rays;
    const double ux = std::cos(az), uy = std::sin(az);
    for (int k = 1; k <= steps; ++k) {
      const double s = k * gt.pixel_size;
      const double x = pose.x + ux * s, y = pose.y + uy * s;
      if (!scene.dem.in_bounds(gt.world_to_cell(x, y))) break;
      out.push_back({x, y, scene.height_at(x, y, t)});
    }
  }
  return out;
}

std::vector<Cell> detect_obstacles(std::span<const ScanPoint> scan, const GeoTransform& frame, double grad_tau) {
  if (scan.empty()) return {};
  int c0 = std::numeric_limits<int>::max(), r0 = c0;
  int c1 = std::numeric_limits<int>::min(), r1 = c1;
  std::vector<Cell> cells;
  cells.reserve(scan.size());
  for (const ScanPoint& p : scan) {
    const Cell c = frame.world_to_cell(p.x, p.y);
    cells.push_back(c);
    c0 = std::min(c0, c.col);
    r0 = std::min(r0, c.row);
    c1 = std::max(c1, c.col);
    r1 = std::max(r1, c.row);
  }
  // One nodata cell of padding on every side.
  --c0, --r0, ++c1, ++r1;
  const double nodata = std::numeric_limits<double>::lowest();
  const GeoTransform lgt{frame.origin_x + c0 * frame.pixel_size, frame.origin_y + r0 * frame.pixel_size,
                         frame.pixel_size};
  ElevationRaster local(c1 - c0 + 1, r1 - r0 + 1, nodata, lgt, nodata);
  for (std::size_t i = 0; i < scan.size(); ++i) {
    double& z = local(cells[i].col - c0, cells[i].row - r0);
    z = std::max(z, scan[i].z);
  }

  const ElevationRaster grad = gradient_magnitude(local);
  const int w = local.width(), h = local.height();
  std::vector<std::uint8_t> flag(local.size(), 0);
  for (std::size_t i = 0; i < flag.size(); ++i) {
    const double g = grad.cells()[i];
    flag[i] = !grad.is_nodata(g) && g > grad_tau;
  }

  // Cells the border cannot reach without crossing a flagged cell are enclosed.
  std::vector<std::uint8_t> outside(flag.size(), 0);
  std::vector<Cell> stack;
  auto seed = [&](int col, int row) {
    const std::size_t i = local.index(col, row);
    if (!flag[i] && !outside[i]) {
      outside[i] = 1;
      stack.push_back({col, row});
    }
  };
  for (int col = 0; col < w; ++col) seed(col, 0), seed(col, h - 1);
  for (int row = 0; row < h; ++row) seed(0, row), seed(w - 1, row);
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    if (c.col > 0) seed(c.col - 1, c.row);
    if (c.col + 1 < w) seed(c.col + 1, c.row);
    if (c.row > 0) seed(c.col, c.row - 1);
    if (c.row + 1 < h) seed(c.col, c.row + 1);
  }

  std::vector<Cell> out;
  for (int row = 0; row < h; ++row)
    for (int col = 0; col < w; ++col) {
      const std::size_t i = local.index(col, row);
      if (flag[i] || !outside[i]) out.push_back({col + c0, row + r0});
    }
  std::sort(out.begin(), out.end());
  return out;
}

MapUpdate update_global_map(const planner::PlanGrid& grid, const LabelRaster& labels, std::span<const Cell> cells,
                            int dilation_radius, Category label) {
  if (is_traversable(label)) throw ParameterError("obstacle label must be non-traversable");
  if (labels.width() != grid.width() || labels.height() != grid.height())
    throw DimensionError("labels and planning grid differ in size");
  planner::RemovalReport removal = planner::remove_obstacle_nodes(grid, cells, dilation_radius);
  MapUpdate out{std::move(removal.grid), labels, removal.clipped};
  for (const Cell c : cells) {
    if (!labels.in_bounds(c)) continue;
    for (int dr = -dilation_radius; dr <= dilation_radius; ++dr)
      for (int dc = -dilation_radius; dc <= dilation_radius; ++dc) {
        const Cell n{c.col + dc, c.row + dr};
        if (out.labels.in_bounds(n) && is_traversable(out.labels[n])) out.labels[n] = label;
      }
  }
  return out;
}

DemAccumulator::DemAccumulator(int width, int height, GeoTransform frame)
    : sum_(width, height, 0.0, frame), count_(width, height, 0u, frame) {}

void DemAccumulator::add(double x, double y, double z) {
  const Cell c = sum_.transform().world_to_cell(x, y);
  if (!sum_.in_bounds(c)) return;
  sum_[c] += z;
  count_[c] += 1;
}

void DemAccumulator::add(std::span<const ScanPoint> points) {
  for (const ScanPoint& p : points) add(p.x, p.y, p.z);
}

ElevationRaster DemAccumulator::exported(double nodata) const {
  ElevationRaster out(sum_.width(), sum_.height(), nodata, sum_.transform(), nodata);
  auto s = sum_.cells();
  auto n = count_.cells();
  auto o = out.cells();
  for (std::size_t i = 0; i < o.size(); ++i)
    if (n[i] > 0) o[i] = s[i] / n[i];
  return out;
}

void MissionConfig::validate() const {
  if (!(dt > 0.0)) throw ParameterError("dt must be positive");
  if (!(speed > 0.0 && speed <= kMaxSpeed)) throw ParameterError("speed must lie in (0, 4.5] m/s");
  if (!(capture_radius > 0.0)) throw ParameterError("capture_radius must be positive");
  if (!(lidar_range_m > 0.0)) throw ParameterError("lidar range must be positive");
  if (lidar_rays < 8) throw ParameterError("lidar needs at least 8 rays");
  if (!(grad_tau > 0.0)) throw ParameterError("grad_tau must be positive");
  if (!(height_margin >= 0.0)) throw ParameterError("height_margin must be >= 0");
  if (dilation_radius < 0) throw ParameterError("dilation radius must be >= 0");
  if (!(lookahead_m > 0.0)) throw ParameterError("lookahead must be positive");
  if (!(dwell_s >= 0.0)) throw ParameterError("dwell must be >= 0");
  if (!(measure_interval_s > 0.0)) throw ParameterError("measurement interval must be positive");
  if (!(max_time_s > 0.0)) throw ParameterError("max_time must be positive");
  if (is_traversable(obstacle_label) || obstacle_label == Category::unknown)
    throw ParameterError("obstacle label must be a non-traversable category");
  weights.validate();
}

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::outbound: return "outbound";
    case Phase::dwell: return "dwell";
    case Phase::inbound: return "inbound";
  }
  return "?";
}

std::string_view event_name(EventKind k) {
  switch (k) {
    case EventKind::obstacle_detected: return "obstacle_detected";
    case EventKind::replanned: return "replanned";
    case EventKind::dwell_start: return "dwell_start";
    case EventKind::dwell_end: return "dwell_end";
    case EventKind::returned: return "returned";
    case EventKind::abort: return "abort";
  }
  return "?";
}

namespace {

int chebyshev(Cell a, Cell b) { return std::max(std::abs(a.col - b.col), std::abs(a.row - b.row)); }

class Mission {
 public:
  Mission(const TrueScene& scene, const planner::PlanGrid& grid, const radiation::DetectorModel& det,
          std::span<const radiation::RadSource> sources, const MissionConfig& cfg, Rng& rng)
      : scene_(scene), grid_(grid), det_(det), sources_(sources), cfg_(cfg), rng_(rng), gt_(grid.transform()) {
    log_.dem = DemAccumulator(grid.width(), grid.height(), gt_);
    log_.labels = grid.labels();
    next_measure_ = cfg.measure_interval_s;
  }

  MissionLog run(WorldPoint start, WorldPoint goal) {
    home_ = gt_.world_to_cell(start.x, start.y);
    goal_ = gt_.world_to_cell(goal.x, goal.y);
    goal_w_ = gt_.cell_center(goal_);
    planner::Path p = planner::astar(grid_, cfg_.weights, home_, goal_);
    log_.plans.push_back(p.cells);

    const WorldPoint h = gt_.cell_center(home_);
    st_ = {h.x, h.y, 0.0, cfg_.speed};
    record(Phase::outbound);

    if (leg(std::move(p.cells), Phase::outbound)) {
      dwell();
      std::vector<Cell> back(log_.outbound_waypoints.rbegin(), log_.outbound_waypoints.rend());
      if (leg(std::move(back), Phase::inbound)) {
        event(EventKind::returned);
        log_.returned = true;
      }
    }
    log_.removed = grid_.removed();
    return std::move(log_);
  }

 private:
  // Rounded to the microsecond so logged times do not carry 0.1-step drift.
  double now() const { return std::round(static_cast<double>(tick_) * cfg_.dt * 1e6) / 1e6; }

  void event(EventKind k, std::size_t cells = 0, std::size_t nodes = 0, std::string detail = {}) {
    log_.events.push_back({now(), k, cells, nodes, std::move(detail)});
  }

  void record(Phase ph) {
    const double d = std::hypot(st_.x - goal_w_.x, st_.y - goal_w_.y);
    log_.trajectory.push_back({now(), st_.x, st_.y, st_.heading, d, ph});
  }

  void measure(Phase ph) {
    while (now() + 1e-9 >= next_measure_) {
      Measurement m = radiation::sample_measurement(rng_, det_, sources_, {st_.x, st_.y, cfg_.detector_height_m},
                                                    next_measure_);
      const double d = std::hypot(st_.x - goal_w_.x, st_.y - goal_w_.y);
      log_.counts.push_back({m.t, st_.x, st_.y, d, m.counts, ph});
      log_.measurements.push_back(std::move(m));
      next_measure_ = static_cast<double>(++measure_index_ + 1) * cfg_.measure_interval_s;
    }
  }

  void advance_clock(Phase ph) {
    ++tick_;
    record(ph);
    measure(ph);
  }

  // New obstacle cells: flagged by the gradient test, observed above the surveyed
  // ground, still open in the planning grid and away from the vehicle itself.
  std::vector<Cell> sense() {
    const std::vector<ScanPoint> scan = lidar_scan(scene_, st_, now(), cfg_.lidar_range_m, cfg_.lidar_rays);
    log_.dem.add(scan);
    const std::vector<Cell> flagged = detect_obstacles(scan, gt_, cfg_.grad_tau);
    if (flagged.empty()) return {};

    std::unordered_map<std::size_t, double> top;
    for (const ScanPoint& p : scan) {
      const Cell c = gt_.world_to_cell(p.x, p.y);
      if (!grid_.in_bounds(c)) continue;
      auto [it, fresh] = top.try_emplace(grid_.labels().index(c.col, c.row), p.z);
      if (!fresh) it->second = std::max(it->second, p.z);
    }
    const Cell here = gt_.world_to_cell(st_.x, st_.y);
    std::vector<Cell> out;
    for (const Cell c : flagged) {
      if (!grid_.traversable(c)) continue;
      if (chebyshev(c, here) <= cfg_.dilation_radius + 2) continue;
      const auto it = top.find(grid_.labels().index(c.col, c.row));
      if (it == top.end() || it->second - scene_.dem[c] <= cfg_.height_margin) continue;
      out.push_back(c);
    }
    return out;
  }

  bool near_path(std::span<const Cell> found, std::span<const Cell> remaining) const {
    const double reach = cfg_.lookahead_m / gt_.pixel_size;
    for (const Cell a : found)
      for (const Cell b : remaining) {
        const double dc = a.col - b.col, dr = a.row - b.row;
        if (dc * dc + dr * dr <= reach * reach) return true;
      }
    return false;
  }

  bool path_open(std::span<const Cell> cells) const {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!grid_.traversable(cells[i])) return false;
      if (i > 0 && !planner::move_allowed(grid_, cells[i - 1], cells[i])) return false;
    }
    return true;
  }

  void check_position() const {
    const Cell c = gt_.world_to_cell(st_.x, st_.y);
    if (!grid_.traversable(c)) throw ContractViolation("vehicle entered a non-traversable cell");
  }

  // Follows `cells` to its end, sensing and replanning as needed. False on abort.
  bool leg(std::vector<Cell> cells, Phase ph) {
    const Cell target = cells.back();
    Follower f;
    f.capture_radius = cfg_.capture_radius;
    auto load = [&](std::vector<Cell> path) {
      cells = std::move(path);
      f.waypoints.clear();
      for (const Cell c : cells) f.waypoints.push_back(gt_.cell_center(c));
      f.next = 0;
    };
    load(std::move(cells));
    std::vector<Cell>& visited = ph == Phase::outbound ? log_.outbound_waypoints : log_.return_waypoints;

    while (!f.done()) {
      if (now() > cfg_.max_time_s) {
        event(EventKind::abort, 0, 0, "time limit");
        log_.aborted = true;
        return false;
      }
      const std::vector<Cell> found = sense();
      if (!found.empty()) {
        event(EventKind::obstacle_detected, found.size());
        MapUpdate up = update_global_map(grid_, log_.labels, found, cfg_.dilation_radius, cfg_.obstacle_label);
        grid_ = std::move(up.grid);
        log_.labels = std::move(up.labels);
        const std::span<const Cell> remaining(cells.data() + f.next, cells.size() - f.next);
        const bool replan = !path_open(remaining) || (ph == Phase::outbound && near_path(found, remaining));
        if (replan) {
          const Cell from = cells[f.next];
          try {
            planner::Path p = planner::astar(grid_, cfg_.weights, from, target);
            event(EventKind::replanned, 0, p.cells.size(), std::string(phase_name(ph)));
            log_.plans.push_back(p.cells);
            load(std::move(p.cells));
          } catch (const Error& e) {
            event(EventKind::abort, 0, 0, e.what());
            log_.aborted = true;
            return false;
          }
        }
      }
      const FollowStep step = follow_path(st_, f, cfg_.dt);
      for (const std::size_t i : step.reached)
        if (visited.empty() || visited.back() != cells[i]) visited.push_back(cells[i]);
      check_position();
      advance_clock(ph);
    }
    return true;
  }

  void dwell() {
    event(EventKind::dwell_start);
    const std::int64_t ticks = std::llround(cfg_.dwell_s / cfg_.dt);
    for (std::int64_t i = 0; i < ticks; ++i) advance_clock(Phase::dwell);
    event(EventKind::dwell_end);
  }

  const TrueScene& scene_;
  planner::PlanGrid grid_;
  const radiation::DetectorModel& det_;
  std::span<const radiation::RadSource> sources_;
  const MissionConfig& cfg_;
  Rng& rng_;
  GeoTransform gt_;

  MissionLog log_;
  UgvState st_;
  Cell home_;
  Cell goal_;
  WorldPoint goal_w_;
  std::int64_t tick_ = 0;
  std::int64_t measure_index_ = 0;
  double next_measure_ = 0.0;
};

}  // namespace

MissionLog run_mission(const TrueScene& scene, const planner::PlanGrid& grid, WorldPoint start, WorldPoint goal,
                       const radiation::DetectorModel& detector, std::span<const radiation::RadSource> sources,
                       const MissionConfig& config, Rng& rng) {
  config.validate();
  detector.validate();
  for (const RuntimeObstacle& o : scene.obstacles) o.validate();
  if (!scene.dem.same_grid(grid.labels()))
    throw DimensionError("scene DEM and planning grid must share one grid");
  Mission m(scene, grid, detector, sources, config, rng);
  return m.run(start, goal);
}

namespace {

using ojson = nlohmann::ordered_json;

ojson cell_list(std::span<const Cell> cells) {
  ojson a = ojson::array();
  for (const Cell c : cells) a.push_back({c.col, c.row});
  return a;
}

}  // namespace

std::string mission_log_jsonl(const MissionLog& log) {
  struct Line {
    double t;
    int stream;
    std::string text;
  };
  std::vector<Line> lines;
  lines.reserve(log.trajectory.size() + log.counts.size() + log.events.size());
  for (const TrajectorySample& s : log.trajectory) {
    ojson j{{"type", "pose"},    {"t", s.t},
            {"x", s.x},          {"y", s.y},
            {"heading", s.heading}, {"distance_to_goal", s.distance_to_goal},
            {"phase", phase_name(s.phase)}};
    lines.push_back({s.t, 0, j.dump()});
  }
  for (const CountSample& c : log.counts) {
    ojson j{{"type", "counts"}, {"t", c.t},
            {"x", c.x},         {"y", c.y},
            {"distance_to_goal", c.distance_to_goal}, {"counts", c.counts},
            {"phase", phase_name(c.phase)}};
    lines.push_back({c.t, 1, j.dump()});
  }
  for (const Event& e : log.events) {
    ojson j{{"type", "event"}, {"t", e.t}, {"event", event_name(e.kind)}};
    if (e.kind == EventKind::obstacle_detected) j["cells"] = e.cells;
    if (e.kind == EventKind::replanned) j["path_nodes"] = e.path_nodes;
    if (!e.detail.empty()) j["detail"] = e.detail;
    lines.push_back({e.t, 2, j.dump()});
  }
  std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.stream < b.stream;
  });

  std::string out;
  ojson header{{"type", "header"},
               {"schema", kMissionLogSchema},
               {"width", log.labels.width()},
               {"height", log.labels.height()},
               {"pixel_size", log.labels.transform().pixel_size}};
  out += header.dump() + '\n';
  for (std::size_t i = 0; i < log.plans.size(); ++i) {
    ojson j{{"type", "plan"}, {"index", i}, {"cells", cell_list(log.plans[i])}};
    out += j.dump() + '\n';
  }
  for (const Line& l : lines) out += l.text + '\n';
  ojson summary{{"type", "summary"},
                {"aborted", log.aborted},
                {"returned", log.returned},
                {"removed_nodes", std::count(log.removed.cells().begin(), log.removed.cells().end(), 1)},
                {"outbound_waypoints", cell_list(log.outbound_waypoints)},
                {"return_waypoints", cell_list(log.return_waypoints)}};
  out += summary.dump() + '\n';
  return out;
}

void write_mission_log(const MissionLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << mission_log_jsonl(log);
  if (!out) throw IoError("write failed for " + path.string());
}

double counts_distance_correlation(const MissionLog& log) {
  const std::size_t n = log.counts.size();
  if (n < 2) throw UndefinedStatisticError("correlation needs at least two count samples");
  double mx = 0.0, my = 0.0;
  for (const CountSample& c : log.counts) {
    mx += -c.distance_to_goal;
    my += static_cast<double>(c.counts);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (const CountSample& c : log.counts) {
    const double dx = -c.distance_to_goal - mx, dy = static_cast<double>(c.counts) - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedStatisticError("correlation undefined for a constant series");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<RuntimeObstacle> parse_obstacle_script(std::string_view json_text) {
  std::vector<RuntimeObstacle> out;
  try {
    const auto arr = nlohmann::json::parse(json_text);
    if (!arr.is_array()) throw ParseError("obstacle script must be a JSON array");
    for (const auto& j : arr) {
      RuntimeObstacle o;
      const std::string shape = j.at("shape").get<std::string>();
      if (shape == "disc") {
        o.shape = Shape::disc;
        o.radius = j.at("radius").get<double>();
      } else if (shape == "rect") {
        o.shape = Shape::rect;
        o.w = j.at("w").get<double>();
        o.h = j.at("h").get<double>();
      } else {
        throw ParseError("unknown obstacle shape '" + shape + "'");
      }
      o.x = j.at("x").get<double>();
      o.y = j.at("y").get<double>();
      o.height = j.at("height").get<double>();
      o.appears_at = j.value("appears_at", 0.0);
      o.validate();
      out.push_back(o);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad obstacle script: ") + e.what());
  }
  return out;
}

std::vector<RuntimeObstacle> read_obstacle_script(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_obstacle_script(ss.str());
}

void write_obstacle_script(std::span<const RuntimeObstacle> obstacles, const std::filesystem::path& path) {
  ojson arr = ojson::array();
  for (const RuntimeObstacle& o : obstacles) {
    ojson j;
    j["shape"] = o.shape == Shape::disc ? "disc" : "rect";
    j["x"] = o.x;
    j["y"] = o.y;
    if (o.shape == Shape::disc) {
      j["radius"] = o.radius;
    } else {
      j["w"] = o.w;
      j["h"] = o.h;
    }
    j["height"] = o.height;
    j["appears_at"] = o.appears_at;
    arr.push_back(j);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << arr.dump(2) << '\n';
}

}  // namespace radsearch::ugvsim
