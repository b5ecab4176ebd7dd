#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "radsearch/planner.hpp"
#include "radsearch/radiation.hpp"
#include "radsearch/raster_io.hpp"
#include "radsearch/scene.hpp"
#include "radsearch/segmentation.hpp"
#include "radsearch/survey.hpp"
#include "radsearch/ugvsim.hpp"
#include "report.hpp"

namespace radsearch::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

/// Bad or missing configuration (exit 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Mission ended early (exit 3).
class AbortError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Configuration: an optional JSON file, overridden key by key by flags.

json load_config(const std::optional<std::string>& path) {
  if (!path) return json::object();
  std::ifstream in(*path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + *path);
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + *path + ": " + e.what());
  }
}

template <typename T>
void override_key(json& cfg, const char* key, const std::optional<T>& v) {
  if (v) cfg[key] = *v;
}

template <typename T>
T get(const json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

std::uint64_t require_seed(const json& cfg) {
  if (!cfg.contains("seed")) throw ConfigError("a seed is required (--seed or config \"seed\")");
  return get<std::uint64_t>(cfg, "seed", 0);
}

fs::path require_path(const json& cfg, const char* key) {
  if (!cfg.contains(key)) throw ConfigError(std::string("missing required path '") + key + "'");
  fs::path p = get<std::string>(cfg, key, "");
  if (!fs::exists(p)) throw ConfigError(std::string(key) + " does not exist: " + p.string());
  return p;
}

std::optional<fs::path> optional_path(const json& cfg, const char* key) {
  if (!cfg.contains(key)) return std::nullopt;
  return require_path(cfg, key);
}

fs::path output_dir(const json& cfg) {
  fs::path dir = ".";
  if (const char* env = std::getenv("RADSEARCH_OUT"); env && *env) {
    dir = env;
  } else if (cfg.contains("out")) {
    dir = get<std::string>(cfg, "out", ".");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::array<double, 2> parse_xy(const std::string& text, const char* what) {
  std::array<double, 2> v{};
  char comma = 0;
  std::istringstream ss(text);
  if (!(ss >> v[0] >> comma >> v[1]) || comma != ',' || !(ss >> std::ws).eof())
    throw ConfigError(std::string(what) + " must be \"x,y\", got \"" + text + "\"");
  return v;
}

std::array<double, 2> xy_from(const json& cfg, const char* key) {
  const json& j = cfg.at(key);
  if (j.is_string()) return parse_xy(j.get<std::string>(), key);
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(key) + " must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void report_outputs(std::ostream& out, const char* command, const std::vector<fs::path>& files) {
  ojson j{{"command", command}};
  ojson arr = ojson::array();
  for (const fs::path& f : files) arr.push_back(f.generic_string());
  j["outputs"] = arr;
  out << j.dump() << '\n';
}

// ---------------------------------------------------------------------------
// scene-gen

struct SceneGenFlags {
  std::optional<int> width, height, buildings, vehicles, trees;
  std::optional<double> pixel_size, unary_noise;
};

int cmd_scene_gen(json cfg, std::ostream& out) {
  const std::uint64_t seed = require_seed(cfg);
  scene::SceneParams p;
  p.width = get(cfg, "width", p.width);
  p.height = get(cfg, "height", p.height);
  p.pixel_size = get(cfg, "pixel_size", p.pixel_size);
  p.buildings = get(cfg, "buildings", p.buildings);
  p.vehicles = get(cfg, "vehicles", p.vehicles);
  p.trees = get(cfg, "trees", p.trees);
  const fs::path dir = output_dir(cfg);

  Rng rng = make_rng(seed);
  const scene::Scene s = scene::generate_scene(p, rng);
  scene::write_scene(s, p, seed, dir);
  const auto sources = radiation::check_sources({s.source_site.x, s.source_site.y, survey::kSourceHeight});
  radiation::write_sources_json(sources, dir / "sources.json");
  std::vector<fs::path> files{dir / "ortho.ppm", dir / "ortho.geo.json", dir / "dem.asc", dir / "labels.asc",
                              dir / "legend.json", dir / "truth.json", dir / "sources.json"};
  if (cfg.contains("unary_noise")) {
    const double noise = get(cfg, "unary_noise", 0.0);
    const auto unaries = segmentation::synth_unaries(s.labels, noise, segmentation::default_confusers(), rng);
    fs::create_directories(dir / "unaries");
    segmentation::write_unaries(unaries, dir / "unaries");
    files.push_back(dir / "unaries");
  }
  report_outputs(out, "scene-gen", files);
  return kOk;
}

// ---------------------------------------------------------------------------
// survey

int cmd_survey(json cfg, std::ostream& out) {
  const std::uint64_t seed = require_seed(cfg);
  if (cfg.contains("scene_dir")) {
    const fs::path sd = require_path(cfg, "scene_dir");
    for (const char* f : {"dem.asc", "labels.asc"})
      if (!fs::exists(sd / f)) throw ConfigError("scene file missing: " + (sd / f).string());
  }

  survey::Scenario sc;
  bool have_plan = false, have_sources = false;
  sc.detector = radiation::make_detector(radiation::kMission2BackgroundMean, survey::fitted_aerial_sensitivity());
  if (cfg.contains("scenario")) {
    const std::string name = get<std::string>(cfg, "scenario", "");
    if (name == "mission1") {
      sc = survey::mission1_scenario();
    } else if (name == "mission2") {
      sc = survey::mission2_scenario();
    } else {
      throw ConfigError("scenario must be mission1 or mission2");
    }
    have_plan = have_sources = true;
  }
  if (cfg.contains("plan")) {
    const json& pj = cfg.at("plan");
    sc.plan = pj.is_string() ? survey::read_plan_json(require_path(cfg, "plan")) : survey::parse_plan_json(pj.dump());
    have_plan = true;
  }
  if (cfg.contains("sources")) {
    const auto srcs = radiation::read_sources_json(require_path(cfg, "sources"));
    sc.sources = srcs;
    have_sources = true;
  }
  if (!have_plan) throw ConfigError("survey needs --plan or --scenario");
  if (!have_sources) throw ConfigError("survey needs --sources or --scenario");
  if (cfg.contains("background_rate") || cfg.contains("sensitivity_k"))
    sc.detector = radiation::make_detector(get(cfg, "background_rate", sc.detector.background_rate),
                                           get(cfg, "sensitivity_k", sc.detector.sensitivity_k));
  sc.plan.validate();
  const fs::path dir = output_dir(cfg);

  Rng rng = make_rng(seed);
  const survey::SurveyResult flight = survey::run_survey(sc.plan, sc.detector, sc.sources, rng);
  const survey::SurveyResult background = survey::run_survey(sc.plan, sc.detector, {}, rng);
  radiation::write_measurements_csv(flight.measurements, dir / "measurements.csv");
  radiation::write_measurements_csv(background.measurements, dir / "background.csv");
  survey::write_captures_csv(flight.captures, dir / "captures.csv");
  survey::write_plan_json(sc.plan, dir / "plan.json");
  radiation::write_sources_json(sc.sources, dir / "sources.json");
  report_outputs(out, "survey",
                 {dir / "measurements.csv", dir / "background.csv", dir / "captures.csv", dir / "plan.json",
                  dir / "sources.json"});
  return kOk;
}

// ---------------------------------------------------------------------------
// analyze

ojson test_json(const radiation::TTestResult& r) {
  return {{"t_stat", r.t_stat}, {"dof", r.dof}, {"p_value", r.p_value}, {"reject", r.reject}};
}

ojson stats_json(const radiation::SampleStats& s) {
  return {{"n", s.n}, {"mean", s.mean}, {"stddev", s.stddev}};
}

int cmd_analyze(json cfg, std::ostream& out) {
  const auto ms = radiation::read_measurements_csv(require_path(cfg, "measurements"));
  const auto bg = radiation::read_measurements_csv(require_path(cfg, "background"));
  if (ms.size() < 2 || bg.size() < 2) throw EmptyInputError("analysis needs at least 2 samples in each file");
  const double alpha = get(cfg, "alpha", radiation::kSignificance);
  const fs::path dir = output_dir(cfg);

  const auto a = radiation::counts_series(ms);
  const auto b = radiation::counts_series(bg);
  const radiation::Poi poi = radiation::max_counts_poi(ms);
  ojson j;
  j["poi"] = {{"index", poi.index},
              {"t", ms[poi.index].t},
              {"x", poi.position.x},
              {"y", poi.position.y},
              {"z", poi.position.z},
              {"counts", poi.counts}};
  j["source_flight"] = stats_json(radiation::summarize(a));
  j["background_flight"] = stats_json(radiation::summarize(b));
  j["alpha"] = alpha;
  j["welch"] = test_json(radiation::welch_t_test(a, b, alpha));
  if (a.size() == b.size()) j["paired"] = test_json(radiation::paired_t_test(a, b, alpha));
  j["poi_nearest10_median"] =
      radiation::median_nearest_k(ms, poi.position.x, poi.position.y, std::min<std::size_t>(10, ms.size()));
  write_text(dir / "analysis.json", j.dump(2) + '\n');
  report_outputs(out, "analyze", {dir / "analysis.json"});
  return kOk;
}

// ---------------------------------------------------------------------------
// refine

UnaryRaster one_hot(const LabelRaster& labels) {
  UnaryRaster u(labels.width(), labels.height(), Scores{}, labels.transform());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Category c = labels.cells()[i];
    Scores s{};
    if (is_valid_category(code(c))) s[static_cast<std::size_t>(code(c))] = 1.0;
    u.cells()[i] = s;
  }
  return u;
}

int cmd_refine(json cfg, std::ostream& out) {
  const fs::path dem_path = require_path(cfg, "dem");
  const auto unary_dir = optional_path(cfg, "unaries");
  const auto labels_path = optional_path(cfg, "labels");
  if (!unary_dir && !labels_path) throw ConfigError("refine needs --labels or --unaries");
  const auto truth_path = optional_path(cfg, "truth");
  segmentation::RegionParams rp;
  if (cfg.contains("tau")) rp.tau = get(cfg, "tau", 0.0);
  rp.close_iterations = get(cfg, "close_iterations", rp.close_iterations);
  const fs::path dir = output_dir(cfg);

  const ElevationRaster dem = read_ascii_grid(dem_path);
  UnaryRaster unaries;
  LabelRaster base;
  if (unary_dir) {
    unaries = segmentation::read_unaries(*unary_dir);
    base = segmentation::argmax_labels(unaries);
    if (labels_path) base = segmentation::read_labels(*labels_path);
  } else {
    base = segmentation::read_labels(*labels_path);
    unaries = one_hot(base);
  }
  if (base.width() != dem.width() || base.height() != dem.height() || unaries.width() != dem.width() ||
      unaries.height() != dem.height())
    throw DimensionError("labels, unaries and DEM must have identical dimensions");

  const auto regions = segmentation::detect_obstacle_regions(dem, rp);
  const LabelRaster refined = segmentation::refine_with_dem(base, unaries, regions);
  segmentation::write_labels(base, dir / "labels_2d.asc");
  segmentation::write_labels(refined, dir / "labels_refined.asc");
  write_ascii_grid_int(regions.ids, dir / "regions.asc");
  segmentation::write_legend_json(dir / "legend.json");
  std::vector<fs::path> files{dir / "labels_2d.asc", dir / "labels_refined.asc", dir / "regions.asc",
                              dir / "legend.json"};
  if (truth_path) {
    const LabelRaster truth = segmentation::read_labels(*truth_path);
    ojson j;
    j["tau"] = regions.tau;
    j["regions"] = regions.regions.size();
    j["baseline"] = ojson::parse(segmentation::metrics_to_json(segmentation::precision_recall(base, truth)));
    j["refined"] = ojson::parse(segmentation::metrics_to_json(segmentation::precision_recall(refined, truth)));
    write_text(dir / "metrics.json", j.dump(2) + '\n');
    files.push_back(dir / "metrics.json");
  }
  report_outputs(out, "refine", files);
  return kOk;
}

// ---------------------------------------------------------------------------
// plan

std::vector<Cell> obstacle_cells_on(const GeoTransform& gt, int width, int height,
                                    std::span<const ugvsim::RuntimeObstacle> obstacles) {
  std::vector<Cell> cells;
  for (int row = 0; row < height; ++row)
    for (int col = 0; col < width; ++col) {
      const WorldPoint p = gt.cell_center({col, row});
      for (const auto& o : obstacles)
        if (o.contains(p.x, p.y)) {
          cells.push_back({col, row});
          break;
        }
    }
  return cells;
}

int cmd_plan(json cfg, std::ostream& out) {
  json req = json::object();
  fs::path base_dir;
  if (cfg.contains("request")) {
    const fs::path rp = require_path(cfg, "request");
    req = read_json_file(rp);
    base_dir = rp.parent_path();
  }
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return (path.is_relative() && !base_dir.empty()) ? (base_dir / path).string() : p;
  };
  if (req.contains("labels_path")) req["labels_path"] = resolve(req["labels_path"].get<std::string>());
  if (req.contains("dem_path")) req["dem_path"] = resolve(req["dem_path"].get<std::string>());
  if (cfg.contains("labels")) req["labels_path"] = get<std::string>(cfg, "labels", "");
  if (cfg.contains("dem")) req["dem_path"] = get<std::string>(cfg, "dem", "");
  for (const char* k : {"start", "goal"})
    if (cfg.contains(k)) {
      const auto v = xy_from(cfg, k);
      req[k] = {v[0], v[1]};
    }
  for (const char* k : {"weights", "base_step", "heuristic", "dilation_radius"})
    if (cfg.contains(k)) req[k] = cfg.at(k);
  if (!req.contains("labels_path")) throw ConfigError("plan needs labels (--labels or request labels_path)");
  if (!req.contains("start") || !req.contains("goal")) throw ConfigError("plan needs start and goal");

  planner::PlanRequest pr;
  try {
    pr = planner::parse_plan_request(req.dump());
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  if (!fs::exists(pr.labels_path)) throw ConfigError("labels do not exist: " + pr.labels_path.string());
  if (!pr.dem_path.empty() && !fs::exists(pr.dem_path))
    throw ConfigError("DEM does not exist: " + pr.dem_path.string());
  const auto obstacles_path = optional_path(cfg, "obstacles");
  const fs::path dir = output_dir(cfg);

  const LabelRaster labels = segmentation::read_labels(pr.labels_path);
  ElevationRaster dem;
  if (!pr.dem_path.empty()) dem = read_ascii_grid(pr.dem_path);
  planner::PlanGrid grid(labels, dem);
  if (obstacles_path) {
    const auto obs = ugvsim::read_obstacle_script(*obstacles_path);
    const auto cells = obstacle_cells_on(labels.transform(), labels.width(), labels.height(), obs);
    grid = planner::remove_obstacle_nodes(grid, cells, pr.dilation_radius).grid;
  }
  const GeoTransform& gt = labels.transform();
  const Cell s = gt.world_to_cell(pr.start[0], pr.start[1]);
  const Cell g = gt.world_to_cell(pr.goal[0], pr.goal[1]);
  const planner::Path path = planner::astar(grid, pr.weights, s, g, pr.search);
  write_text(dir / "path.json", planner::path_to_json(path, gt) + '\n');
  report_outputs(out, "plan", {dir / "path.json"});
  return kOk;
}

// ---------------------------------------------------------------------------
// sim

std::optional<Cell> nearest_traversable(const planner::PlanGrid& grid, Cell c, int max_radius) {
  if (grid.traversable(c)) return c;
  std::optional<Cell> best;
  long best_d = 0;
  for (int r = 1; r <= max_radius && !best; ++r)
    for (int dr = -r; dr <= r; ++dr)
      for (int dc = -r; dc <= r; ++dc) {
        if (std::max(std::abs(dr), std::abs(dc)) != r) continue;
        const Cell n{c.col + dc, c.row + dr};
        if (!grid.traversable(n)) continue;
        const long d = static_cast<long>(dc) * dc + static_cast<long>(dr) * dr;
        if (!best || d < best_d || (d == best_d && (n.row < best->row || (n.row == best->row && n.col < best->col)))) {
          best = n;
          best_d = d;
        }
      }
  return best;
}

struct SimInputs {
  ugvsim::TrueScene scene;
  planner::PlanGrid grid;
  std::vector<radiation::RadSource> sources;
  radiation::DetectorModel detector;
  ugvsim::MissionConfig mission;
  WorldPoint start;
  WorldPoint goal;
  bool goal_snapped = false;
};

ugvsim::MissionConfig mission_config(const json& cfg) {
  ugvsim::MissionConfig m;
  const json u = cfg.contains("ugv") ? cfg.at("ugv") : json::object();
  m.dt = get(u, "dt", m.dt);
  m.speed = get(u, "speed", m.speed);
  m.capture_radius = get(u, "capture_radius", m.capture_radius);
  m.lidar_range_m = get(u, "lidar_range_m", m.lidar_range_m);
  m.lidar_rays = get(u, "lidar_rays", m.lidar_rays);
  m.grad_tau = get(u, "grad_tau", m.grad_tau);
  m.height_margin = get(u, "height_margin", m.height_margin);
  m.dilation_radius = get(u, "dilation_radius", m.dilation_radius);
  m.lookahead_m = get(u, "lookahead_m", m.lookahead_m);
  m.dwell_s = get(u, "dwell_s", m.dwell_s);
  m.detector_height_m = get(u, "detector_height_m", m.detector_height_m);
  m.max_time_s = get(u, "max_time_s", m.max_time_s);
  if (cfg.contains("weights")) {
    const json& w = cfg.at("weights");
    if (!w.is_array() || w.size() != 3) throw ConfigError("weights must have 3 entries");
    m.weights.w = {w[0].get<double>(), w[1].get<double>(), w[2].get<double>()};
  }
  m.weights.base_step = get(cfg, "base_step", m.weights.base_step);
  try {
    m.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  return m;
}

SimInputs load_sim_inputs(const json& cfg) {
  SimInputs in;
  std::optional<fs::path> scene_dir = optional_path(cfg, "scene_dir");
  auto scene_file = [&](const char* key, const char* name) -> fs::path {
    if (cfg.contains(key)) return require_path(cfg, key);
    if (!scene_dir) throw ConfigError(std::string("sim needs --scene or --") + key);
    const fs::path p = *scene_dir / name;
    if (!fs::exists(p)) throw ConfigError("scene file missing: " + p.string());
    return p;
  };
  const fs::path labels_path = scene_file("labels", "labels.asc");
  const fs::path dem_path = scene_file("dem", "dem.asc");
  const fs::path sources_path = scene_file("sources", "sources.json");
  const auto obstacles_path = optional_path(cfg, "obstacles");
  const auto analysis_path = optional_path(cfg, "analysis");
  in.mission = mission_config(cfg);

  std::optional<json> truth;
  if (scene_dir && fs::exists(*scene_dir / "truth.json")) truth = read_json_file(*scene_dir / "truth.json");

  in.scene.labels = segmentation::read_labels(labels_path);
  in.scene.dem = read_ascii_grid(dem_path);
  if (!in.scene.dem.same_grid(in.scene.labels)) throw DimensionError("labels and DEM must share one grid");
  if (obstacles_path) in.scene.obstacles = ugvsim::read_obstacle_script(*obstacles_path);
  in.sources = radiation::read_sources_json(sources_path);
  const double aerial_k = get(cfg, "sensitivity_k", survey::fitted_aerial_sensitivity());
  in.detector = radiation::ground_detector(aerial_k);
  in.grid = planner::PlanGrid(in.scene.labels, in.scene.dem);

  if (cfg.contains("start")) {
    const auto v = xy_from(cfg, "start");
    in.start = {v[0], v[1]};
  } else if (truth && truth->contains("start")) {
    in.start = {truth->at("start")[0].get<double>(), truth->at("start")[1].get<double>()};
  } else {
    throw ConfigError("sim needs a start (--start or scene truth.json)");
  }
  if (cfg.contains("goal")) {
    const auto v = xy_from(cfg, "goal");
    in.goal = {v[0], v[1]};
  } else if (analysis_path) {
    const json a = read_json_file(*analysis_path);
    in.goal = {a.at("poi").at("x").get<double>(), a.at("poi").at("y").get<double>()};
  } else {
    throw ConfigError("sim needs a goal (--goal or --analysis)");
  }

  // The POI is a flight position; snap it to the nearest open ground within 10 m.
  const GeoTransform& gt = in.grid.transform();
  const Cell gc = gt.world_to_cell(in.goal.x, in.goal.y);
  const int reach = static_cast<int>(std::ceil(10.0 / gt.pixel_size));
  const auto snapped = nearest_traversable(in.grid, gc, reach);
  if (!snapped) throw EndpointError("POI has no traversable cell within 10 m");
  if (*snapped != gc) {
    in.goal = gt.cell_center(*snapped);
    in.goal_snapped = true;
  }
  return in;
}

struct SimOutcome {
  std::uint64_t seed = 0;
  bool aborted = false;
  bool returned = false;
  std::size_t replans = 0;
  std::size_t detections = 0;
  std::optional<double> correlation;
  double duration_s = 0.0;
  std::string error;
};

SimOutcome simulate_one(const SimInputs& in, std::uint64_t seed, const fs::path& dir) {
  SimOutcome r;
  r.seed = seed;
  Rng rng = make_rng(seed);
  ugvsim::MissionLog log;
  try {
    log = ugvsim::run_mission(in.scene, in.grid, in.start, in.goal, in.detector, in.sources, in.mission, rng);
  } catch (const NoPathError& e) {
    r.aborted = true;
    r.error = e.what();
  } catch (const EndpointError& e) {
    r.aborted = true;
    r.error = e.what();
  }
  fs::create_directories(dir);
  if (!r.error.empty()) {
    write_text(dir / "summary.json", ojson{{"seed", seed}, {"aborted", true}, {"error", r.error}}.dump(2) + '\n');
    return r;
  }
  ugvsim::write_mission_log(log, dir / "mission.jsonl");
  write_ascii_grid(log.dem.exported(kDefaultNodata), dir / "global_dem.asc");
  segmentation::write_labels(log.labels, dir / "labels_final.asc");
  r.aborted = log.aborted;
  r.returned = log.returned;
  for (const auto& e : log.events) {
    r.replans += e.kind == ugvsim::EventKind::replanned;
    r.detections += e.kind == ugvsim::EventKind::obstacle_detected;
  }
  try {
    r.correlation = ugvsim::counts_distance_correlation(log);
  } catch (const UndefinedStatisticError&) {
  }
  r.duration_s = log.trajectory.empty() ? 0.0 : log.trajectory.back().t;
  ojson s{{"seed", seed},
          {"aborted", r.aborted},
          {"returned", r.returned},
          {"replans", r.replans},
          {"obstacle_detections", r.detections},
          {"duration_s", r.duration_s},
          {"goal", {in.goal.x, in.goal.y}},
          {"goal_snapped", in.goal_snapped}};
  s["counts_distance_correlation"] = r.correlation ? ojson(*r.correlation) : ojson(nullptr);
  write_text(dir / "summary.json", s.dump(2) + '\n');
  return r;
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) throw std::invalid_argument("no ..");
    std::size_t used = 0;
    const std::uint64_t a = std::stoull(text.substr(0, dots), &used);
    if (used != dots) throw std::invalid_argument("trailing");
    const std::string rest = text.substr(dots + 2);
    const std::uint64_t b = std::stoull(rest, &used);
    if (used != rest.size() || b < a) throw std::invalid_argument("order");
    return {a, b};
  } catch (const std::exception&) {
    throw ConfigError("--seeds must be \"a..b\" with a <= b, got \"" + text + "\"");
  }
}

int cmd_sim(json cfg, std::ostream& out) {
  std::vector<std::uint64_t> seeds;
  if (cfg.contains("seeds")) {
    const auto [a, b] = parse_seed_range(get<std::string>(cfg, "seeds", ""));
    for (std::uint64_t s = a; s <= b; ++s) seeds.push_back(s);
  } else {
    seeds.push_back(require_seed(cfg));
  }
  const SimInputs in = load_sim_inputs(cfg);
  const fs::path dir = output_dir(cfg);

  std::vector<SimOutcome> outcomes(seeds.size());
  if (seeds.size() == 1 && !cfg.contains("seeds")) {
    outcomes[0] = simulate_one(in, seeds[0], dir);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr failure;
    const unsigned workers =
        std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), static_cast<unsigned>(seeds.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
          try {
            outcomes[i] = simulate_one(in, seeds[i], dir / ("seed_" + std::to_string(seeds[i])));
          } catch (...) {
            std::lock_guard lock(err_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    ojson agg = ojson::array();
    for (const SimOutcome& o : outcomes) {
      ojson j{{"seed", o.seed}, {"aborted", o.aborted}, {"returned", o.returned}, {"replans", o.replans}};
      j["counts_distance_correlation"] = o.correlation ? ojson(*o.correlation) : ojson(nullptr);
      agg.push_back(j);
    }
    write_text(dir / "summary.json", agg.dump(2) + '\n');
  }
  report_outputs(out, "sim", {dir});
  const bool any_abort = std::any_of(outcomes.begin(), outcomes.end(), [](const SimOutcome& o) { return o.aborted; });
  if (any_abort) {
    for (const SimOutcome& o : outcomes)
      if (o.aborted) throw AbortError("mission aborted for seed " + std::to_string(o.seed) +
                                      (o.error.empty() ? std::string() : ": " + o.error));
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// report

struct MissionReplay {
  report::TimeSeries series;
  std::vector<std::vector<Cell>> plans;
  std::vector<Cell> trail;
};

MissionReplay read_mission_jsonl(const fs::path& path, const GeoTransform* gt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  MissionReplay r;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad mission log line: ") + e.what(), lineno);
    }
    const std::string type = j.value("type", "");
    if (type == "header") {
      if (j.value("schema", "") != ugvsim::kMissionLogSchema)
        throw ParseError("unsupported mission log schema", lineno);
      header = true;
    } else if (type == "counts") {
      r.series.t.push_back(j.at("t").get<double>());
      r.series.counts.push_back(j.at("counts").get<double>());
      r.series.distance.push_back(j.at("distance_to_goal").get<double>());
    } else if (type == "plan") {
      std::vector<Cell> cells;
      for (const auto& c : j.at("cells")) cells.push_back({c[0].get<int>(), c[1].get<int>()});
      r.plans.push_back(std::move(cells));
    } else if (type == "pose" && gt) {
      const Cell c = gt->world_to_cell(j.at("x").get<double>(), j.at("y").get<double>());
      if (r.trail.empty() || r.trail.back() != c) r.trail.push_back(c);
    }
  }
  if (!header) throw ParseError("mission log has no header line", 1);
  return r;
}

int cmd_report(json cfg, std::ostream& out) {
  const auto ms_path = optional_path(cfg, "measurements");
  const auto mission_path = optional_path(cfg, "mission");
  const auto labels_path = optional_path(cfg, "labels");
  const auto path_path = optional_path(cfg, "path");
  if (!ms_path && !mission_path && !path_path) throw ConfigError("report needs --measurements, --mission or --path");
  if ((path_path || (mission_path && labels_path)) && !labels_path)
    throw ConfigError("path overlays need --labels");
  const double bin_width = get(cfg, "bin_width", 10.0);
  if (!(bin_width > 0.0)) throw ConfigError("bin width must be positive");
  const fs::path dir = output_dir(cfg);
  std::vector<fs::path> files;

  if (ms_path) {
    const auto ms = radiation::read_measurements_csv(*ms_path);
    const auto bins = radiation::counts_histogram(ms, bin_width);
    write_text(dir / "counts_histogram.svg", report::histogram_svg(bins, "Counts per second"));
    files.push_back(dir / "counts_histogram.svg");
  }
  std::optional<LabelRaster> labels;
  if (labels_path) labels = segmentation::read_labels(*labels_path);
  report::Overlay overlay;
  if (mission_path) {
    MissionReplay replay = read_mission_jsonl(*mission_path, labels ? &labels->transform() : nullptr);
    write_text(dir / "counts_time.svg", report::counts_time_svg(replay.series, "Counts and distance to goal"));
    files.push_back(dir / "counts_time.svg");
    if (!replay.plans.empty() && !replay.plans.front().empty()) {
      overlay.start = replay.plans.front().front();
      overlay.goal = replay.plans.front().back();
    }
    overlay.paths.push_back(std::move(replay.trail));
  }
  if (path_path) {
    const json pj = read_json_file(*path_path);
    std::vector<Cell> cells;
    try {
      for (const auto& c : pj.at("pixels")) cells.push_back({c[0].get<int>(), c[1].get<int>()});
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad path file: ") + e.what());
    }
    if (!cells.empty()) {
      overlay.start = cells.front();
      overlay.goal = cells.back();
    }
    overlay.paths.push_back(std::move(cells));
  }
  if (labels && !overlay.paths.empty()) {
    write_ppm(report::path_overlay(*labels, overlay), dir / "path_overlay.ppm");
    files.push_back(dir / "path_overlay.ppm");
  }
  report_outputs(out, "report", files);
  return kOk;
}

// ---------------------------------------------------------------------------

void print_error(std::ostream& err, const char* kind, const std::string& message, int code) {
  err << ojson{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radiation search simulator and planner"};
  app.require_subcommand(0, 1);
  bool version = false;
  app.add_flag("--version", version, "Print version and file schema versions");

  std::optional<std::string> config, out_dir;
  std::optional<std::uint64_t> seed;
  auto common = [&](CLI::App* sub, bool seeded) {
    sub->add_option("--config", config, "JSON config; flags override its keys");
    sub->add_option("--out", out_dir, "Output directory (RADSEARCH_OUT wins)");
    if (seeded) sub->add_option("--seed", seed, "RNG seed");
  };

  // scene-gen
  SceneGenFlags sg;
  CLI::App* scene_gen = app.add_subcommand("scene-gen", "Generate a synthetic test area");
  common(scene_gen, true);
  scene_gen->add_option("--width", sg.width, "Width in pixels");
  scene_gen->add_option("--height", sg.height, "Height in pixels");
  scene_gen->add_option("--pixel-size", sg.pixel_size, "Metres per pixel");
  scene_gen->add_option("--buildings", sg.buildings);
  scene_gen->add_option("--vehicles", sg.vehicles);
  scene_gen->add_option("--trees", sg.trees);
  scene_gen->add_option("--unary-noise", sg.unary_noise, "Also write synthetic unaries at this noise level");

  // survey
  std::optional<std::string> plan_file, scenario, sources, scene_dir;
  std::optional<double> bg_rate, sens_k;
  CLI::App* survey_cmd = app.add_subcommand("survey", "Fly the aerial survey and record measurements");
  common(survey_cmd, true);
  survey_cmd->add_option("--plan", plan_file, "Survey plan JSON");
  survey_cmd->add_option("--scenario", scenario, "mission1 | mission2");
  survey_cmd->add_option("--sources", sources, "Sources JSON");
  survey_cmd->add_option("--scene", scene_dir, "Scene directory (checked for dem.asc, labels.asc)");
  survey_cmd->add_option("--background-rate", bg_rate, "Detector background counts/s");
  survey_cmd->add_option("--k", sens_k, "Detector sensitivity counts*m^2/(uCi*s)");

  // analyze
  std::optional<std::string> measurements, background;
  std::optional<double> alpha;
  CLI::App* analyze = app.add_subcommand("analyze", "POI and t-tests from survey measurements");
  common(analyze, false);
  analyze->add_option("--measurements", measurements, "Survey measurements CSV");
  analyze->add_option("--background", background, "Background flight CSV");
  analyze->add_option("--alpha", alpha, "Significance level");

  // refine
  std::optional<std::string> labels, unaries, dem, truth;
  std::optional<double> tau;
  std::optional<int> close_iterations;
  CLI::App* refine = app.add_subcommand("refine", "DEM-based refinement of a label raster");
  common(refine, false);
  refine->add_option("--labels", labels, "2D label raster (.asc)");
  refine->add_option("--unaries", unaries, "Directory with unary_c0..5.asc");
  refine->add_option("--dem", dem, "DEM (.asc)");
  refine->add_option("--truth", truth, "Ground-truth labels for metrics");
  refine->add_option("--tau", tau, "Gradient threshold (default mean + 2 sigma)");
  refine->add_option("--close-iterations", close_iterations);

  // plan
  std::optional<std::string> request, start, goal, weights, heuristic, obstacles;
  std::optional<int> dilation;
  CLI::App* plan = app.add_subcommand("plan", "Plan a path over a label raster");
  common(plan, false);
  plan->add_option("--request", request, "Plan request JSON");
  plan->add_option("--labels", labels, "Label raster (.asc)");
  plan->add_option("--dem", dem, "DEM (.asc)");
  plan->add_option("--start", start, "x,y in metres");
  plan->add_option("--goal", goal, "x,y in metres");
  plan->add_option("--weights", weights, "w1,w2,w3");
  plan->add_option("--heuristic", heuristic, "euclidean | zero");
  plan->add_option("--dilation", dilation, "Dilation radius for --obstacles, pixels");
  plan->add_option("--obstacles", obstacles, "Obstacle script whose cells are removed");

  // sim
  std::optional<std::string> seeds, analysis;
  std::optional<double> speed, dwell, lookahead;
  CLI::App* sim = app.add_subcommand("sim", "Run the UGV mission");
  common(sim, true);
  sim->add_option("--seeds", seeds, "Seed range a..b, one mission per seed");
  sim->add_option("--scene", scene_dir, "Scene directory");
  sim->add_option("--labels", labels, "Label raster (overrides the scene's)");
  sim->add_option("--dem", dem, "DEM (overrides the scene's)");
  sim->add_option("--sources", sources, "Sources JSON (overrides the scene's)");
  sim->add_option("--obstacles", obstacles, "Runtime obstacle script");
  sim->add_option("--analysis", analysis, "analysis.json whose POI is the goal");
  sim->add_option("--start", start, "x,y in metres");
  sim->add_option("--goal", goal, "x,y in metres");
  sim->add_option("--k", sens_k, "Aerial sensitivity the ground detector is scaled from");
  sim->add_option("--speed", speed, "m/s");
  sim->add_option("--dwell", dwell, "Dwell seconds");
  sim->add_option("--lookahead", lookahead, "Replan lookahead, metres");
  sim->add_option("--dilation", dilation, "Obstacle dilation radius, pixels");

  // report
  std::optional<std::string> mission, path_file;
  std::optional<double> bin_width;
  CLI::App* report_cmd = app.add_subcommand("report", "SVG charts and PPM path overlays");
  common(report_cmd, false);
  report_cmd->add_option("--measurements", measurements, "Measurements CSV -> counts histogram");
  report_cmd->add_option("--bin-width", bin_width, "Histogram bin width");
  report_cmd->add_option("--mission", mission, "mission.jsonl -> counts/distance chart");
  report_cmd->add_option("--labels", labels, "Label raster for overlays");
  report_cmd->add_option("--path", path_file, "path.json to overlay");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what(), kConfigError);
    return kConfigError;
  }

  if (version) {
    out << "radsearch " << kVersion << '\n'
        << "missionlog " << ugvsim::kMissionLogSchema << '\n'
        << "measurements csv t,x,y,z,counts,c0..c" << radiation::kChannels - 1 << '\n';
    return kOk;
  }
  if (app.get_subcommands().empty()) {
    out << app.help();
    return kConfigError;
  }

  try {
    json cfg = load_config(config);
    override_key(cfg, "out", out_dir);
    override_key(cfg, "seed", seed);
    override_key(cfg, "width", sg.width);
    override_key(cfg, "height", sg.height);
    override_key(cfg, "pixel_size", sg.pixel_size);
    override_key(cfg, "buildings", sg.buildings);
    override_key(cfg, "vehicles", sg.vehicles);
    override_key(cfg, "trees", sg.trees);
    override_key(cfg, "unary_noise", sg.unary_noise);
    override_key(cfg, "plan", plan_file);
    override_key(cfg, "scenario", scenario);
    override_key(cfg, "sources", sources);
    override_key(cfg, "scene_dir", scene_dir);
    override_key(cfg, "background_rate", bg_rate);
    override_key(cfg, "sensitivity_k", sens_k);
    override_key(cfg, "measurements", measurements);
    override_key(cfg, "background", background);
    override_key(cfg, "alpha", alpha);
    override_key(cfg, "labels", labels);
    override_key(cfg, "unaries", unaries);
    override_key(cfg, "dem", dem);
    override_key(cfg, "truth", truth);
    override_key(cfg, "tau", tau);
    override_key(cfg, "close_iterations", close_iterations);
    override_key(cfg, "request", request);
    override_key(cfg, "start", start);
    override_key(cfg, "goal", goal);
    override_key(cfg, "heuristic", heuristic);
    override_key(cfg, "obstacles", obstacles);
    override_key(cfg, "seeds", seeds);
    override_key(cfg, "analysis", analysis);
    override_key(cfg, "mission", mission);
    override_key(cfg, "path", path_file);
    override_key(cfg, "bin_width", bin_width);
    if (weights) {
      std::vector<double> w;
      std::stringstream ss(*weights);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        try {
          w.push_back(std::stod(tok));
        } catch (const std::exception&) {
          throw ConfigError("--weights must be three comma-separated numbers");
        }
      }
      if (w.size() != 3) throw ConfigError("--weights must be three comma-separated numbers");
      cfg["weights"] = w;
    }
    if (dilation) {
      cfg["dilation_radius"] = *dilation;
      cfg["ugv"]["dilation_radius"] = *dilation;
    }
    if (speed) cfg["ugv"]["speed"] = *speed;
    if (dwell) cfg["ugv"]["dwell_s"] = *dwell;
    if (lookahead) cfg["ugv"]["lookahead_m"] = *lookahead;

    if (scene_gen->parsed()) return cmd_scene_gen(std::move(cfg), out);
    if (survey_cmd->parsed()) return cmd_survey(std::move(cfg), out);
    if (analyze->parsed()) return cmd_analyze(std::move(cfg), out);
    if (refine->parsed()) return cmd_refine(std::move(cfg), out);
    if (plan->parsed()) return cmd_plan(std::move(cfg), out);
    if (sim->parsed()) return cmd_sim(std::move(cfg), out);
    if (report_cmd->parsed()) return cmd_report(std::move(cfg), out);
  } catch (const ConfigError& e) {
    print_error(err, "config", e.what(), kConfigError);
    return kConfigError;
  } catch (const ParameterError& e) {
    print_error(err, "parameter", e.what(), kConfigError);
    return kConfigError;
  } catch (const NoPathError& e) {
    print_error(err, "no_path", e.what(), kNoPath);
    return kNoPath;
  } catch (const EndpointError& e) {
    print_error(err, "endpoint", e.what(), kNoPath);
    return kNoPath;
  } catch (const AbortError& e) {
    print_error(err, "abort", e.what(), kNoPath);
    return kNoPath;
  } catch (const ParseError& e) {
    print_error(err, "format", e.what(), kIoError);
    return kIoError;
  } catch (const Error& e) {
    print_error(err, "io", e.what(), kIoError);
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    print_error(err, "io", e.what(), kIoError);
    return kIoError;
  }
  return kConfigError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace radsearch::cli
