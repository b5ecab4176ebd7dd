#pragma once

// Ground-vehicle mission: follow the planned path, scan the true scene with a
// height-sampling LiDAR, detect new obstacles from elevation gradients, patch the
// global map and replan, dwell at the goal, then retrace the way back.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radsearch/geo.hpp"
#include "radsearch/planner.hpp"
#include "radsearch/radiation.hpp"
#include "radsearch/rng.hpp"
#include "radsearch/segmentation.hpp"

namespace radsearch::ugvsim {

inline constexpr double kMaxSpeed = 4.5;  // m/s, "up to 10 mph"

enum class Shape { disc, rect };

/// An obstacle that was not in the aerial survey.
struct RuntimeObstacle {
  Shape shape = Shape::disc;
  double x = 0.0;  // centre, metres
  double y = 0.0;
  double radius = 0.0;  // disc
  double w = 0.0;       // rect full extents
  double h = 0.0;
  double height = 1.0;
  double appears_at = 0.0;  // seconds since mission start

  bool contains(double px, double py) const;
  void validate() const;
};

struct TrueScene {
  ElevationRaster dem;  // as surveyed
  LabelRaster labels;
  std::vector<RuntimeObstacle> obstacles;

  /// Ground height of the nearest DEM cell, raised to the tallest obstacle
  /// present at time `t`. Throws BoundsError outside the raster.
  double height_at(double x, double y, double t) const;
  /// Cells whose centres lie inside any obstacle, regardless of appearance time.
  std::vector<Cell> obstacle_cells() const;
};

struct UgvState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, counter-clockwise from +x
  double speed = 0.0;

  void validate() const;
};

/// Point-mass path follower. `next` indexes the waypoint being approached.
struct Follower {
  std::vector<WorldPoint> waypoints;
  std::size_t next = 0;
  double capture_radius = 0.5;

  bool done() const noexcept { return next >= waypoints.size(); }
};

struct FollowStep {
  double travelled = 0.0;
  std::vector<std::size_t> reached;  // waypoint indices reached this step
};

/// Advances `state` along the polyline by speed * dt. Intermediate waypoints
/// are passed through exactly; the last one counts as reached once within the
/// capture radius.
FollowStep follow_path(UgvState& state, Follower& follower, double dt);

struct ScanPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// One sample per pixel step along each of `n_rays` azimuths out to `range_m`;
/// samples leaving the raster are dropped. Points are in the world frame.
std::vector<ScanPoint> lidar_scan(const TrueScene& scene, const UgvState& pose, double t, double range_m,
                                  int n_rays);

/// Rasterises the scan onto `frame` (max height per cell), flags cells whose
/// gradient magnitude exceeds `grad_tau` and adds cells they enclose. Cells are
/// in `frame` coordinates, sorted, and may fall outside any particular raster.
std::vector<Cell> detect_obstacles(std::span<const ScanPoint> scan, const GeoTransform& frame, double grad_tau);

struct MapUpdate {
  planner::PlanGrid grid;
  LabelRaster labels;
  std::size_t clipped = 0;
};

/// Marks the dilated cells with `label` and removes them from the planning grid.
MapUpdate update_global_map(const planner::PlanGrid& grid, const LabelRaster& labels, std::span<const Cell> cells,
                            int dilation_radius, Category label = Category::vehicle);

/// Running per-cell sum and count of observed heights.
class DemAccumulator {
 public:
  DemAccumulator() = default;
  DemAccumulator(int width, int height, GeoTransform frame);

  /// Points outside the grid are ignored.
  void add(std::span<const ScanPoint> points);
  void add(double x, double y, double z);
  /// sum / count; never-observed cells hold the nodata value.
  ElevationRaster exported(double nodata = -9999.0) const;

  const Raster<double>& sum() const noexcept { return sum_; }
  const Raster<std::uint32_t>& count() const noexcept { return count_; }

 private:
  Raster<double> sum_;
  Raster<std::uint32_t> count_;
};

struct MissionConfig {
  double dt = 0.1;
  double speed = 2.0;
  double capture_radius = 0.5;
  double lidar_range_m = 15.0;
  int lidar_rays = 360;
  double grad_tau = 0.5;        // m/m
  double height_margin = 0.25;  // observed - surveyed height for a new obstacle
  int dilation_radius = 2;
  double lookahead_m = 10.0;
  double dwell_s = 180.0;
  double measure_interval_s = 1.0;
  double detector_height_m = 0.5;
  double max_time_s = 3600.0;
  Category obstacle_label = Category::vehicle;
  planner::CostWeights weights;

  void validate() const;
};

enum class Phase { outbound, dwell, inbound };
std::string_view phase_name(Phase p);

enum class EventKind { obstacle_detected, replanned, dwell_start, dwell_end, returned, abort };
std::string_view event_name(EventKind k);

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double distance_to_goal = 0.0;
  Phase phase = Phase::outbound;
};

struct CountSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double distance_to_goal = 0.0;
  std::int64_t counts = 0;
  Phase phase = Phase::outbound;
};

struct Event {
  double t = 0.0;
  EventKind kind = EventKind::obstacle_detected;
  std::size_t cells = 0;       // obstacle_detected: new cells
  std::size_t path_nodes = 0;  // replanned: length of the new path
  std::string detail;
};

struct MissionLog {
  std::vector<TrajectorySample> trajectory;
  std::vector<CountSample> counts;
  std::vector<radiation::Measurement> measurements;
  std::vector<Event> events;
  std::vector<std::vector<Cell>> plans;  // initial plan, then every replan
  std::vector<Cell> outbound_waypoints;  // cells actually reached, in order
  std::vector<Cell> return_waypoints;
  DemAccumulator dem;
  LabelRaster labels;  // global labels after all updates
  Mask removed;        // planner nodes removed during the mission
  bool aborted = false;
  bool returned = false;
};

/// Runs the whole mission. The initial plan failing throws NoPathError; a
/// failed replan ends the mission with an abort event.
MissionLog run_mission(const TrueScene& scene, const planner::PlanGrid& grid, WorldPoint start, WorldPoint goal,
                       const radiation::DetectorModel& detector, std::span<const radiation::RadSource> sources,
                       const MissionConfig& config, Rng& rng);

inline constexpr std::string_view kMissionLogSchema = "radsearch.missionlog/1";

void write_mission_log(const MissionLog& log, const std::filesystem::path& path);
std::string mission_log_jsonl(const MissionLog& log);

/// Pearson correlation of counts with negated distance to goal.
double counts_distance_correlation(const MissionLog& log);

std::vector<RuntimeObstacle> parse_obstacle_script(std::string_view json_text);
std::vector<RuntimeObstacle> read_obstacle_script(const std::filesystem::path& path);
void write_obstacle_script(std::span<const RuntimeObstacle> obstacles, const std::filesystem::path& path);

}  // namespace radsearch::ugvsim
