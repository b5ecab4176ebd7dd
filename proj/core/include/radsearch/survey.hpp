#pragma once

// Boustrophedon aerial survey planning and simulated data collection.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radsearch/radiation.hpp"
#include "radsearch/rng.hpp"

namespace radsearch::survey {

using radiation::Vec3;

struct Aoi {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;
};

/// Scan lines run parallel to this axis.
enum class Heading { x, y };

struct SurveyPlan {
  Aoi aoi;
  double altitude = 30.0;
  double line_spacing = 4.0;
  double speed = 3.0;
  double sample_hz = 1.0;
  Heading heading = Heading::x;

  void validate() const;
};

struct CameraFootprint {
  double half_fov_along = 0.0;   // radians
  double half_fov_across = 0.0;

  void validate() const;
  double along_length(double altitude) const;
  double across_length(double altitude) const;
};

/// Waypoints at constant altitude: (start, end) per line, alternating direction.
/// Lines are centred across the AOI so both edge margins are equal.
std::vector<Vec3> generate_scanlines(const SurveyPlan& plan);

double path_length(std::span<const Vec3> waypoints);

/// Point at arc length `s` along the polyline (clamped to its ends).
Vec3 point_along(std::span<const Vec3> waypoints, double s);

struct CaptureEvent {
  double t = 0.0;
  Vec3 pos;
};

struct SurveyResult {
  std::vector<radiation::Measurement> measurements;
  std::vector<CaptureEvent> captures;
  std::vector<Vec3> waypoints;
};

/// Flies the plan at constant speed; every 1/sample_hz seconds records one
/// measurement and one image capture. Emits floor(T * sample_hz) + 1 samples.
SurveyResult run_survey(const SurveyPlan& plan, const radiation::DetectorModel& det,
                        std::span<const radiation::RadSource> sources, Rng& rng);

/// 1 - (distance between captures) / (along-track footprint), clamped to [0,1].
double overlap_fraction(const SurveyPlan& plan, const CameraFootprint& cam);

/// Survey scenario: plan, detector and ground truth.
struct Scenario {
  SurveyPlan plan;
  radiation::DetectorModel detector;
  std::vector<radiation::RadSource> sources;
  std::vector<Vec3> source_sites;  // distinct source locations, strongest first
};

inline constexpr double kSourceHeight = 1.0;  // stands for aerial collection

/// Sensitivity solved from the Mission-2 Ho pair: 658 - 593.9 counts/s at 29 m standoff.
double fitted_aerial_sensitivity();

/// All four check sources at one site, background 558.
Scenario mission1_scenario();
/// Ho pair at one site, Ba + Cs at another, background 593.9.
Scenario mission2_scenario();

/// {aoi:[xmin,ymin,xmax,ymax], altitude, line_spacing, speed, sample_hz, heading}; missing keys keep defaults.
SurveyPlan parse_plan_json(std::string_view text);
std::string plan_to_json(const SurveyPlan& plan);
void write_plan_json(const SurveyPlan& plan, const std::filesystem::path& path);
SurveyPlan read_plan_json(const std::filesystem::path& path);
void write_captures_csv(std::span<const CaptureEvent> captures, const std::filesystem::path& path);

}  // namespace radsearch::survey
