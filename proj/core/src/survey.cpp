#include "radsearch/survey.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace radsearch::survey {
namespace {

double dist(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

}  // namespace

void SurveyPlan::validate() const {
  if (!(aoi.xmax >= aoi.xmin) || !(aoi.ymax >= aoi.ymin))
    throw ParameterError("aoi max corner must not be below min corner");
  if (aoi.xmax == aoi.xmin && aoi.ymax == aoi.ymin) throw ParameterError("aoi is empty");
  if (!(line_spacing > 0.0)) throw ParameterError("line_spacing must be positive");
  if (!(speed > 0.0)) throw ParameterError("speed must be positive");
  if (!(altitude > 0.0)) throw ParameterError("altitude must be positive");
  if (!(sample_hz > 0.0)) throw ParameterError("sample_hz must be positive");
}

void CameraFootprint::validate() const {
  constexpr double half_pi = 1.5707963267948966;
  if (!(half_fov_along > 0.0 && half_fov_along < half_pi) ||
      !(half_fov_across > 0.0 && half_fov_across < half_pi))
    throw ParameterError("camera half-angles must lie in (0, pi/2)");
}

double CameraFootprint::along_length(double altitude) const {
  return 2.0 * altitude * std::tan(half_fov_along);
}

double CameraFootprint::across_length(double altitude) const {
  return 2.0 * altitude * std::tan(half_fov_across);
}

std::vector<Vec3> generate_scanlines(const SurveyPlan& plan) {
  plan.validate();
  const bool along_x = plan.heading == Heading::x;
  // Lines parallel to x are stacked along y, and vice versa.
  const double across_min = along_x ? plan.aoi.ymin : plan.aoi.xmin;
  const double across_max = along_x ? plan.aoi.ymax : plan.aoi.xmax;
  const double along_min = along_x ? plan.aoi.xmin : plan.aoi.ymin;
  const double along_max = along_x ? plan.aoi.xmax : plan.aoi.ymax;

  const double width = across_max - across_min;
  const auto n = std::max<long>(1, static_cast<long>(std::ceil(width / plan.line_spacing - 1e-12)));
  const double span = static_cast<double>(n - 1) * plan.line_spacing;
  const double first = across_min + 0.5 * (width - span);

  std::vector<Vec3> wps;
  wps.reserve(static_cast<std::size_t>(2 * n));
  for (long i = 0; i < n; ++i) {
    const double off = first + static_cast<double>(i) * plan.line_spacing;
    const double a = i % 2 == 0 ? along_min : along_max;
    const double b = i % 2 == 0 ? along_max : along_min;
    if (along_x) {
      wps.push_back({a, off, plan.altitude});
      wps.push_back({b, off, plan.altitude});
    } else {
      wps.push_back({off, a, plan.altitude});
      wps.push_back({off, b, plan.altitude});
    }
  }
  return wps;
}

double path_length(std::span<const Vec3> wps) {
  double len = 0.0;
  for (std::size_t i = 1; i < wps.size(); ++i) len += dist(wps[i - 1], wps[i]);
  return len;
}

Vec3 point_along(std::span<const Vec3> wps, double s) {
  if (wps.empty()) throw EmptyInputError("empty polyline");
  if (s <= 0.0) return wps.front();
  for (std::size_t i = 1; i < wps.size(); ++i) {
    const double seg = dist(wps[i - 1], wps[i]);
    if (s <= seg && seg > 0.0) {
      const double f = s / seg;
      const Vec3& a = wps[i - 1];
      const Vec3& b = wps[i];
      return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y), a.z + f * (b.z - a.z)};
    }
    s -= seg;
  }
  return wps.back();
}

SurveyResult run_survey(const SurveyPlan& plan, const radiation::DetectorModel& det,
                        std::span<const radiation::RadSource> sources, Rng& rng) {
  SurveyResult out;
  out.waypoints = generate_scanlines(plan);
  const double total_time = path_length(out.waypoints) / plan.speed;
  const auto n = static_cast<std::size_t>(std::floor(total_time * plan.sample_hz + 1e-9)) + 1;
  out.measurements.reserve(n);
  out.captures.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / plan.sample_hz;
    const Vec3 p = point_along(out.waypoints, t * plan.speed);
    out.measurements.push_back(radiation::sample_measurement(rng, det, sources, p, t));
    out.captures.push_back({t, p});
  }
  return out;
}

double overlap_fraction(const SurveyPlan& plan, const CameraFootprint& cam) {
  cam.validate();
  const double footprint = cam.along_length(plan.altitude);
  const double spacing = plan.speed / plan.sample_hz;
  return std::clamp(1.0 - spacing / footprint, 0.0, 1.0);
}

double fitted_aerial_sensitivity() {
  const double ho_pair = 138.7 + 147.1;
  const double standoff = 30.0 - kSourceHeight;
  return radiation::fit_sensitivity(radiation::kMission2HoNearest10Median - radiation::kMission2BackgroundMean,
                                    ho_pair, standoff);
}

Scenario mission1_scenario() {
  Scenario s;
  s.plan.aoi = {0.0, 0.0, 80.0, 80.0};
  s.detector = radiation::make_detector(radiation::kMission1BackgroundMean, fitted_aerial_sensitivity());
  const Vec3 site{40.0, 40.0, kSourceHeight};
  s.sources = radiation::check_sources(site);
  s.source_sites = {site};
  return s;
}

Scenario mission2_scenario() {
  Scenario s;
  s.plan.aoi = {0.0, 0.0, 120.0, 60.0};
  s.detector = radiation::make_detector(radiation::kMission2BackgroundMean, fitted_aerial_sensitivity());
  const Vec3 ho_site{30.0, 30.0, kSourceHeight};
  const Vec3 bacs_site{90.0, 30.0, kSourceHeight};
  s.sources = {radiation::make_source("Ho-166m", 1200.0, 138.7, ho_site),
               radiation::make_source("Ho-166m", 1200.0, 147.1, ho_site),
               radiation::make_source("Ba-133", 10.7, 16.1, bacs_site),
               radiation::make_source("Cs-137", 30.2, 10.0, bacs_site)};
  s.source_sites = {ho_site, bacs_site};
  return s;
}

SurveyPlan parse_plan_json(std::string_view text) {
  SurveyPlan p;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.contains("aoi")) {
      const auto& a = j.at("aoi");
      if (!a.is_array() || a.size() != 4) throw ParseError("aoi must be [xmin,ymin,xmax,ymax]");
      p.aoi = {a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>()};
    }
    p.altitude = j.value("altitude", p.altitude);
    p.line_spacing = j.value("line_spacing", p.line_spacing);
    p.speed = j.value("speed", p.speed);
    p.sample_hz = j.value("sample_hz", p.sample_hz);
    const std::string heading = j.value("heading", std::string("x"));
    if (heading == "x") {
      p.heading = Heading::x;
    } else if (heading == "y") {
      p.heading = Heading::y;
    } else {
      throw ParseError("heading must be \"x\" or \"y\"");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad survey plan: ") + e.what());
  }
  return p;
}

std::string plan_to_json(const SurveyPlan& p) {
  nlohmann::ordered_json j;
  j["aoi"] = {p.aoi.xmin, p.aoi.ymin, p.aoi.xmax, p.aoi.ymax};
  j["altitude"] = p.altitude;
  j["line_spacing"] = p.line_spacing;
  j["speed"] = p.speed;
  j["sample_hz"] = p.sample_hz;
  j["heading"] = p.heading == Heading::x ? "x" : "y";
  return j.dump(2);
}

void write_plan_json(const SurveyPlan& plan, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << plan_to_json(plan) << '\n';
}

SurveyPlan read_plan_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_plan_json(ss.str());
}

void write_captures_csv(std::span<const CaptureEvent> captures, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "t,x,y,z\n";
  char buf[64];
  auto num = [&](double v) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
  };
  for (const CaptureEvent& c : captures)
    out << num(c.t) << ',' << num(c.pos.x) << ',' << num(c.pos.y) << ',' << num(c.pos.z) << '\n';
}

}  // namespace radsearch::survey
