#include <gtest/gtest.h>

#include <cmath>

#include "radsearch/survey.hpp"
#include "test_util.hpp"

using namespace radsearch;
using namespace radsearch::survey;

namespace {

SurveyPlan square_plan(double side, double spacing, Heading h = Heading::x) {
  SurveyPlan p;
  p.aoi = {0, 0, side, side};
  p.line_spacing = spacing;
  p.heading = h;
  return p;
}

double seg_distance(double px, double py, const Vec3& a, const Vec3& b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((px - a.x) * dx + (py - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (a.x + t * dx), py - (a.y + t * dy));
}

}  // namespace

TEST(Scanlines, TenByTenGivesCentredLines) {
  const auto w = generate_scanlines(square_plan(10, 4));
  ASSERT_EQ(w.size(), 6u);
  EXPECT_EQ(w[0].y, 1.0);
  EXPECT_EQ(w[2].y, 5.0);
  EXPECT_EQ(w[4].y, 9.0);
  // boustrophedon: alternate direction
  EXPECT_EQ(w[0].x, 0.0);
  EXPECT_EQ(w[1].x, 10.0);
  EXPECT_EQ(w[2].x, 10.0);
  EXPECT_EQ(w[3].x, 0.0);
  for (const auto& p : w) EXPECT_EQ(p.z, 30.0);
}

TEST(Scanlines, DegenerateAndNarrowAoiGiveOneLine) {
  SurveyPlan p;
  p.aoi = {0, 3, 50, 3};
  EXPECT_EQ(generate_scanlines(p).size(), 2u);
  p.aoi = {0, 0, 50, 3};
  p.line_spacing = 10;
  const auto w = generate_scanlines(p);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].y, 1.5);
}

TEST(Scanlines, InvalidPlansRejected) {
  SurveyPlan p;
  p.aoi = {0, 0, 0, 0};
  EXPECT_THROW(generate_scanlines(p), ParameterError);
  p = square_plan(10, 0);
  EXPECT_THROW(generate_scanlines(p), ParameterError);
  p = square_plan(10, 4);
  p.speed = -1;
  EXPECT_THROW(generate_scanlines(p), ParameterError);
  p = square_plan(10, 4);
  p.aoi = {5, 0, 0, 10};
  EXPECT_THROW(generate_scanlines(p), ParameterError);
}

TEST(Scanlines, EveryAoiPointWithinHalfSpacing) {
  for (double spacing : {4.0, 3.3, 7.0}) {
    for (Heading h : {Heading::x, Heading::y}) {
      SurveyPlan p;
      p.aoi = {-7, 2, 31, 27.5};
      p.line_spacing = spacing;
      p.heading = h;
      const auto w = generate_scanlines(p);
      for (double x = p.aoi.xmin; x <= p.aoi.xmax; x += 0.25)
        for (double y = p.aoi.ymin; y <= p.aoi.ymax; y += 0.25) {
          double best = 1e300;
          for (std::size_t i = 0; i + 1 < w.size(); i += 2) best = std::min(best, seg_distance(x, y, w[i], w[i + 1]));
          ASSERT_LE(best, spacing / 2 + 1e-9) << x << "," << y;
        }
    }
  }
}

TEST(Scanlines, LengthInvariantUnderHeadingSwap) {
  const auto a = generate_scanlines(square_plan(37, 4, Heading::x));
  const auto b = generate_scanlines(square_plan(37, 4, Heading::y));
  EXPECT_NEAR(path_length(a), path_length(b), 1e-9);
}

TEST(RunSurvey, FencepostSampleCount) {
  SurveyPlan p;
  p.aoi = {0, 0, 90, 0.5};
  p.line_spacing = 4;
  Rng rng = make_rng(1);
  const auto det = radiation::make_detector(500, 0);
  const auto r = run_survey(p, det, {}, rng);
  EXPECT_EQ(r.measurements.size(), 31u);
  EXPECT_EQ(r.captures.size(), 31u);
}

TEST(RunSurvey, ZeroLengthPathGivesOneSample) {
  SurveyPlan p;
  p.aoi = {5, 0, 5, 1};
  Rng rng = make_rng(1);
  const auto r = run_survey(p, radiation::make_detector(500, 0), {}, rng);
  ASSERT_EQ(r.measurements.size(), 1u);
  EXPECT_EQ(r.measurements[0].pos.x, 5.0);
  EXPECT_EQ(r.measurements[0].pos.y, 0.5);
}

TEST(RunSurvey, SamplesOnPolylineAtFixedCadence) {
  SurveyPlan p = square_plan(40, 4);
  p.sample_hz = 2.0;
  Rng rng = make_rng(2);
  const auto r = run_survey(p, radiation::make_detector(500, 0), {}, rng);
  for (std::size_t i = 0; i < r.measurements.size(); ++i) {
    const auto& m = r.measurements[i];
    EXPECT_EQ(m.t, static_cast<double>(i) / 2.0);
    double best = 1e300;
    for (std::size_t j = 0; j + 1 < r.waypoints.size(); ++j)
      best = std::min(best, seg_distance(m.pos.x, m.pos.y, r.waypoints[j], r.waypoints[j + 1]));
    EXPECT_LT(best, 1e-9);
    EXPECT_EQ(m.pos.z, p.altitude);
  }
}

TEST(RunSurvey, SeededRunsAreIdentical) {
  const Scenario s = mission1_scenario();
  Rng a = make_rng(5), b = make_rng(5);
  const auto ra = run_survey(s.plan, s.detector, s.sources, a);
  const auto rb = run_survey(s.plan, s.detector, s.sources, b);
  ASSERT_EQ(ra.measurements.size(), rb.measurements.size());
  for (std::size_t i = 0; i < ra.measurements.size(); ++i)
    EXPECT_EQ(ra.measurements[i].spectrum, rb.measurements[i].spectrum);
}

TEST(Overlap, PublishedSettings) {
  SurveyPlan p = square_plan(10, 4);
  const CameraFootprint cam{std::atan(0.5), std::atan(0.5)};
  EXPECT_NEAR(cam.along_length(30.0), 30.0, 1e-12);
  EXPECT_NEAR(overlap_fraction(p, cam), 0.9, 1e-12);
  p.speed = 30.0;
  EXPECT_NEAR(overlap_fraction(p, cam), 0.0, 1e-12);
  p.speed = 90.0;
  EXPECT_EQ(overlap_fraction(p, cam), 0.0);
  EXPECT_THROW(overlap_fraction(p, CameraFootprint{0.0, 0.1}), ParameterError);
}

TEST(PlanJson, RoundTripAndDefaults) {
  testutil::TempDir tmp;
  SurveyPlan p = square_plan(12, 3, Heading::y);
  p.altitude = 25;
  write_plan_json(p, tmp / "p.json");
  const SurveyPlan q = read_plan_json(tmp / "p.json");
  EXPECT_EQ(q.aoi.xmax, 12.0);
  EXPECT_EQ(q.line_spacing, 3.0);
  EXPECT_EQ(q.altitude, 25.0);
  EXPECT_EQ(q.heading, Heading::y);
  const SurveyPlan d = parse_plan_json(R"({"aoi":[0,0,10,10]})");
  EXPECT_EQ(d.altitude, 30.0);
  EXPECT_EQ(d.speed, 3.0);
  EXPECT_THROW(parse_plan_json("{"), ParseError);
}
