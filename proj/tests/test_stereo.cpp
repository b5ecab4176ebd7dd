#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "radsearch/raster_io.hpp"
#include "radsearch/stereo.hpp"
#include "test_util.hpp"

using namespace radsearch;
using namespace radsearch::stereo;

TEST(BuildQ, UnitCalibration) {
  const Matrix4 q = build_q({1.0, 0.0, 0.0, 0.0, 1.0});
  const Matrix4 want{{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, -1, 0}}};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) EXPECT_EQ(q[r][c], want[r][c]) << r << "," << c;
}

TEST(BuildQ, SubstitutedEntries) {
  const Matrix4 q = build_q({1000.0, 320.0, 240.0, 320.0, 1.38});
  EXPECT_DOUBLE_EQ(q[3][2], -1.0 / 1.38);
  EXPECT_EQ(q[3][3], 0.0);
  EXPECT_EQ(q[0][3], -320.0);
  EXPECT_EQ(q[1][3], -240.0);
}

TEST(BuildQ, ThirdRowIsFocal) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1.0, 2000.0);
  for (int i = 0; i < 20; ++i) {
    const double f = u(rng);
    const Matrix4 q = build_q({f, u(rng), u(rng), u(rng), 0.5});
    EXPECT_EQ(q[2][0], 0.0);
    EXPECT_EQ(q[2][1], 0.0);
    EXPECT_EQ(q[2][2], 0.0);
    EXPECT_EQ(q[2][3], f);
  }
}

TEST(BuildQ, InvalidCalibrationRejected) {
  EXPECT_THROW(build_q({0.0, 0, 0, 0, 1.0}), ParameterError);
  EXPECT_THROW(build_q({100.0, 0, 0, 0, 0.0}), ParameterError);
}

TEST(BackProject, CanonicalDepth) {
  const Matrix4 q = build_q({1000.0, 320.0, 240.0, 320.0, 1.38});
  const Point3 p = back_project(q, 320.0, 240.0, -100.0);
  EXPECT_NEAR(p.z, 13.8, 1e-12);
  EXPECT_NEAR(p.x, 0.0, 1e-12);
  EXPECT_NEAR(p.y, 0.0, 1e-12);
}

TEST(BackProject, ZeroScaleIsDegenerate) {
  const Matrix4 q = build_q({1000.0, 320.0, 240.0, 300.0, 1.38});
  EXPECT_THROW(back_project(q, 10.0, 10.0, 20.0), DegenerateDisparityError);
}

TEST(BackProject, RecoversForwardProjectedPoints) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> f(200.0, 3000.0), c(0.0, 1000.0), b(0.1, 2.0);
  std::uniform_real_distribution<double> xy(-20.0, 20.0), z(1.0, 80.0);
  for (int i = 0; i < 500; ++i) {
    const Calibration k{f(rng), c(rng), c(rng), c(rng), b(rng)};
    const double X = xy(rng), Y = xy(rng), Z = z(rng);
    const auto proj = oracle::project(k, X, Y, Z);
    const Point3 p = back_project(build_q(k), proj.x, proj.y, proj.d);
    EXPECT_NEAR(p.x, X, 1e-9);
    EXPECT_NEAR(p.y, Y, 1e-9);
    EXPECT_NEAR(p.z, Z, 1e-9);
  }
}

TEST(MedianFilter, WindowOneIsIdentity) {
  ElevationRaster d(4, 3, 0.0, GeoTransform{}, kDefaultNodata);
  for (std::size_t i = 0; i < d.size(); ++i) d.cells()[i] = static_cast<double>(i * i % 7);
  d(2, 1) = kDefaultNodata;
  EXPECT_EQ(median_filter_depth(d, 1), d);
}

TEST(MedianFilter, OutlierReplaced) {
  ElevationRaster d(5, 5, 2.0, GeoTransform{}, kDefaultNodata);
  d(2, 2) = 90.0;
  const ElevationRaster m = median_filter_depth(d, 3);
  for (double v : m.cells()) EXPECT_EQ(v, 2.0);
}

TEST(MedianFilter, AllInvalidStaysInvalid) {
  const ElevationRaster d(4, 4, kDefaultNodata, GeoTransform{}, kDefaultNodata);
  const ElevationRaster m = median_filter_depth(d, 3);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) EXPECT_TRUE(m.is_nodata(c, r));
}

TEST(MedianFilter, EvenWindowRejected) {
  EXPECT_THROW(median_filter_depth(ElevationRaster(3, 3), 2), ParameterError);
  EXPECT_THROW(median_filter_depth(ElevationRaster(3, 3), 0), ParameterError);
}

TEST(MedianFilter, StaysWithinWindowRangeAndIsIdempotentOnConstants) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::bernoulli_distribution hole(0.2);
  ElevationRaster d(15, 12, 0.0, GeoTransform{}, kDefaultNodata);
  for (double& v : d.cells()) v = hole(rng) ? kDefaultNodata : u(rng);
  const ElevationRaster m = median_filter_depth(d, 5);
  for (int r = 0; r < d.height(); ++r)
    for (int c = 0; c < d.width(); ++c) {
      if (m.is_nodata(c, r)) continue;
      double lo = 1e300, hi = -1e300;
      for (int rr = std::max(0, r - 2); rr <= std::min(d.height() - 1, r + 2); ++rr)
        for (int cc = std::max(0, c - 2); cc <= std::min(d.width() - 1, c + 2); ++cc)
          if (!d.is_nodata(cc, rr)) lo = std::min(lo, d(cc, rr)), hi = std::max(hi, d(cc, rr));
      EXPECT_GE(m(c, r), lo);
      EXPECT_LE(m(c, r), hi);
    }
  const ElevationRaster k(6, 6, 4.5, GeoTransform{}, kDefaultNodata);
  EXPECT_EQ(median_filter_depth(median_filter_depth(k, 3), 3), k);
}

TEST(Cloud, AllInvalidGivesEmptyCloud) {
  const ElevationRaster d(5, 5, kDefaultNodata, GeoTransform{}, kDefaultNodata);
  const CloudReport r = disparity_to_cloud(d, {500.0, 2.0, 2.0, 2.0, 1.38}, 3);
  EXPECT_TRUE(r.cloud.empty());
  EXPECT_EQ(r.valid_pixels, 0u);
}

TEST(Cloud, SinglePixelMatchesBackProject) {
  ElevationRaster d(5, 5, kDefaultNodata, GeoTransform{}, kDefaultNodata);
  d(3, 1) = -42.0;
  const Calibration k{500.0, 2.0, 2.0, 2.0, 1.38};
  const CloudReport r = disparity_to_cloud(d, k, 1);
  ASSERT_EQ(r.cloud.size(), 1u);
  const Point3 want = back_project(build_q(k), 3.0, 1.0, -42.0);
  EXPECT_EQ(r.cloud[0].p.x, want.x);
  EXPECT_EQ(r.cloud[0].p.y, want.y);
  EXPECT_EQ(r.cloud[0].p.z, want.z);
}

TEST(Cloud, FrontoParallelPlaneHasConstantDepth) {
  const Calibration k{800.0, 16.0, 12.0, 16.0, 1.38};
  const double Z = 25.0;
  ElevationRaster d(32, 24, 0.0, GeoTransform{}, kDefaultNodata);
  for (double& v : d.cells()) v = k.cx - k.cx_right - k.focal_px * k.baseline_m / Z;
  const CloudReport r = disparity_to_cloud(d, k, 3);
  ASSERT_EQ(r.cloud.size(), d.size());
  for (const auto& pt : r.cloud) EXPECT_NEAR(pt.p.z, Z, 1e-9);
}

TEST(Cloud, CountEqualsValidNonDegeneratePixels) {
  const Calibration k{600.0, 5.0, 5.0, 3.0, 1.0};
  const double degenerate = k.cx - k.cx_right;  // w = 0
  ElevationRaster d(10, 10, -30.0, GeoTransform{}, kDefaultNodata);
  d(1, 1) = kDefaultNodata;
  d(4, 4) = degenerate;
  d(7, 2) = degenerate;
  const CloudReport r = disparity_to_cloud(d, k, 1);
  EXPECT_EQ(r.valid_pixels, 99u);
  EXPECT_EQ(r.degenerate_pixels, 2u);
  EXPECT_EQ(r.cloud.size(), 97u);
}

TEST(Cloud, CsvHasHeaderAndOneLinePerPoint) {
  testutil::TempDir tmp;
  PointCloud c{{{1, 2, 3}, std::nullopt}, {{4, 5, 6}, std::nullopt}};
  write_cloud_csv(c, tmp / "c.csv");
  const std::string text = testutil::read_file(tmp / "c.csv");
  EXPECT_EQ(text.rfind("x,y,z", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}
