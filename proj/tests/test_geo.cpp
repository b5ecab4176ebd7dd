#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "radsearch/geo.hpp"
#include "radsearch/raster_io.hpp"
#include "radsearch/segmentation.hpp"
#include "test_util.hpp"

using namespace radsearch;

TEST(GeoTransform, WorldToPixelExamples) {
  const GeoTransform gt{0.0, 0.0, 0.6};
  PixelCoord p = world_to_pixel(gt, 0.0, 0.0);
  EXPECT_EQ(p.col, 0.0);
  EXPECT_EQ(p.row, 0.0);
  p = world_to_pixel(gt, 6.0, 3.0);
  EXPECT_NEAR(p.col, 10.0, 1e-12);
  EXPECT_NEAR(p.row, 5.0, 1e-12);
  p = world_to_pixel(GeoTransform{100.0, 200.0, 0.5}, 100.0, 200.0);
  EXPECT_EQ(p.col, 0.0);
  EXPECT_EQ(p.row, 0.0);
}

TEST(GeoTransform, IntegerPixelRoundTripIsExact) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> origin(-1e4, 1e4), size(0.05, 5.0);
  std::uniform_int_distribution<int> idx(-500, 5000);
  for (int trial = 0; trial < 2000; ++trial) {
    const GeoTransform gt{origin(rng), origin(rng), size(rng)};
    const int c = idx(rng), r = idx(rng);
    const WorldPoint w = gt.pixel_to_world(c, r);
    const Cell back = gt.world_to_cell(w.x, w.y);
    EXPECT_EQ(back.col, c);
    EXPECT_EQ(back.row, r);
  }
}

TEST(Raster, RejectsNonPositivePixelSize) {
  EXPECT_THROW(ElevationRaster(2, 2, 0.0, GeoTransform{0, 0, 0.0}), ParameterError);
  EXPECT_THROW(ElevationRaster(-1, 2), DimensionError);
}

TEST(Gradient, ConstantIsZero) {
  const ElevationRaster z(7, 5, 3.25, GeoTransform{0, 0, 0.6});
  const ElevationRaster g = gradient_magnitude(z);
  for (double v : g.cells()) EXPECT_EQ(v, 0.0);
}

TEST(Gradient, PlanarRampHasAnalyticSlope) {
  ElevationRaster z(9, 6, 0.0, GeoTransform{1.0, 2.0, 0.6});
  for (int r = 0; r < z.height(); ++r)
    for (int c = 0; c < z.width(); ++c) z(c, r) = 2.0 * z.transform().cell_center({c, r}).x;
  const ElevationRaster g = gradient_magnitude(z);
  for (int r = 0; r < z.height(); ++r)
    for (int c = 0; c < z.width(); ++c) EXPECT_NEAR(g(c, r), 2.0, 1e-9);
}

TEST(Gradient, SpikeLightsFourNeighbours) {
  ElevationRaster z(5, 5, 0.0, GeoTransform{0, 0, 1.0});
  z(2, 2) = 1.0;
  const ElevationRaster g = gradient_magnitude(z);
  EXPECT_DOUBLE_EQ(g(1, 2), 0.5);
  EXPECT_DOUBLE_EQ(g(3, 2), 0.5);
  EXPECT_DOUBLE_EQ(g(2, 1), 0.5);
  EXPECT_DOUBLE_EQ(g(2, 3), 0.5);
  EXPECT_DOUBLE_EQ(g(2, 2), 0.0);
  EXPECT_DOUBLE_EQ(g(1, 1), 0.0);
}

TEST(Gradient, MatchesLonghandOracleOnRandomDem) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 3.0);
  ElevationRaster z(13, 11, 0.0, GeoTransform{0, 0, 0.7});
  for (double& v : z.cells()) v = n(rng);
  const ElevationRaster g = gradient_magnitude(z);
  for (int r = 0; r < z.height(); ++r)
    for (int c = 0; c < z.width(); ++c) EXPECT_NEAR(g(c, r), oracle::gradient_at(z, c, r), 1e-12);
}

TEST(Gradient, NodataPropagates) {
  ElevationRaster z(5, 5, 1.0, GeoTransform{}, kDefaultNodata);
  z(2, 2) = kDefaultNodata;
  const ElevationRaster g = gradient_magnitude(z);
  EXPECT_TRUE(g.is_nodata(1, 2));
  EXPECT_TRUE(g.is_nodata(2, 1));
  EXPECT_FALSE(g.is_nodata(0, 0));
}

TEST(Gradient, TooSmallThrows) {
  EXPECT_THROW(gradient_magnitude(ElevationRaster(1, 5)), DimensionError);
  EXPECT_THROW(gradient_magnitude(ElevationRaster(5, 1)), DimensionError);
}

TEST(Downsample, FactorOneIsIdentity) {
  ElevationRaster z(3, 2, 0.0, GeoTransform{1, 1, 0.5});
  z(1, 1) = 4.0;
  EXPECT_EQ(downsample(z, 1, Reducer::mean), z);
}

TEST(Downsample, ConstantLabels) {
  const LabelRaster l = make_label_raster(4, 4, Category::road);
  const LabelRaster d = downsample(l, 2, Reducer::mode);
  ASSERT_EQ(d.width(), 2);
  ASSERT_EQ(d.height(), 2);
  for (Category c : d.cells()) EXPECT_EQ(c, Category::road);
}

TEST(Downsample, MeanOfBlock) {
  ElevationRaster z(2, 2, 0.0, GeoTransform{0, 0, 0.6});
  z(0, 0) = 1;
  z(1, 0) = 2;
  z(0, 1) = 3;
  z(1, 1) = 4;
  const ElevationRaster d = downsample(z, 2, Reducer::mean);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_DOUBLE_EQ(d(0, 0), 2.5);
  EXPECT_DOUBLE_EQ(d.transform().pixel_size, 1.2);
}

TEST(Downsample, MeanOnLabelsIsKindError) {
  EXPECT_THROW(downsample(make_label_raster(4, 4, Category::road), 2, Reducer::mean), KindError);
}

TEST(Downsample, OutputDimsAreCeiling) {
  const ElevationRaster z(7, 5, 1.0);
  const ElevationRaster d = downsample(z, 3, Reducer::nearest);
  EXPECT_EQ(d.width(), 3);
  EXPECT_EQ(d.height(), 2);
}

TEST(Downsample, ModeTieGoesToLowestCode) {
  LabelRaster l = make_label_raster(2, 2, Category::shadow);
  l(0, 0) = Category::grass;
  l(1, 1) = Category::grass;
  EXPECT_EQ(downsample(l, 2, Reducer::mode)(0, 0), Category::grass);
}

TEST(Downsample, ModeLabelAlwaysComesFromItsBlock) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(0, kCategoryCount - 1);
  for (int trial = 0; trial < 50; ++trial) {
    LabelRaster l = make_label_raster(17, 13, Category::road);
    for (Category& c : l.cells()) c = kCategories[static_cast<std::size_t>(pick(rng))];
    const int f = 2 + trial % 4;
    const LabelRaster d = downsample(l, f, Reducer::mode);
    for (int r = 0; r < d.height(); ++r)
      for (int c = 0; c < d.width(); ++c) {
        bool found = false;
        for (int rr = r * f; rr < std::min((r + 1) * f, l.height()); ++rr)
          for (int cc = c * f; cc < std::min((c + 1) * f, l.width()); ++cc) found |= l(cc, rr) == d(c, r);
        EXPECT_TRUE(found);
      }
  }
}

class RasterFiles : public ::testing::Test {
 protected:
  testutil::TempDir tmp;
};

TEST_F(RasterFiles, SingleCellRoundTripsExactly) {
  ElevationRaster z(1, 1, 5.0, GeoTransform{0.3, 0.3, 0.6});
  write_ascii_grid(z, tmp / "one.asc");
  const ElevationRaster back = read_ascii_grid(tmp / "one.asc");
  ASSERT_EQ(back.width(), 1);
  EXPECT_EQ(back(0, 0), 5.0);
  EXPECT_NEAR(back.transform().origin_x, 0.3, 1e-12);
}

TEST_F(RasterFiles, NodataIsPreserved) {
  ElevationRaster z(3, 2, 1.5, GeoTransform{}, kDefaultNodata);
  z(1, 0) = kDefaultNodata;
  write_ascii_grid(z, tmp / "nd.asc");
  const ElevationRaster back = read_ascii_grid(tmp / "nd.asc");
  EXPECT_TRUE(back.is_nodata(1, 0));
  EXPECT_FALSE(back.is_nodata(0, 0));
}

TEST_F(RasterFiles, LargeRandomGridRoundTrip) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-500.0, 500.0);
  ElevationRaster z(458, 440, 0.0, GeoTransform{12.3, -4.5, 0.6});
  for (double& v : z.cells()) v = u(rng);
  write_ascii_grid(z, tmp / "big.asc");
  const ElevationRaster back = read_ascii_grid(tmp / "big.asc");
  ASSERT_TRUE(back.same_grid(z) || (back.width() == z.width() && back.height() == z.height()));
  double worst = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) worst = std::max(worst, std::abs(z.cells()[i] - back.cells()[i]));
  EXPECT_LT(worst, 1e-9);
  EXPECT_NEAR(back.transform().origin_x, 12.3, 1e-9);
  EXPECT_NEAR(back.transform().origin_y, -4.5, 1e-9);
}

TEST_F(RasterFiles, FirstFileRowIsNorthernmost) {
  ElevationRaster z(2, 3, 0.0);
  z(0, 2) = 7.0;  // highest row index = largest y
  write_ascii_grid(z, tmp / "n.asc");
  std::ifstream in(tmp / "n.asc");
  std::string line, first_data;
  while (std::getline(in, line))
    if (!line.empty() && (std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '-')) {
      first_data = line;
      break;
    }
  EXPECT_EQ(first_data.rfind("7", 0), 0u) << first_data;
}

TEST_F(RasterFiles, MalformedHeaderReportsLine) {
  testutil::write_file(tmp / "bad.asc", "ncols 2\nnrows two\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n3 4\n");
  try {
    read_ascii_grid(tmp / "bad.asc");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST_F(RasterFiles, ShortDataIsParseError) {
  testutil::write_file(tmp / "short.asc", "ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n3\n");
  EXPECT_THROW(read_ascii_grid(tmp / "short.asc"), ParseError);
}

TEST_F(RasterFiles, PpmSolidRedRoundTrips) {
  RgbRaster img(2, 2, Rgb{255, 0, 0});
  write_ppm(img, tmp / "red.ppm");
  const RgbRaster back = read_ppm(tmp / "red.ppm");
  EXPECT_EQ(back.cells().size(), 4u);
  for (const Rgb& px : back.cells()) EXPECT_EQ(px, (Rgb{255, 0, 0}));
}

TEST_F(RasterFiles, PpmRandomRoundTripIsByteExact) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> b(0, 255);
  RgbRaster img(64, 64);
  for (Rgb& px : img.cells()) px = {static_cast<std::uint8_t>(b(rng)), static_cast<std::uint8_t>(b(rng)),
                                   static_cast<std::uint8_t>(b(rng))};
  write_ppm(img, tmp / "rand.ppm");
  const RgbRaster back = read_ppm(tmp / "rand.ppm");
  ASSERT_EQ(back.width(), 64);
  EXPECT_TRUE(std::equal(img.cells().begin(), img.cells().end(), back.cells().begin()));
  write_ppm(back, tmp / "rand2.ppm");
  EXPECT_EQ(testutil::read_file(tmp / "rand.ppm"), testutil::read_file(tmp / "rand2.ppm"));
}

TEST_F(RasterFiles, PpmTruncatedBodyIsParseError) {
  testutil::write_file(tmp / "trunc.ppm", std::string("P6\n65535 65535\n255\n") + std::string(10, '\0'));
  EXPECT_THROW(read_ppm(tmp / "trunc.ppm"), ParseError);
}

TEST_F(RasterFiles, PpmWrongMagicIsParseError) {
  testutil::write_file(tmp / "p3.ppm", "P3\n1 1\n255\n0 0 0\n");
  EXPECT_THROW(read_ppm(tmp / "p3.ppm"), ParseError);
}

TEST_F(RasterFiles, SidecarCarriesTransform) {
  const GeoTransform gt{10.5, -3.25, 0.6};
  RgbRaster img(3, 3, Rgb{1, 2, 3}, gt);
  write_ppm(img, tmp / "geo.ppm");
  write_sidecar(gt, tmp / "geo.ppm");
  EXPECT_EQ(sidecar_path(tmp / "geo.ppm").filename(), "geo.geo.json");
  const auto back = read_sidecar(tmp / "geo.ppm");
  ASSERT_TRUE(back.has_value());
  EXPECT_EQ(*back, gt);
  EXPECT_EQ(read_ppm(tmp / "geo.ppm").transform(), gt);
}
