#pragma once

// Stereo back-projection: disparity image -> 3D points in the left camera frame.

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "radsearch/geo.hpp"

namespace radsearch::stereo {

struct Calibration {
  double focal_px = 1.0;          // f
  double cx = 0.0;                // left principal point
  double cy = 0.0;
  double cx_right = 0.0;          // right principal point x
  double baseline_m = 1.38;       // B

  void validate() const;
};

using Matrix4 = std::array<std::array<double, 4>, 4>;

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct CloudPoint {
  Point3 p;
  std::optional<Rgb> color;
};

using PointCloud = std::vector<CloudPoint>;

inline constexpr double kDegenerateW = 1e-12;

/// Reprojection matrix Q:
///   [1 0 0 -cx; 0 1 0 -cy; 0 0 0 f; 0 0 -1/B (cx - cx')/B]
Matrix4 build_q(const Calibration& calib);

/// Dehomogenises Q [x y d 1]^T. Throws DegenerateDisparityError when |w| < eps.
Point3 back_project(const Matrix4& q, double x, double y, double d, double eps = kDegenerateW);

/// Median of valid neighbours in a window x window box; cells with no valid
/// neighbours stay nodata. Window must be odd.
ElevationRaster median_filter_depth(const ElevationRaster& depth, int window);

struct CloudReport {
  PointCloud cloud;
  std::size_t valid_pixels = 0;
  std::size_t degenerate_pixels = 0;
};

/// Filters the disparity image (window 1 disables filtering) and back-projects every
/// valid pixel. Pixel coordinates are (col, row) of the disparity raster.
CloudReport disparity_to_cloud(const ElevationRaster& disparity, const Calibration& calib,
                               int median_window, const RgbRaster* colors = nullptr);

/// `x,y,z[,r,g,b]` with a one-line header.
void write_cloud_csv(const PointCloud& cloud, const std::filesystem::path& path);

}  // namespace radsearch::stereo
