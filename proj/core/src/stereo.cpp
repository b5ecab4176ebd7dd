#include "radsearch/stereo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

namespace radsearch::stereo {

void Calibration::validate() const {
  if (!(focal_px > 0.0)) throw ParameterError("focal length must be positive");
  if (!(baseline_m > 0.0)) throw ParameterError("baseline must be positive");
}

Matrix4 build_q(const Calibration& c) {
  c.validate();
  Matrix4 q{};
  q[0] = {1.0, 0.0, 0.0, -c.cx};
  q[1] = {0.0, 1.0, 0.0, -c.cy};
  q[2] = {0.0, 0.0, 0.0, c.focal_px};
  q[3] = {0.0, 0.0, -1.0 / c.baseline_m, (c.cx - c.cx_right) / c.baseline_m};
  return q;
}

Point3 back_project(const Matrix4& q, double x, double y, double d, double eps) {
  const std::array<double, 4> v{x, y, d, 1.0};
  std::array<double, 4> h{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) h[i] += q[i][j] * v[j];
  if (!(std::abs(h[3]) >= eps))
    throw DegenerateDisparityError("homogeneous scale w is zero for disparity " + std::to_string(d));
  return {h[0] / h[3], h[1] / h[3], h[2] / h[3]};
}

ElevationRaster median_filter_depth(const ElevationRaster& depth, int window) {
  if (window < 1 || window % 2 == 0) throw ParameterError("median window must be odd and >= 1");
  if (window == 1) return depth;
  const int half = window / 2;
  ElevationRaster out = depth;
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(window) * window);
  for (int row = 0; row < depth.height(); ++row) {
    for (int col = 0; col < depth.width(); ++col) {
      vals.clear();
      for (int dr = -half; dr <= half; ++dr)
        for (int dc = -half; dc <= half; ++dc) {
          const int c = col + dc, r = row + dr;
          if (depth.in_bounds(c, r) && !depth.is_nodata(c, r) && std::isfinite(depth(c, r)))
            vals.push_back(depth(c, r));
        }
      if (vals.empty()) {
        out(col, row) = depth.nodata().value_or(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const std::size_t mid = vals.size() / 2;
      std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid), vals.end());
      double m = vals[mid];
      if (vals.size() % 2 == 0) {
        const double lower = *std::max_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (lower + m);
      }
      out(col, row) = m;
    }
  }
  return out;
}

CloudReport disparity_to_cloud(const ElevationRaster& disparity, const Calibration& calib,
                               int median_window, const RgbRaster* colors) {
  const Matrix4 q = build_q(calib);
  const ElevationRaster filtered = median_filter_depth(disparity, median_window);
  if (colors && (colors->width() != disparity.width() || colors->height() != disparity.height()))
    throw DimensionError("color image does not match disparity dimensions");
  CloudReport report;
  for (int row = 0; row < filtered.height(); ++row) {
    for (int col = 0; col < filtered.width(); ++col) {
      const double d = filtered(col, row);
      if (filtered.is_nodata(col, row) || !std::isfinite(d)) continue;
      ++report.valid_pixels;
      try {
        CloudPoint pt{back_project(q, col, row, d), std::nullopt};
        if (colors) pt.color = (*colors)(col, row);
        report.cloud.push_back(pt);
      } catch (const DegenerateDisparityError&) {
        ++report.degenerate_pixels;
      }
    }
  }
  return report;
}

void write_cloud_csv(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const bool with_color = !cloud.empty() && cloud.front().color.has_value();
  out << (with_color ? "x,y,z,r,g,b\n" : "x,y,z\n");
  char buf[64];
  auto num = [&](double v) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
  };
  for (const CloudPoint& pt : cloud) {
    out << num(pt.p.x) << ',' << num(pt.p.y) << ',' << num(pt.p.z);
    if (with_color) {
      const Rgb c = pt.color.value_or(Rgb{});
      out << ',' << int(c[0]) << ',' << int(c[1]) << ',' << int(c[2]);
    }
    out << '\n';
  }
}

}  // namespace radsearch::stereo
