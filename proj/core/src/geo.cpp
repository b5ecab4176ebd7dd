#include "radsearch/geo.hpp"

namespace radsearch {

ElevationRaster gradient_magnitude(const ElevationRaster& dem) {
  const int w = dem.width(), h = dem.height();
  if (w < 2 || h < 2) throw DimensionError("gradient_magnitude needs at least a 2x2 raster");
  const double ps = dem.transform().pixel_size;
  const double nodata = dem.nodata().value_or(0.0);
  ElevationRaster out(w, h, 0.0, dem.transform(), dem.nodata());

  // Difference along one axis: central inside, one-sided at the edges.
  auto diff = [&](int col, int row, int dc, int dr, int n, int i, double& g) {
    const int lo = i > 0 ? -1 : 0;
    const int hi = i < n - 1 ? 1 : 0;
    const int ca = col + lo * dc, ra = row + lo * dr;
    const int cb = col + hi * dc, rb = row + hi * dr;
    if (dem.is_nodata(ca, ra) || dem.is_nodata(cb, rb)) return false;
    g = (dem(cb, rb) - dem(ca, ra)) / (ps * (hi - lo));
    return true;
  };

  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      double gx = 0.0, gy = 0.0;
      if (dem.is_nodata(col, row) || !diff(col, row, 1, 0, w, col, gx) ||
          !diff(col, row, 0, 1, h, row, gy)) {
        out(col, row) = nodata;
        continue;
      }
      out(col, row) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return out;
}

}  // namespace radsearch
