#pragma once

// Georeferenced rasters: container, pixel/world transforms, gradients and
// block downsampling. Row r of a raster lies at world y = origin_y + r * pixel_size.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "radsearch/errors.hpp"

namespace radsearch {

struct PixelCoord {
  double col = 0.0;
  double row = 0.0;
};

struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Integer cell address.
struct Cell {
  int col = 0;
  int row = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Origin is the world position of the centre of pixel (0,0); pixels are square.
struct GeoTransform {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double pixel_size = 1.0;

  PixelCoord world_to_pixel(double x, double y) const {
    return {(x - origin_x) / pixel_size, (y - origin_y) / pixel_size};
  }
  WorldPoint pixel_to_world(double col, double row) const {
    return {origin_x + col * pixel_size, origin_y + row * pixel_size};
  }
  /// Nearest cell centre to a world position.
  Cell world_to_cell(double x, double y) const {
    const PixelCoord p = world_to_pixel(x, y);
    return {static_cast<int>(std::lround(p.col)), static_cast<int>(std::lround(p.row))};
  }
  WorldPoint cell_center(Cell c) const { return pixel_to_world(c.col, c.row); }

  friend bool operator==(const GeoTransform&, const GeoTransform&) = default;
};

inline PixelCoord world_to_pixel(const GeoTransform& gt, double x, double y) {
  return gt.world_to_pixel(x, y);
}
inline WorldPoint pixel_to_world(const GeoTransform& gt, double col, double row) {
  return gt.pixel_to_world(col, row);
}

using Rgb = std::array<std::uint8_t, 3>;

/// Row-major grid of values with a geotransform and optional nodata sentinel.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{}, GeoTransform transform = {},
         std::optional<T> nodata = std::nullopt)
      : width_(width), height_(height), transform_(transform), nodata_(nodata) {
    if (width < 0 || height < 0) throw DimensionError("raster dimensions must be non-negative");
    if (!(transform.pixel_size > 0.0)) throw ParameterError("pixel_size must be positive");
    cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return cells_.size(); }
  bool empty() const noexcept { return cells_.empty(); }

  bool in_bounds(int col, int row) const noexcept {
    return col >= 0 && row >= 0 && col < width_ && row < height_;
  }
  bool in_bounds(Cell c) const noexcept { return in_bounds(c.col, c.row); }

  std::size_t index(int col, int row) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }
  Cell cell_of(std::size_t index) const noexcept {
    return {static_cast<int>(index % static_cast<std::size_t>(width_)),
            static_cast<int>(index / static_cast<std::size_t>(width_))};
  }

  T& operator()(int col, int row) { return cells_[index(col, row)]; }
  const T& operator()(int col, int row) const { return cells_[index(col, row)]; }
  T& operator[](Cell c) { return cells_[index(c.col, c.row)]; }
  const T& operator[](Cell c) const { return cells_[index(c.col, c.row)]; }

  std::span<T> cells() noexcept { return cells_; }
  std::span<const T> cells() const noexcept { return cells_; }

  const GeoTransform& transform() const noexcept { return transform_; }
  void set_transform(const GeoTransform& gt) {
    if (!(gt.pixel_size > 0.0)) throw ParameterError("pixel_size must be positive");
    transform_ = gt;
  }

  const std::optional<T>& nodata() const noexcept { return nodata_; }
  void set_nodata(std::optional<T> v) { nodata_ = v; }
  bool is_nodata(const T& v) const { return nodata_.has_value() && v == *nodata_; }
  bool is_nodata(int col, int row) const { return is_nodata((*this)(col, row)); }

  bool same_grid(const auto& other) const {
    return width_ == other.width() && height_ == other.height() &&
           transform_ == other.transform();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> cells_;
  GeoTransform transform_{};
  std::optional<T> nodata_;
};

using ElevationRaster = Raster<double>;
using RgbRaster = Raster<Rgb>;

/// Central-difference gradient magnitude (one-sided at borders), in value units per metre.
/// Any difference touching a nodata cell makes the output cell nodata.
ElevationRaster gradient_magnitude(const ElevationRaster& dem);

enum class Reducer { mean, mode, nearest };

namespace detail {
template <typename T>
T block_mode(std::vector<T>& values) {
  std::sort(values.begin(), values.end());
  T best = values.front();
  std::size_t best_run = 0;
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    // strictly greater keeps the lowest value on ties
    if (j - i > best_run) {
      best_run = j - i;
      best = values[i];
    }
    i = j;
  }
  return best;
}
}  // namespace detail

/// Reduce each factor x factor block to one cell; output dims are ceil(dims / factor).
/// Mean is only defined for floating-point rasters; mode breaks ties toward the
/// lowest value; nearest takes the block's central cell.
template <typename T>
Raster<T> downsample(const Raster<T>& r, int factor, Reducer reducer) {
  if (factor < 1) throw ParameterError("downsample factor must be >= 1");
  if constexpr (!std::is_floating_point_v<T>) {
    if (reducer == Reducer::mean) throw KindError("mean reducer requires a real-valued raster");
  }
  if (factor == 1) return r;
  const int ow = (r.width() + factor - 1) / factor;
  const int oh = (r.height() + factor - 1) / factor;
  const GeoTransform& src = r.transform();
  const double shift = 0.5 * (factor - 1) * src.pixel_size;
  GeoTransform gt{src.origin_x + shift, src.origin_y + shift, src.pixel_size * factor};
  Raster<T> out(ow, oh, T{}, gt, r.nodata());
  std::vector<T> block;
  for (int orow = 0; orow < oh; ++orow) {
    for (int ocol = 0; ocol < ow; ++ocol) {
      const int c0 = ocol * factor, r0 = orow * factor;
      const int c1 = std::min(c0 + factor, r.width()), r1 = std::min(r0 + factor, r.height());
      block.clear();
      for (int row = r0; row < r1; ++row)
        for (int col = c0; col < c1; ++col)
          if (!r.is_nodata(col, row)) block.push_back(r(col, row));
      T& dst = out(ocol, orow);
      if (reducer == Reducer::nearest) {
        dst = r(c0 + (c1 - c0 - 1) / 2, r0 + (r1 - r0 - 1) / 2);
        continue;
      }
      if (block.empty()) {
        dst = *r.nodata();
        continue;
      }
      if constexpr (std::is_floating_point_v<T>) {
        if (reducer == Reducer::mean) {
          T sum{};
          for (const T& v : block) sum += v;
          dst = sum / static_cast<T>(block.size());
          continue;
        }
      }
      dst = detail::block_mode(block);
    }
  }
  return out;
}

/// Elementwise conversion keeping grid and mapping nodata.
template <typename To, typename From, typename Fn>
Raster<To> map_raster(const Raster<From>& in, Fn&& fn, std::optional<To> nodata = std::nullopt) {
  Raster<To> out(in.width(), in.height(), To{}, in.transform(), nodata);
  auto src = in.cells();
  auto dst = out.cells();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (in.is_nodata(src[i]) && nodata) {
      dst[i] = *nodata;
    } else {
      dst[i] = fn(src[i]);
    }
  }
  return out;
}

}  // namespace radsearch
