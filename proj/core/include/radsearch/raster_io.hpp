#pragma once

// File formats for rasters: ESRI ASCII grid (.asc), binary PPM P6 (.ppm) and
// the .geo.json sidecar carrying the geotransform. Files are written north-up:
// the first data row in a file is the raster's highest row index.

#include <filesystem>
#include <optional>
#include <string>

#include "radsearch/geo.hpp"

namespace radsearch {

inline constexpr double kDefaultNodata = -9999.0;

/// Reads an ESRI ASCII grid. Cells equal to NODATA_value become the raster's nodata.
/// Accepts both xllcorner/yllcorner and xllcenter/yllcenter headers.
ElevationRaster read_ascii_grid(const std::filesystem::path& path);

/// Writes with shortest round-trip decimal formatting; a raster without nodata is
/// written with NODATA_value -9999.
void write_ascii_grid(const ElevationRaster& r, const std::filesystem::path& path);

/// Integer-valued variant used for label and id rasters.
void write_ascii_grid_int(const Raster<int>& r, const std::filesystem::path& path);

RgbRaster read_ppm(const std::filesystem::path& path);
void write_ppm(const RgbRaster& r, const std::filesystem::path& path);

/// `ortho.ppm` -> `ortho.geo.json`.
std::filesystem::path sidecar_path(const std::filesystem::path& raster_path);
void write_sidecar(const GeoTransform& gt, const std::filesystem::path& raster_path);
std::optional<GeoTransform> read_sidecar(const std::filesystem::path& raster_path);

}  // namespace radsearch
