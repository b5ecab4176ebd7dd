#pragma once

// Display-only renderings: SVG charts and PPM path overlays.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radsearch/geo.hpp"
#include "radsearch/radiation.hpp"
#include "radsearch/segmentation.hpp"

namespace radsearch::report {

std::string histogram_svg(std::span<const radiation::HistogramBin> bins, std::string_view title);

struct TimeSeries {
  std::vector<double> t;
  std::vector<double> counts;
  std::vector<double> distance;  // metres to goal; may be empty
};

/// Counts against time on the left axis, distance to goal dashed on the right.
std::string counts_time_svg(const TimeSeries& series, std::string_view title);

struct Overlay {
  std::vector<std::vector<Cell>> paths;  // drawn in order, last on top
  const Mask* removed = nullptr;         // runtime obstacles
  std::optional<Cell> start;
  std::optional<Cell> goal;
};

/// Traversable cells in muted colours, obstacles blue, paths red, start green,
/// goal yellow.
RgbRaster path_overlay(const LabelRaster& labels, const Overlay& overlay);

}  // namespace radsearch::report
