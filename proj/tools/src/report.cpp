#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace radsearch::report {
namespace {

constexpr double kW = 720.0, kH = 420.0;
constexpr double kLeft = 70.0, kRight = 70.0, kTop = 40.0, kBottom = 50.0;

std::string fmt(double v, int prec = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string open_svg(std::string_view title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kW, 0) + "\" height=\"" +
                  fmt(kH, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt(kW / 2, 1) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
       "</text>\n";
  return s;
}

std::string axes() {
  const double x0 = kLeft, y0 = kH - kBottom, x1 = kW - kRight;
  return "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(x1) + "\" y2=\"" + fmt(y0) +
         "\" stroke=\"black\"/>\n<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(x0) +
         "\" y2=\"" + fmt(y0) + "\" stroke=\"black\"/>\n";
}

std::string label(double x, double y, const std::string& text, const char* anchor = "middle") {
  return "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" text-anchor=\"" + anchor + "\">" + escape(text) +
         "</text>\n";
}

struct Range {
  double lo, hi;
  double map(double v, double a, double b) const { return hi > lo ? a + (v - lo) / (hi - lo) * (b - a) : a; }
};

Range range_of(std::span<const double> v) {
  if (v.empty()) return {0.0, 1.0};
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  return {*mn, *mx > *mn ? *mx : *mn + 1.0};
}

std::string polyline(std::span<const double> xs, std::span<const double> ys, Range rx, Range ry,
                     const char* style) {
  std::string pts;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) pts += ' ';
    pts += fmt(rx.map(xs[i], kLeft, kW - kRight)) + ',' + fmt(ry.map(ys[i], kH - kBottom, kTop));
  }
  return "<polyline fill=\"none\" " + std::string(style) + " points=\"" + pts + "\"/>\n";
}

}  // namespace

std::string histogram_svg(std::span<const radiation::HistogramBin> bins, std::string_view title) {
  std::string s = open_svg(title);
  s += axes();
  if (bins.empty()) return s + "</svg>\n";
  std::size_t peak = 0;
  for (const auto& b : bins) peak = std::max(peak, b.count);
  const Range rx{bins.front().lower, bins.back().upper};
  const Range ry{0.0, static_cast<double>(std::max<std::size_t>(peak, 1))};
  for (const auto& b : bins) {
    const double x0 = rx.map(b.lower, kLeft, kW - kRight), x1 = rx.map(b.upper, kLeft, kW - kRight);
    const double y = ry.map(static_cast<double>(b.count), kH - kBottom, kTop);
    s += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(std::max(0.0, x1 - x0 - 0.5)) +
         "\" height=\"" + fmt(kH - kBottom - y) + "\" fill=\"steelblue\" data-count=\"" + std::to_string(b.count) +
         "\"/>\n";
  }
  s += label(kLeft, kH - kBottom + 18, fmt(rx.lo, 0));
  s += label(kW - kRight, kH - kBottom + 18, fmt(rx.hi, 0));
  s += label(kLeft - 8, kTop + 4, std::to_string(peak), "end");
  s += label(kW / 2, kH - 12, "counts per second");
  return s + "</svg>\n";
}

std::string counts_time_svg(const TimeSeries& ts, std::string_view title) {
  std::string s = open_svg(title);
  s += axes();
  if (ts.t.empty()) return s + "</svg>\n";
  const Range rx = range_of(ts.t), rc = range_of(ts.counts);
  s += polyline(ts.t, ts.counts, rx, rc, "stroke=\"steelblue\" stroke-width=\"1.2\"");
  s += label(kLeft - 8, kTop + 4, fmt(rc.hi, 0), "end");
  s += label(kLeft - 8, kH - kBottom, fmt(rc.lo, 0), "end");
  if (!ts.distance.empty()) {
    const Range rd = range_of(ts.distance);
    s += polyline(ts.t, ts.distance, rx, rd, "stroke=\"darkorange\" stroke-dasharray=\"5,3\"");
    s += "<line x1=\"" + fmt(kW - kRight) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kW - kRight) + "\" y2=\"" +
         fmt(kH - kBottom) + "\" stroke=\"darkorange\"/>\n";
    s += label(kW - kRight + 8, kTop + 4, fmt(rd.hi, 1) + " m", "start");
    s += label(kW - kRight + 8, kH - kBottom, fmt(rd.lo, 1) + " m", "start");
  }
  s += label(kLeft, kH - kBottom + 18, fmt(rx.lo, 0));
  s += label(kW - kRight, kH - kBottom + 18, fmt(rx.hi, 0));
  s += label(kW / 2, kH - 12, "time (s)");
  return s + "</svg>\n";
}

RgbRaster path_overlay(const LabelRaster& labels, const Overlay& ov) {
  RgbRaster img(labels.width(), labels.height(), Rgb{}, labels.transform());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Category c = labels.cells()[i];
    Rgb px{40, 60, 200};
    if (c == Category::road) px = {150, 150, 150};
    if (c == Category::grass) px = {150, 190, 140};
    if (ov.removed && ov.removed->cells()[i]) px = {20, 30, 160};
    img.cells()[i] = px;
  }
  for (const auto& path : ov.paths)
    for (const Cell c : path)
      if (img.in_bounds(c)) img[c] = {220, 30, 30};
  auto marker = [&](Cell c, Rgb colour) {
    for (int dr = -2; dr <= 2; ++dr)
      for (int dc = -2; dc <= 2; ++dc) {
        const Cell n{c.col + dc, c.row + dr};
        if (img.in_bounds(n)) img[n] = colour;
      }
  };
  if (ov.start) marker(*ov.start, {30, 200, 60});
  if (ov.goal) marker(*ov.goal, {240, 220, 30});
  return img;
}

}  // namespace radsearch::report
