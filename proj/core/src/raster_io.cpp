#include "radsearch/raster_io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include <nlohmann/json.hpp>

namespace radsearch {
namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  if (!tok.empty() && tok.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("invalid number '" + std::string(tok) + "'", line);
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename T, typename Fmt>
void write_grid(const Raster<T>& r, const std::filesystem::path& path, const std::string& nodata,
                Fmt&& fmt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const GeoTransform& gt = r.transform();
  out << "ncols " << r.width() << "\n"
      << "nrows " << r.height() << "\n"
      << "xllcorner " << format_double(gt.origin_x - 0.5 * gt.pixel_size) << "\n"
      << "yllcorner " << format_double(gt.origin_y - 0.5 * gt.pixel_size) << "\n"
      << "cellsize " << format_double(gt.pixel_size) << "\n"
      << "NODATA_value " << nodata << "\n";
  std::string line;
  for (int row = r.height() - 1; row >= 0; --row) {
    line.clear();
    for (int col = 0; col < r.width(); ++col) {
      if (col) line += ' ';
      line += fmt(r(col, row));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

ElevationRaster read_ascii_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  std::optional<long> ncols, nrows;
  std::optional<double> xll, yll, cellsize, nodata;
  bool center = false;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string_view> toks;
  bool have_line = false;

  // Header: key/value pairs until the first line starting with a number.
  while (std::getline(in, line)) {
    ++lineno;
    toks = split_ws(line);
    if (toks.empty()) continue;
    const char c0 = toks[0].front();
    if (std::isdigit(static_cast<unsigned char>(c0)) || c0 == '-' || c0 == '+' || c0 == '.') {
      have_line = true;
      break;
    }
    if (toks.size() != 2) throw ParseError("malformed header line", lineno);
    const std::string key = lower(std::string(toks[0]));
    const double v = parse_double(toks[1], lineno);
    if (key == "ncols") {
      ncols = static_cast<long>(v);
    } else if (key == "nrows") {
      nrows = static_cast<long>(v);
    } else if (key == "xllcorner" || key == "xllcenter") {
      xll = v;
      center = center || key == "xllcenter";
    } else if (key == "yllcorner" || key == "yllcenter") {
      yll = v;
    } else if (key == "cellsize") {
      cellsize = v;
    } else if (key == "nodata_value") {
      nodata = v;
    } else {
      throw ParseError("unknown header key '" + std::string(toks[0]) + "'", lineno);
    }
  }
  if (!ncols || !nrows || !xll || !yll || !cellsize)
    throw ParseError("missing required header key in " + path.string(), lineno);
  if (*ncols <= 0 || *nrows <= 0) throw ParseError("non-positive grid dimensions", lineno);
  if (!(*cellsize > 0.0)) throw ParseError("cellsize must be positive", lineno);

  const double half = center ? 0.0 : 0.5 * *cellsize;
  GeoTransform gt{*xll + half, *yll + half, *cellsize};
  const double nd = nodata.value_or(kDefaultNodata);
  ElevationRaster r(static_cast<int>(*ncols), static_cast<int>(*nrows), 0.0, gt, nd);

  // `line`/`toks` hold the first data row already.
  long file_row = 0;
  while (true) {
    if (!have_line) {
      if (!std::getline(in, line)) break;
      ++lineno;
      toks = split_ws(line);
      if (toks.empty()) continue;
    }
    have_line = false;
    if (file_row >= *nrows) throw ParseError("more data rows than nrows", lineno);
    if (static_cast<long>(toks.size()) != *ncols)
      throw ParseError("expected " + std::to_string(*ncols) + " values, found " +
                           std::to_string(toks.size()),
                       lineno);
    const int row = static_cast<int>(*nrows - 1 - file_row);
    for (long col = 0; col < *ncols; ++col) {
      const double v = parse_double(toks[static_cast<std::size_t>(col)], lineno);
      if (std::isnan(v) || (!std::isfinite(v) && v != nd))
        throw ParseError("non-finite elevation", lineno);
      r(static_cast<int>(col), row) = v;
    }
    ++file_row;
  }
  if (file_row != *nrows)
    throw ParseError("expected " + std::to_string(*nrows) + " data rows, found " +
                         std::to_string(file_row),
                     lineno);
  return r;
}

void write_ascii_grid(const ElevationRaster& r, const std::filesystem::path& path) {
  const double nd = r.nodata().value_or(kDefaultNodata);
  write_grid(r, path, format_double(nd), [](double v) { return format_double(v); });
}

void write_ascii_grid_int(const Raster<int>& r, const std::filesystem::path& path) {
  const int nd = r.nodata().value_or(static_cast<int>(kDefaultNodata));
  write_grid(r, path, std::to_string(nd), [](int v) { return std::to_string(v); });
}

RgbRaster read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::size_t pos = 0;
  auto skip_ws_comments = [&] {
    while (pos < data.size()) {
      if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* what) {
    skip_ws_comments();
    std::size_t start = pos;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) ++pos;
    if (pos == start) throw ParseError(std::string("PPM: missing ") + what);
    return std::stoul(data.substr(start, pos - start));
  };

  if (data.size() < 2 || data[0] != 'P' || data[1] != '6') throw ParseError("PPM: expected P6 magic");
  pos = 2;
  const unsigned long w = read_uint("width");
  const unsigned long h = read_uint("height");
  const unsigned long maxval = read_uint("maxval");
  if (maxval != 255) throw ParseError("PPM: only 8-bit (maxval 255) supported");
  if (w == 0 || h == 0 || w > (1ul << 20) || h > (1ul << 20)) throw ParseError("PPM: bad dimensions");
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
    throw ParseError("PPM: truncated header");
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * h * 3;
  if (data.size() - pos < need) throw ParseError("PPM: truncated payload");

  GeoTransform gt = read_sidecar(path).value_or(GeoTransform{});
  RgbRaster r(static_cast<int>(w), static_cast<int>(h), Rgb{}, gt);
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data() + pos);
  for (unsigned long file_row = 0; file_row < h; ++file_row) {
    const int row = static_cast<int>(h - 1 - file_row);
    for (unsigned long col = 0; col < w; ++col) {
      const unsigned char* p = bytes + (file_row * w + col) * 3;
      r(static_cast<int>(col), row) = Rgb{p[0], p[1], p[2]};
    }
  }
  return r;
}

void write_ppm(const RgbRaster& r, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << r.width() << " " << r.height() << "\n255\n";
  std::vector<char> row_bytes(static_cast<std::size_t>(r.width()) * 3);
  for (int row = r.height() - 1; row >= 0; --row) {
    for (int col = 0; col < r.width(); ++col) {
      const Rgb& px = r(col, row);
      for (int k = 0; k < 3; ++k) row_bytes[static_cast<std::size_t>(col) * 3 + k] = static_cast<char>(px[k]);
    }
    out.write(row_bytes.data(), static_cast<std::streamsize>(row_bytes.size()));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::filesystem::path sidecar_path(const std::filesystem::path& raster_path) {
  std::filesystem::path p = raster_path;
  p.replace_extension(".geo.json");
  return p;
}

void write_sidecar(const GeoTransform& gt, const std::filesystem::path& raster_path) {
  nlohmann::ordered_json j;
  j["origin_x"] = gt.origin_x;
  j["origin_y"] = gt.origin_y;
  j["pixel_size"] = gt.pixel_size;
  std::ofstream out(sidecar_path(raster_path), std::ios::binary);
  if (!out) throw IoError("cannot write " + sidecar_path(raster_path).string());
  out << j.dump(2) << "\n";
}

std::optional<GeoTransform> read_sidecar(const std::filesystem::path& raster_path) {
  const auto p = sidecar_path(raster_path);
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(in);
    GeoTransform gt{j.at("origin_x").get<double>(), j.at("origin_y").get<double>(),
                    j.at("pixel_size").get<double>()};
    if (!(gt.pixel_size > 0.0)) throw ParseError("sidecar pixel_size must be positive");
    return gt;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad sidecar " + p.string() + ": " + e.what());
  }
}

}  // namespace radsearch
