#include <charconv>
#include <fstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "radsearch/radiation.hpp"

namespace radsearch::radiation {
namespace {

std::string num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

template <typename T>
T parse_field(std::string_view tok, std::size_t line) {
  T v{};
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw ParseError("bad field '" + std::string(tok) + "'", line);
  return v;
}

}  // namespace

void write_measurements_csv(std::span<const Measurement> ms, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  std::string line = "t,x,y,z,counts";
  for (std::size_t c = 0; c < kChannels; ++c) line += ",c" + std::to_string(c);
  out << line << '\n';
  for (const Measurement& m : ms) {
    line = num(m.t) + ',' + num(m.pos.x) + ',' + num(m.pos.y) + ',' + num(m.pos.z) + ',' +
           std::to_string(counts(m.spectrum));
    for (std::uint32_t c : m.spectrum) {
      line += ',';
      line += std::to_string(c);
    }
    out << line << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<Measurement> read_measurements_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty measurements file", 1);
  ++lineno;
  if (line.rfind("t,x,y,z,counts", 0) != 0) throw ParseError("unexpected measurements header", 1);

  std::vector<Measurement> out;
  std::vector<std::string_view> fields;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fields.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.emplace_back(line.data() + start, (comma == std::string::npos ? line.size() : comma) - start);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 5 + kChannels)
      throw ParseError("expected " + std::to_string(5 + kChannels) + " fields, found " +
                           std::to_string(fields.size()),
                       lineno);
    Measurement m;
    m.t = parse_field<double>(fields[0], lineno);
    m.pos = {parse_field<double>(fields[1], lineno), parse_field<double>(fields[2], lineno),
             parse_field<double>(fields[3], lineno)};
    parse_field<std::int64_t>(fields[4], lineno);  // advisory; recomputed below
    for (std::size_t c = 0; c < kChannels; ++c)
      m.spectrum[c] = parse_field<std::uint32_t>(fields[5 + c], lineno);
    m.counts = counts(m.spectrum);
    out.push_back(m);
  }
  return out;
}

void write_sources_json(std::span<const RadSource> sources, const std::filesystem::path& path) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const RadSource& s : sources) {
    nlohmann::ordered_json j;
    j["nuclide"] = s.nuclide;
    j["half_life_yr"] = s.half_life_yr;
    j["activity_uci"] = s.activity_uci;
    j["x"] = s.position.x;
    j["y"] = s.position.y;
    j["z"] = s.position.z;
    arr.push_back(j);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << arr.dump(2) << '\n';
}

std::vector<RadSource> read_sources_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<RadSource> out;
  try {
    const auto arr = nlohmann::json::parse(in);
    if (!arr.is_array()) throw ParseError("sources file must hold a JSON array");
    for (const auto& j : arr) {
      out.push_back(make_source(j.at("nuclide").get<std::string>(), j.at("half_life_yr").get<double>(),
                                j.at("activity_uci").get<double>(),
                                {j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>()}));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad sources file " + path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace radsearch::radiation
