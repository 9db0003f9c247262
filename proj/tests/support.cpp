#include "support.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unistd.h>

namespace testing {

using nlohmann::json;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("sideseeing-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

sideseeing::MediaTool test_media() { return sideseeing::MediaTool::from_environment(); }

sideseeing::SynthConfig one_city(std::vector<sideseeing::RouteSpec> routes, std::uint64_t seed) {
  sideseeing::SynthConfig config;
  config.seed = seed;
  config.cities.push_back({"Testville", "Nowhere", {-23.55, -46.63}, std::move(routes)});
  return config;
}

sideseeing::Instance write_synthetic(const fs::path& dir, const sideseeing::RouteSpec& route,
                                     std::uint64_t seed, const std::string& id) {
  sideseeing::CitySpec city{"Testville", "Nowhere", {-23.55, -46.63}, {}};
  auto [inst, truth] = sideseeing::synthesize_instance(route, city, seed, id);
  sideseeing::emit_instance(inst, dir / id);
  return sideseeing::load_instance(dir / id);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> csv_lines(const fs::path& path) {
  std::vector<std::string> out;
  std::istringstream in(slurp(path));
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

namespace {

std::int64_t first_field(const std::string& line) {
  std::int64_t v = 0;
  const auto comma = line.find(',');
  std::from_chars(line.data(), line.data() + comma, v);
  return v;
}

}  // namespace

std::vector<std::string> filter_sensor_rows(const fs::path& csv, std::int64_t anchor_elapsed_ns,
                                            std::int64_t anchor_epoch_ms, std::int64_t t0_ms,
                                            std::int64_t t1_ms) {
  // t = epoch + (raw - elapsed) / 1e6 lies in [t0, t1)  <=>
  // (t0 - epoch) * 1e6 <= raw - elapsed < (t1 - epoch) * 1e6
  const std::int64_t lo = (t0_ms - anchor_epoch_ms) * 1000000;
  const std::int64_t hi = (t1_ms - anchor_epoch_ms) * 1000000;
  std::vector<std::string> out;
  for (const auto& line : csv_lines(csv)) {
    const auto d = first_field(line) - anchor_elapsed_ns;
    if (d >= lo && d < hi) out.push_back(line);
  }
  return out;
}

std::vector<std::string> filter_epoch_rows(const fs::path& csv, std::int64_t t0_ms, std::int64_t t1_ms) {
  std::vector<std::string> out;
  for (const auto& line : csv_lines(csv)) {
    const auto t = first_field(line);
    if (t >= t0_ms && t < t1_ms) out.push_back(line);
  }
  return out;
}

namespace {

void check_position(const json& p, const std::string& where, std::vector<std::string>& problems) {
  if (!p.is_array() || p.size() < 2 || p.size() > 3) {
    problems.push_back(where + ": position must be an array of 2 or 3 numbers");
    return;
  }
  for (const auto& v : p) {
    if (!v.is_number()) {
      problems.push_back(where + ": non-numeric coordinate");
      return;
    }
  }
  const double lon = p[0].get<double>(), lat = p[1].get<double>();
  if (lon < -180.0 || lon > 180.0) problems.push_back(where + ": longitude out of range");
  if (lat < -90.0 || lat > 90.0) problems.push_back(where + ": latitude out of range");
}

void check_geometry(const json& g, const std::string& where, std::vector<std::string>& problems) {
  if (g.is_null()) return;
  if (!g.is_object() || !g.contains("type") || !g["type"].is_string()) {
    problems.push_back(where + ": geometry without type");
    return;
  }
  const auto type = g["type"].get<std::string>();
  if (type == "GeometryCollection") {
    if (!g.contains("geometries") || !g["geometries"].is_array()) problems.push_back(where + ": geometries missing");
    else
      for (std::size_t i = 0; i < g["geometries"].size(); ++i)
        check_geometry(g["geometries"][i], where + ".geometries[" + std::to_string(i) + "]", problems);
    return;
  }
  if (!g.contains("coordinates")) {
    problems.push_back(where + ": coordinates missing");
    return;
  }
  const auto& c = g["coordinates"];
  if (type == "Point") {
    check_position(c, where, problems);
  } else if (type == "LineString" || type == "MultiPoint") {
    if (!c.is_array() || (type == "LineString" && c.size() < 2)) {
      problems.push_back(where + ": " + type + " needs an array of positions (LineString: >= 2)");
      if (!c.is_array()) return;
    }
    for (std::size_t i = 0; i < c.size(); ++i) check_position(c[i], where + "[" + std::to_string(i) + "]", problems);
  } else if (type == "Polygon" || type == "MultiLineString" || type == "MultiPolygon") {
    if (!c.is_array()) problems.push_back(where + ": coordinates must be an array");
  } else {
    problems.push_back(where + ": unknown geometry type '" + type + "'");
  }
}

void check_feature(const json& f, const std::string& where, std::vector<std::string>& problems) {
  if (!f.is_object() || f.value("type", std::string()) != "Feature") {
    problems.push_back(where + ": type must be Feature");
    return;
  }
  if (!f.contains("geometry")) problems.push_back(where + ": geometry member missing");
  else check_geometry(f["geometry"], where + ".geometry", problems);
  if (!f.contains("properties") || !(f["properties"].is_object() || f["properties"].is_null())) {
    problems.push_back(where + ": properties must be an object or null");
  }
}

}  // namespace

std::vector<std::string> geojson_problems(const json& doc) {
  std::vector<std::string> problems;
  if (!doc.is_object() || !doc.contains("type") || !doc["type"].is_string()) {
    problems.push_back("root: object with a type member required");
    return problems;
  }
  const auto type = doc["type"].get<std::string>();
  if (type == "FeatureCollection") {
    if (!doc.contains("features") || !doc["features"].is_array()) {
      problems.push_back("root: features array required");
    } else {
      for (std::size_t i = 0; i < doc["features"].size(); ++i)
        check_feature(doc["features"][i], "features[" + std::to_string(i) + "]", problems);
    }
  } else if (type == "Feature") {
    check_feature(doc, "root", problems);
  } else {
    check_geometry(doc, "root", problems);
  }
  if (doc.contains("crs")) problems.push_back("root: crs member is not part of RFC 7946");
  return problems;
}

double cosine_law_m(double lat1, double lon1, double lat2, double lon2) {
  const double r = std::numbers::pi / 180.0;
  const double c = std::sin(lat1 * r) * std::sin(lat2 * r) +
                   std::cos(lat1 * r) * std::cos(lat2 * r) * std::cos((lon2 - lon1) * r);
  return 6371000.0 * std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace testing
