#include "sideseeing/geo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "sideseeing/error.hpp"
#include "sideseeing/media.hpp"
#include "util.hpp"

namespace sideseeing {

using nlohmann::json;

namespace {

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

bool valid(LatLon p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

}  // namespace

double haversine_m(LatLon a, LatLon b) {
  if (!valid(a) || !valid(b)) {
    throw Error(ErrorCode::InvalidCoordinate, "latitude/longitude out of range");
  }
  const double dlat = radians(b.lat - a.lat);
  const double dlon = radians(b.lon - a.lon);
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  double h = s1 * s1 + std::cos(radians(a.lat)) * std::cos(radians(b.lat)) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

double track_length_m(const GpsTrack& track, const TrackOptions& options) {
  double total = 0.0;
  const GpsFix* prev = nullptr;
  for (const auto& fix : track) {
    if (options.max_accuracy_m && fix.accuracy_m > *options.max_accuracy_m) continue;
    if (prev) total += haversine_m({prev->lat, prev->lon}, {fix.lat, fix.lon});
    prev = &fix;
  }
  return total;
}

InstanceSummary summarize_instance(const Instance& inst, const MediaTool* media,
                                   const TrackOptions& track) {
  const auto& m = inst.metadata;
  InstanceSummary s;
  s.instance_id = m.instance_id;
  s.city = m.city;
  s.country = m.country;
  s.facility = m.facility;
  if (m.stop_epoch_ms <= m.start_epoch_ms) {
    s.warnings.push_back("zero_duration");
    s.frames_estimated = true;
    return s;
  }
  s.duration_s = static_cast<double>(m.stop_epoch_ms - m.start_epoch_ms) / 1000.0;
  s.distance_m = track_length_m(inst.gps, track);
  auto count = [&](SensorKind kind) -> std::int64_t {
    const auto* series = find_sensor(inst, kind);
    return series ? static_cast<std::int64_t>(series->size()) : 0;
  };
  s.acc_points = count(SensorKind::Accelerometer);
  s.gyr_points = count(SensorKind::Gyroscope);
  s.mag_points = count(SensorKind::Magnetometer);

  bool probed = false;
  if (media && inst.video_path && media->available()) {
    try {
      const auto probe = media->probe(*inst.video_path);
      if (probe.frames > 0) {
        s.video_frames = probe.frames;
        probed = true;
      }
    } catch (const Error&) {
      s.warnings.push_back("video_probe_failed");
    }
  }
  if (!probed) {
    s.video_frames = std::llround(s.duration_s * m.video_fps);
    s.frames_estimated = true;
  }
  return s;
}

std::vector<CitySummary> summarize_cities(const std::vector<InstanceSummary>& rows) {
  std::map<std::string, CitySummary> by_city;
  std::map<std::string, std::set<std::string>> facilities;
  for (const auto& r : rows) {
    auto& c = by_city[r.city];
    c.city = r.city;
    if (c.country.empty()) c.country = r.country;
    c.routes += 1;
    c.distance_m += r.distance_m;
    c.duration_s += r.duration_s;
    c.video_frames += r.video_frames;
    c.acc_points += r.acc_points;
    c.gyr_points += r.gyr_points;
    c.mag_points += r.mag_points;
    facilities[r.city].insert(r.facility);
  }
  std::vector<CitySummary> out;
  for (auto& [city, summary] : by_city) {
    summary.hospitals = static_cast<std::int64_t>(facilities[city].size());
    out.push_back(summary);
  }
  return out;
}

CitySummary aggregate_summaries(const std::vector<CitySummary>& rows) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "no summary rows to aggregate");
  CitySummary all;
  all.city = "All";
  for (const auto& r : rows) {
    all.routes += r.routes;
    all.hospitals += r.hospitals;
    all.distance_m += r.distance_m;
    all.duration_s += r.duration_s;
    all.video_frames += r.video_frames;
    all.acc_points += r.acc_points;
    all.gyr_points += r.gyr_points;
    all.mag_points += r.mag_points;
  }
  if (rows.size() == 1) {
    all.city = rows.front().city;
    all.country = rows.front().country;
  }
  return all;
}

namespace {

std::string label(const CitySummary& c) {
  if (c.country.empty()) return c.city;
  return c.city + " - " + c.country;
}

std::string with_thousands(std::int64_t value) {
  std::string digits = std::to_string(value < 0 ? -value : value);
  std::string out;
  int n = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it, ++n) {
    if (n > 0 && n % 3 == 0) out.push_back(',');
    out.push_back(*it);
  }
  if (value < 0) out.push_back('-');
  return {out.rbegin(), out.rend()};
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

json to_json(const InstanceSummary& s) {
  return {{"instance_id", s.instance_id},   {"city", s.city},
          {"country", s.country},           {"facility", s.facility},
          {"distance_m", s.distance_m},     {"duration_s", s.duration_s},
          {"video_frames", s.video_frames}, {"acc_points", s.acc_points},
          {"gyr_points", s.gyr_points},     {"mag_points", s.mag_points},
          {"frames_estimated", s.frames_estimated}, {"warnings", s.warnings}};
}

json to_json(const CitySummary& c) {
  return {{"city", c.city},
          {"country", c.country},
          {"routes", c.routes},
          {"hospitals", c.hospitals},
          {"distance_m", c.distance_m},
          {"duration_s", c.duration_s},
          {"video_frames", c.video_frames},
          {"acc_points", c.acc_points},
          {"gyr_points", c.gyr_points},
          {"mag_points", c.mag_points}};
}

std::string format_summary_table(const std::vector<CitySummary>& rows, TableFormat format) {
  std::vector<CitySummary> table = rows;
  if (!rows.empty()) table.push_back(aggregate_summaries(rows));
  if (!rows.empty()) {
    table.back().city = "All";
    table.back().country.clear();
  }

  std::ostringstream out;
  switch (format) {
    case TableFormat::Csv: {
      out << "City - Country,Routes,Hospitals,Distance,Duration,Video Frames,ACC,GYR,MAG\n";
      for (const auto& c : table) {
        out << csv_field(label(c)) << ',' << c.routes << ',' << c.hospitals << ','
            << detail::format_double(c.distance_m) << ',' << detail::format_double(c.duration_s)
            << ',' << c.video_frames << ',' << c.acc_points << ',' << c.gyr_points << ','
            << c.mag_points << '\n';
      }
      break;
    }
    case TableFormat::Json: {
      json doc = json::object();
      json cities = json::array();
      for (std::size_t i = 0; i + 1 < table.size(); ++i) cities.push_back(to_json(table[i]));
      doc["cities"] = cities;
      doc["all"] = table.empty() ? json(nullptr) : to_json(table.back());
      out << doc.dump(2) << '\n';
      break;
    }
    case TableFormat::Markdown: {
      out << "| City - Country | Routes | Hospitals | Distance | Duration | Video Frames | ACC | GYR | MAG |\n";
      out << "|---|---:|---:|---:|---:|---:|---:|---:|---:|\n";
      for (const auto& c : table) {
        out << "| " << label(c) << " | " << c.routes << " | " << c.hospitals << " | "
            << with_thousands(std::llround(c.distance_m)) << " | "
            << with_thousands(std::llround(c.duration_s)) << " | " << with_thousands(c.video_frames)
            << " | " << with_thousands(c.acc_points) << " | " << with_thousands(c.gyr_points)
            << " | " << with_thousands(c.mag_points) << " |\n";
      }
      break;
    }
  }
  return out.str();
}

json geojson_feature(const Instance& inst, const TrackOptions& track) {
  if (inst.gps.empty()) {
    throw Error(ErrorCode::NoGpsData, "instance '" + inst.metadata.instance_id + "' has no GPS fixes");
  }
  json coords = json::array();
  for (const auto& fix : inst.gps) coords.push_back(json::array({fix.lon, fix.lat}));
  json geometry;
  if (inst.gps.size() == 1) {
    geometry = {{"type", "Point"}, {"coordinates", coords.front()}};
  } else {
    geometry = {{"type", "LineString"}, {"coordinates", coords}};
  }
  const auto& m = inst.metadata;
  const double duration_s =
      m.stop_epoch_ms > m.start_epoch_ms
          ? static_cast<double>(m.stop_epoch_ms - m.start_epoch_ms) / 1000.0
          : 0.0;
  json properties = {{"instance_id", m.instance_id},
                     {"city", m.city},
                     {"facility", m.facility},
                     {"distance_m", track_length_m(inst.gps, track)},
                     {"duration_s", duration_s}};
  return {{"type", "Feature"}, {"geometry", geometry}, {"properties", properties}};
}

json to_geojson(const Instance& inst, const TrackOptions& track) {
  return {{"type", "FeatureCollection"}, {"features", json::array({geojson_feature(inst, track)})}};
}

json to_geojson(const std::vector<Instance>& instances, const TrackOptions& track) {
  json features = json::array();
  for (const auto& inst : instances) {
    if (inst.gps.empty()) continue;
    features.push_back(geojson_feature(inst, track));
  }
  if (features.empty()) throw Error(ErrorCode::NoGpsData, "no instance carries GPS fixes");
  return {{"type", "FeatureCollection"}, {"features", features}};
}

}  // namespace sideseeing
