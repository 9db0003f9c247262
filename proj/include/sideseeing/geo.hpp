#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sideseeing/instance.hpp"

namespace sideseeing {

inline constexpr double kEarthRadiusM = 6371000.0;

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

/// Great-circle distance on a sphere of radius kEarthRadiusM.
double haversine_m(LatLon a, LatLon b);

struct TrackOptions {
  // Fixes reporting a worse accuracy are dropped; nullopt keeps every fix.
  std::optional<double> max_accuracy_m = 25.0;
};

double track_length_m(const GpsTrack& track, const TrackOptions& options = {});

struct InstanceSummary {
  std::string instance_id;
  std::string city;
  std::string country;
  std::string facility;
  double distance_m = 0.0;
  double duration_s = 0.0;
  std::int64_t video_frames = 0;
  std::int64_t acc_points = 0;
  std::int64_t gyr_points = 0;
  std::int64_t mag_points = 0;
  bool frames_estimated = false;
  std::vector<std::string> warnings;
};

struct CitySummary {
  std::string city;
  std::string country;
  std::int64_t routes = 0;
  std::int64_t hospitals = 0;
  double distance_m = 0.0;
  double duration_s = 0.0;
  std::int64_t video_frames = 0;
  std::int64_t acc_points = 0;
  std::int64_t gyr_points = 0;
  std::int64_t mag_points = 0;

  bool operator==(const CitySummary&) const = default;
};

class MediaTool;

// video_frames comes from probing the video when a media tool is given and a
// video exists; otherwise it is estimated as round(duration_s * fps).
InstanceSummary summarize_instance(const Instance& inst, const MediaTool* media = nullptr,
                                   const TrackOptions& track = {});

// Groups instance rows per city (first-seen order is replaced by name order);
// hospitals = distinct facility strings in the city.
std::vector<CitySummary> summarize_cities(const std::vector<InstanceSummary>& rows);

/// Componentwise sum of the rows: the "All" line of the dataset table.
CitySummary aggregate_summaries(const std::vector<CitySummary>& rows);

enum class TableFormat { Csv, Json, Markdown };

// Table columns: City - Country, Routes, Hospitals, Distance, Duration,
// Video Frames, ACC, GYR, MAG; the All row comes last.
std::string format_summary_table(const std::vector<CitySummary>& rows, TableFormat format);

nlohmann::json to_json(const InstanceSummary& summary);
nlohmann::json to_json(const CitySummary& summary);

// GeoJSON (RFC 7946). One LineString feature per instance ([lon, lat]).
nlohmann::json to_geojson(const Instance& inst, const TrackOptions& track = {});
nlohmann::json to_geojson(const std::vector<Instance>& instances, const TrackOptions& track = {});
nlohmann::json geojson_feature(const Instance& inst, const TrackOptions& track = {});

}  // namespace sideseeing
