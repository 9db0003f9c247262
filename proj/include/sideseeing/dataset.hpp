#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sideseeing/geo.hpp"
#include "sideseeing/instance.hpp"
#include "sideseeing/media.hpp"

namespace sideseeing {

// ---------------------------------------------------------------------------
// Dataset scanning. Layout: root/<city>/<instance_id>/metadata.json

struct DatasetEntry {
  std::string instance_id;
  std::string city;
  std::string country;
  fs::path path;
  bool ok = true;
  std::string error;
};

struct DatasetIndex {
  fs::path root;
  std::vector<DatasetEntry> entries;  // sorted by instance_id

  const DatasetEntry* find(const std::string& instance_id) const;
  std::size_t error_count() const;
  std::vector<std::string> cities() const;
};

DatasetIndex scan_dataset(const fs::path& root);

nlohmann::json to_json(const DatasetIndex& index);

// Loads every readable entry and exports one feature per instance with GPS.
nlohmann::json to_geojson(const DatasetIndex& index, const TrackOptions& track = {});

// ---------------------------------------------------------------------------
// Synthetic collector emulator.
//
// Randomness: std::mt19937_64 seeded with the instance seed; uniforms are
// (u64 >> 11) * 2^-53 and normals use the basic Box-Muller transform on two
// consecutive uniforms (cosine branch only). Both are fully specified, so a
// seed yields the same bytes on every platform.

struct PauseSpec {
  double offset_s = 0.0;  // negative = measured back from the end of the walk
  double duration_s = 2.0;
};

struct TurnSpec {
  double offset_s = 0.0;  // start of the turn from the instance start
  double angle_deg = 90.0;  // positive = left
};

struct ToneSpec {
  double start_s = 0.0;
  double end_s = 0.0;
  double frequency_hz = 440.0;
};

struct NoiseLevels {
  double accel = 0.05;  // m/s², per axis
  double gyro = 0.01;   // rad/s
  double mag = 0.3;     // µT
  double gps_m = 0.0;   // horizontal metres
};

struct RouteSpec {
  std::string id;        // defaults to <city-slug>-<nn>
  std::string facility;  // defaults to "<city> Hospital <n>"
  double length_m = 78.0;
  double walk_speed_mps = 1.3;
  std::vector<PauseSpec> pauses = {{0.0, 2.0}, {-2.0, 2.0}};
  std::vector<TurnSpec> turns;
  double turn_duration_s = 2.0;
  double initial_heading_deg = 0.0;  // counter-clockwise from east
  double imu_rate_hz = 50.0;
  double gps_rate_hz = 15.0;
  double fps = 30.0;
  double mount_angle_deg = 70.0;
  double gait_amplitude = 1.5;  // m/s², vertical bounce while walking
  NoiseLevels noise;
  std::optional<std::uint64_t> seed;  // defaults to config seed + route index
  bool video = false;
  bool audio = true;
  std::vector<ToneSpec> tones;
};

struct CitySpec {
  std::string name;
  std::string country;
  LatLon origin;
  std::vector<RouteSpec> routes;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  std::vector<CitySpec> cities;
  bool require_video = false;
};

SynthConfig synth_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SynthConfig& config);

// Four cities with `per_city` protocol routes each (pause 2 s, walk with two
// or three turns, pause 2 s); route seeds are first_seed, first_seed + 1, ...
SynthConfig protocol_dataset_config(std::uint64_t first_seed, int per_city = 3);

struct IntervalTruth {
  double t_start_ms = 0.0;
  double t_end_ms = 0.0;
};

struct TurnTruth {
  double t_start_ms = 0.0;
  double t_end_ms = 0.0;
  double angle_deg = 0.0;
};

struct InstanceTruth {
  std::string instance_id;
  std::string city;
  std::string country;
  std::string facility;
  fs::path path;
  std::uint64_t seed = 0;
  std::int64_t start_epoch_ms = 0;
  std::int64_t stop_epoch_ms = 0;
  double distance_m = 0.0;
  double net_heading_deg = 0.0;
  std::vector<IntervalTruth> pauses;
  std::vector<TurnTruth> turns;
  std::map<std::string, std::int64_t> counts;  // per stream row counts
  std::int64_t video_frames = 0;
  bool has_video = false;
  bool has_audio = false;
  std::vector<IntervalTruth> tones;  // ms from start
  std::string watermark;             // description of the frame-index encoding
};

struct GroundTruth {
  std::vector<InstanceTruth> instances;
};

nlohmann::json to_json(const GroundTruth& truth);

// Builds one instance in memory (no video) together with its ground truth.
std::pair<Instance, InstanceTruth> synthesize_instance(const RouteSpec& route, const CitySpec& city,
                                                       std::uint64_t seed, const std::string& instance_id);

GroundTruth generate_synthetic(const SynthConfig& config, const fs::path& out_root,
                               const MediaTool* media = nullptr);

// Frame-index watermark: 16 bits, bit b is the 8-pixel wide column block
// [8b, 8b + 8) of a 128x16 gray frame, white when set.
inline constexpr int kWatermarkWidth = 128;
inline constexpr int kWatermarkHeight = 16;
inline constexpr int kWatermarkBits = 16;
std::int64_t decode_watermark(const std::vector<std::uint8_t>& gray_pixels, int width, int height);

// ---------------------------------------------------------------------------
// Annotation bundle consumed by the UI.

inline constexpr int kBundleVersion = 1;

struct BundleOptions {
  double downsample_hz = 10.0;
  bool waveform = false;
  double waveform_rate_hz = 100.0;
  const MediaTool* media = nullptr;
};

fs::path export_bundle(const Instance& inst, const fs::path& out_dir, const BundleOptions& options = {});

}  // namespace sideseeing
