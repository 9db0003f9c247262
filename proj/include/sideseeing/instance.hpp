#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sideseeing {

namespace fs = std::filesystem;

// File names of an instance directory as written by the collector app.
namespace files {
inline constexpr std::string_view kConsumption = "consumption.csv";
inline constexpr std::string_view kGps = "gps.csv";
inline constexpr std::string_view kMetadata = "metadata.json";
inline constexpr std::string_view kSensorsOne = "sensors.one.csv";
inline constexpr std::string_view kSensorsThree = "sensors.three.csv";
inline constexpr std::string_view kSensorsThreeUncalibrated = "sensors.three.uncalibrated.csv";
inline constexpr std::string_view kVideo = "video.mp4";
inline constexpr std::string_view kAnnotations = "annotations.json";
}  // namespace files

namespace headers {
inline constexpr std::string_view kSensorsThree = "timestamp_nanos,sensor_name,accuracy,x,y,z";
inline constexpr std::string_view kSensorsOne = "timestamp_nanos,sensor_name,accuracy,value";
inline constexpr std::string_view kSensorsThreeUncalibrated =
    "timestamp_nanos,sensor_name,accuracy,x,y,z,bias_x,bias_y,bias_z";
inline constexpr std::string_view kGps = "timestamp_ms,latitude,longitude,accuracy_m";
inline constexpr std::string_view kConsumption = "timestamp_ms,battery_pct,charging";
}  // namespace headers

enum class Orientation { Landscape, Portrait };

struct Resolution {
  int width = 0;
  int height = 0;
  bool operator==(const Resolution&) const = default;
};

/// Pairs the boot-relative sensor clock with wall-clock time at one instant.
struct BootAnchor {
  std::int64_t elapsed_nanos = 0;
  std::int64_t epoch_ms = 0;
  bool operator==(const BootAnchor&) const = default;
};

struct InstanceMetadata {
  std::string instance_id;
  std::string device_model;
  std::string os_version;
  std::string app_version;
  Resolution camera_resolution;
  double video_fps = 0.0;
  double sensor_rate_hz = 0.0;
  double gps_rate_hz = 0.0;
  std::int64_t start_epoch_ms = 0;
  std::int64_t stop_epoch_ms = 0;
  std::optional<BootAnchor> boot_anchor;
  double mount_angle_deg = 0.0;
  Orientation orientation = Orientation::Landscape;
  std::string facility;
  std::string city;
  std::string country;
  // Keys not modelled above, kept so that emit writes them back.
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const InstanceMetadata&) const = default;
};

// Sensor samples keep the raw boot clock; t_ms is the wall-clock position on
// the instance timeline and is NaN until the timeline has been applied.
struct SensorSample3 {
  std::int64_t t_raw_nanos = 0;
  double t_ms = 0.0;
  std::string sensor_name;
  int accuracy = 0;
  double x = 0.0, y = 0.0, z = 0.0;
};

struct SensorSample1 {
  std::int64_t t_raw_nanos = 0;
  double t_ms = 0.0;
  std::string sensor_name;
  int accuracy = 0;
  double value = 0.0;
};

struct SensorSampleU3 {
  std::int64_t t_raw_nanos = 0;
  double t_ms = 0.0;
  std::string sensor_name;
  int accuracy = 0;
  double x = 0.0, y = 0.0, z = 0.0;
  double bias_x = 0.0, bias_y = 0.0, bias_z = 0.0;
};

struct GpsFix {
  std::int64_t t_epoch_ms = 0;
  double lat = 0.0;
  double lon = 0.0;
  double accuracy_m = 0.0;
};

struct BatterySample {
  std::int64_t t_epoch_ms = 0;
  double battery_pct = 0.0;
  bool charging = false;
};

template <class Sample>
using Series = std::vector<Sample>;

using GpsTrack = std::vector<GpsFix>;

enum class Severity { Info, Warning, Error };

std::string_view to_string(Severity severity);

struct Finding {
  Severity severity = Severity::Info;
  std::string code;
  std::string message;
};

using ValidationReport = std::vector<Finding>;

struct Instance {
  InstanceMetadata metadata;
  std::map<std::string, Series<SensorSample3>> sensors3;
  std::map<std::string, Series<SensorSample1>> sensors1;
  std::map<std::string, Series<SensorSampleU3>> sensors_u3;
  GpsTrack gps;
  Series<BatterySample> battery;
  std::optional<fs::path> video_path;
  fs::path dir;
  // Notes produced while loading: missing optional files, reordered inputs.
  std::vector<Finding> load_report;
  bool on_timeline = false;

  bool sensor_only() const { return !video_path.has_value(); }
};

enum class SensorKind { Accelerometer, Gyroscope, Magnetometer };

std::string_view to_string(SensorKind kind);

// Locates the calibrated three-axis stream of the given kind by a
// case-insensitive match on the sensor name. Returns nullptr when absent.
const Series<SensorSample3>* find_sensor(const Instance& inst, SensorKind kind);
std::optional<std::string> find_sensor_name(const Instance& inst, SensorKind kind);

struct LoadOptions {
  // Map sensor clocks onto wall-clock ms right after parsing (when an anchor exists).
  bool apply_timeline = true;
};

Instance load_instance(const fs::path& dir, const LoadOptions& options = {});

enum class Profile { Lenient, Paper };

ValidationReport validate_instance(const Instance& inst, Profile profile);

// True when the report holds no error-level finding.
bool passes(const ValidationReport& report);

void emit_instance(const Instance& inst, const fs::path& dir);

// metadata.json (de)serialization; exposed for the dataset scanner and bundles.
InstanceMetadata parse_metadata(const nlohmann::json& doc);
nlohmann::json metadata_to_json(const InstanceMetadata& metadata);
InstanceMetadata read_metadata_file(const fs::path& path);

}  // namespace sideseeing
