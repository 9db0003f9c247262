#include "sideseeing/instance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <tuple>

#include "sideseeing/error.hpp"
#include "sideseeing/timeline.hpp"
#include "util.hpp"

namespace sideseeing {

using nlohmann::json;

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingMetadata: return "MissingMetadata";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MissingAnchor: return "MissingAnchor";
    case ErrorCode::EmptyInterval: return "EmptyInterval";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::MissingSensor: return "MissingSensor";
    case ErrorCode::SpanTooShort: return "SpanTooShort";
    case ErrorCode::IntervalOutOfRange: return "IntervalOutOfRange";
    case ErrorCode::MediaToolMissing: return "MediaToolMissing";
    case ErrorCode::MediaToolFailed: return "MediaToolFailed";
    case ErrorCode::TimeOutOfRange: return "TimeOutOfRange";
    case ErrorCode::NoAudioTrack: return "NoAudioTrack";
    case ErrorCode::InvalidCoordinate: return "InvalidCoordinate";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NoGpsData: return "NoGpsData";
    case ErrorCode::InvalidAnnotations: return "InvalidAnnotations";
    case ErrorCode::RootMissing: return "RootMissing";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string_view to_string(Severity severity) {
  switch (severity) {
    case Severity::Info: return "info";
    case Severity::Warning: return "warning";
    case Severity::Error: return "error";
  }
  return "info";
}

std::string_view to_string(SensorKind kind) {
  switch (kind) {
    case SensorKind::Accelerometer: return "accelerometer";
    case SensorKind::Gyroscope: return "gyroscope";
    case SensorKind::Magnetometer: return "magnetometer";
  }
  return "";
}

std::optional<std::string> find_sensor_name(const Instance& inst, SensorKind kind) {
  std::string_view needle;
  switch (kind) {
    case SensorKind::Accelerometer: needle = "accel"; break;
    case SensorKind::Gyroscope: needle = "gyro"; break;
    case SensorKind::Magnetometer: needle = "magnet"; break;
  }
  for (const auto& [name, series] : inst.sensors3) {
    const auto lower = detail::to_lower(name);
    if (lower.find(needle) != std::string::npos && lower.find("uncalibrated") == std::string::npos) {
      return name;
    }
  }
  return std::nullopt;
}

const Series<SensorSample3>* find_sensor(const Instance& inst, SensorKind kind) {
  auto name = find_sensor_name(inst, kind);
  if (!name) return nullptr;
  return &inst.sensors3.at(*name);
}

// ---------------------------------------------------------------------------
// metadata.json

namespace {

const std::vector<std::string>& known_metadata_keys() {
  static const std::vector<std::string> keys = {
      "device_model",   "os_version",     "app_version", "camera_resolution",
      "video_fps",      "sensor_rate_hz", "gps_rate_hz", "start_epoch_ms",
      "stop_epoch_ms",  "boot_anchor",    "mount_angle_deg", "orientation",
      "facility",       "city",           "country",     "instance_id"};
  return keys;
}

template <class T>
T optional_field(const json& doc, const char* key, T fallback) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return fallback;
  return it->get<T>();
}

}  // namespace

InstanceMetadata parse_metadata(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::MalformedJson, "metadata must be a JSON object");
  InstanceMetadata m;
  try {
    for (const char* key : {"start_epoch_ms", "stop_epoch_ms"}) {
      if (!doc.contains(key)) {
        throw Error(ErrorCode::MalformedJson, std::string("missing required key '") + key + "'");
      }
    }
    m.start_epoch_ms = doc.at("start_epoch_ms").get<std::int64_t>();
    m.stop_epoch_ms = doc.at("stop_epoch_ms").get<std::int64_t>();
    m.instance_id = optional_field<std::string>(doc, "instance_id", "");
    m.device_model = optional_field<std::string>(doc, "device_model", "");
    m.os_version = optional_field<std::string>(doc, "os_version", "");
    m.app_version = optional_field<std::string>(doc, "app_version", "");
    m.video_fps = optional_field<double>(doc, "video_fps", 0.0);
    m.sensor_rate_hz = optional_field<double>(doc, "sensor_rate_hz", 0.0);
    m.gps_rate_hz = optional_field<double>(doc, "gps_rate_hz", 0.0);
    m.mount_angle_deg = optional_field<double>(doc, "mount_angle_deg", 0.0);
    m.facility = optional_field<std::string>(doc, "facility", "");
    m.city = optional_field<std::string>(doc, "city", "");
    m.country = optional_field<std::string>(doc, "country", "");
    if (auto it = doc.find("camera_resolution"); it != doc.end() && !it->is_null()) {
      m.camera_resolution.width = it->at("width").get<int>();
      m.camera_resolution.height = it->at("height").get<int>();
    }
    if (auto it = doc.find("boot_anchor"); it != doc.end() && !it->is_null()) {
      m.boot_anchor = BootAnchor{it->at("elapsed_nanos").get<std::int64_t>(),
                                 it->at("epoch_ms").get<std::int64_t>()};
    }
    const auto orientation = optional_field<std::string>(doc, "orientation", "landscape");
    if (orientation == "landscape") {
      m.orientation = Orientation::Landscape;
    } else if (orientation == "portrait") {
      m.orientation = Orientation::Portrait;
    } else {
      throw Error(ErrorCode::MalformedJson, "orientation must be 'landscape' or 'portrait'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedJson, e.what());
  }
  const auto& known = known_metadata_keys();
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      m.extra[it.key()] = it.value();
    }
  }
  return m;
}

json metadata_to_json(const InstanceMetadata& m) {
  json doc = m.extra.is_object() ? m.extra : json::object();
  doc["device_model"] = m.device_model;
  doc["os_version"] = m.os_version;
  doc["app_version"] = m.app_version;
  doc["camera_resolution"] = {{"width", m.camera_resolution.width},
                              {"height", m.camera_resolution.height}};
  doc["video_fps"] = m.video_fps;
  doc["sensor_rate_hz"] = m.sensor_rate_hz;
  doc["gps_rate_hz"] = m.gps_rate_hz;
  doc["start_epoch_ms"] = m.start_epoch_ms;
  doc["stop_epoch_ms"] = m.stop_epoch_ms;
  if (m.boot_anchor) {
    doc["boot_anchor"] = {{"elapsed_nanos", m.boot_anchor->elapsed_nanos},
                          {"epoch_ms", m.boot_anchor->epoch_ms}};
  }
  doc["mount_angle_deg"] = m.mount_angle_deg;
  doc["orientation"] = m.orientation == Orientation::Landscape ? "landscape" : "portrait";
  doc["facility"] = m.facility;
  doc["city"] = m.city;
  doc["country"] = m.country;
  return doc;
}

InstanceMetadata read_metadata_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorCode::MissingMetadata, "no metadata.json in " + path.parent_path().string());
  }
  json doc;
  try {
    doc = json::parse(detail::read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedJson, path.string() + ": " + e.what());
  }
  auto metadata = parse_metadata(doc);
  metadata.instance_id = path.parent_path().filename().string();
  return metadata;
}

// ---------------------------------------------------------------------------
// CSV parsing

namespace {

class CsvReader {
 public:
  CsvReader(std::string file, std::string text) : file_(std::move(file)), text_(std::move(text)) {}

  // Returns false at end of input; skips blank lines.
  bool next(std::string_view& line) {
    while (pos_ < text_.size()) {
      auto end = text_.find('\n', pos_);
      if (end == std::string::npos) end = text_.size();
      line = std::string_view(text_).substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!line.empty()) return true;
    }
    return false;
  }

  void expect_header(std::string_view expected) {
    std::string_view line;
    if (!next(line)) {
      throw Error(ErrorCode::SchemaMismatch,
                  file_ + ": expected header '" + std::string(expected) + "', found empty file");
    }
    if (line != expected) {
      throw Error(ErrorCode::SchemaMismatch, file_ + ": expected header '" + std::string(expected) +
                                                 "', found '" + std::string(line) + "'");
    }
  }

  std::vector<std::string_view> fields(std::string_view line, std::size_t count) const {
    auto out = detail::split(line, ',');
    if (out.size() != count) {
      fail("expected " + std::to_string(count) + " fields, found " + std::to_string(out.size()));
    }
    return out;
  }

  template <class T>
  T integer(std::string_view field, const char* what) const {
    T value{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      fail(std::string("invalid integer for ") + what + ": '" + std::string(field) + "'");
    }
    return value;
  }

  double real(std::string_view field, const char* what) const {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      fail(std::string("invalid number for ") + what + ": '" + std::string(field) + "'");
    }
    if (!std::isfinite(value)) fail(std::string("non-finite value for ") + what);
    return value;
  }

  bool boolean(std::string_view field, const char* what) const {
    if (field == "true" || field == "1") return true;
    if (field == "false" || field == "0") return false;
    fail(std::string("invalid boolean for ") + what + ": '" + std::string(field) + "'");
  }

  [[noreturn]] void fail(const std::string& reason) const { throw CsvError(file_, line_no_, reason); }

 private:
  std::string file_;
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void note(Instance& inst, Severity severity, std::string code, std::string message) {
  inst.load_report.push_back({severity, std::move(code), std::move(message)});
}

template <class Sample, class Key>
void sort_stream(std::vector<Sample>& series, Key key, bool& reordered) {
  auto less = [&](const Sample& a, const Sample& b) { return key(a) < key(b); };
  if (!std::is_sorted(series.begin(), series.end(), less)) {
    reordered = true;
    std::stable_sort(series.begin(), series.end(), less);
  }
}

template <class Sample>
void sort_sensor_streams(std::map<std::string, Series<Sample>>& streams, bool& reordered) {
  for (auto& [name, series] : streams) {
    sort_stream(series, [](const Sample& s) { return s.t_raw_nanos; }, reordered);
  }
}

void parse_sensors_three(Instance& inst, CsvReader& in) {
  in.expect_header(headers::kSensorsThree);
  std::string_view line;
  while (in.next(line)) {
    auto f = in.fields(line, 6);
    SensorSample3 s;
    s.t_raw_nanos = in.integer<std::int64_t>(f[0], "timestamp_nanos");
    if (s.t_raw_nanos < 0) in.fail("negative timestamp");
    s.t_ms = kNaN;
    s.sensor_name = std::string(f[1]);
    if (s.sensor_name.empty()) in.fail("empty sensor_name");
    s.accuracy = in.integer<int>(f[2], "accuracy");
    s.x = in.real(f[3], "x");
    s.y = in.real(f[4], "y");
    s.z = in.real(f[5], "z");
    inst.sensors3[s.sensor_name].push_back(std::move(s));
  }
}

void parse_sensors_one(Instance& inst, CsvReader& in) {
  in.expect_header(headers::kSensorsOne);
  std::string_view line;
  while (in.next(line)) {
    auto f = in.fields(line, 4);
    SensorSample1 s;
    s.t_raw_nanos = in.integer<std::int64_t>(f[0], "timestamp_nanos");
    if (s.t_raw_nanos < 0) in.fail("negative timestamp");
    s.t_ms = kNaN;
    s.sensor_name = std::string(f[1]);
    if (s.sensor_name.empty()) in.fail("empty sensor_name");
    s.accuracy = in.integer<int>(f[2], "accuracy");
    s.value = in.real(f[3], "value");
    inst.sensors1[s.sensor_name].push_back(std::move(s));
  }
}

void parse_sensors_uncalibrated(Instance& inst, CsvReader& in) {
  in.expect_header(headers::kSensorsThreeUncalibrated);
  std::string_view line;
  while (in.next(line)) {
    auto f = in.fields(line, 9);
    SensorSampleU3 s;
    s.t_raw_nanos = in.integer<std::int64_t>(f[0], "timestamp_nanos");
    if (s.t_raw_nanos < 0) in.fail("negative timestamp");
    s.t_ms = kNaN;
    s.sensor_name = std::string(f[1]);
    if (s.sensor_name.empty()) in.fail("empty sensor_name");
    s.accuracy = in.integer<int>(f[2], "accuracy");
    s.x = in.real(f[3], "x");
    s.y = in.real(f[4], "y");
    s.z = in.real(f[5], "z");
    s.bias_x = in.real(f[6], "bias_x");
    s.bias_y = in.real(f[7], "bias_y");
    s.bias_z = in.real(f[8], "bias_z");
    inst.sensors_u3[s.sensor_name].push_back(std::move(s));
  }
}

void parse_gps(Instance& inst, CsvReader& in) {
  in.expect_header(headers::kGps);
  std::string_view line;
  while (in.next(line)) {
    auto f = in.fields(line, 4);
    GpsFix fix;
    fix.t_epoch_ms = in.integer<std::int64_t>(f[0], "timestamp_ms");
    fix.lat = in.real(f[1], "latitude");
    fix.lon = in.real(f[2], "longitude");
    fix.accuracy_m = in.real(f[3], "accuracy_m");
    inst.gps.push_back(fix);
  }
}

void parse_consumption(Instance& inst, CsvReader& in) {
  in.expect_header(headers::kConsumption);
  std::string_view line;
  while (in.next(line)) {
    auto f = in.fields(line, 3);
    BatterySample b;
    b.t_epoch_ms = in.integer<std::int64_t>(f[0], "timestamp_ms");
    b.battery_pct = in.real(f[1], "battery_pct");
    b.charging = in.boolean(f[2], "charging");
    inst.battery.push_back(b);
  }
}

using Parser = void (*)(Instance&, CsvReader&);

struct CsvFile {
  std::string_view name;
  Parser parse;
  bool required;
};

}  // namespace

Instance load_instance(const fs::path& dir, const LoadOptions& options) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::MissingMetadata, dir.string() + " is not a directory");
  }
  Instance inst;
  inst.dir = dir;
  inst.metadata = read_metadata_file(dir / files::kMetadata);

  const CsvFile csv_files[] = {
      {files::kSensorsThree, parse_sensors_three, true},
      {files::kSensorsThreeUncalibrated, parse_sensors_uncalibrated, true},
      {files::kSensorsOne, parse_sensors_one, false},
      {files::kGps, parse_gps, true},
      {files::kConsumption, parse_consumption, false},
  };
  for (const auto& file : csv_files) {
    const auto path = dir / file.name;
    if (!fs::is_regular_file(path)) {
      if (file.required) {
        note(inst, Severity::Error, "file.missing(" + std::string(file.name) + ")",
             "required file " + std::string(file.name) + " is absent");
      } else {
        note(inst, Severity::Info, "file.absent(" + std::string(file.name) + ")",
             "optional file " + std::string(file.name) + " is absent");
      }
      continue;
    }
    CsvReader reader(std::string(file.name), detail::read_file(path));
    file.parse(inst, reader);
  }

  auto flag = [&](std::string_view file, bool reordered) {
    if (reordered) {
      note(inst, Severity::Warning, "unsorted: " + std::string(file),
           std::string(file) + " rows were not in time order and have been sorted");
    }
  };
  bool reordered = false;
  sort_sensor_streams(inst.sensors3, reordered);
  flag(files::kSensorsThree, std::exchange(reordered, false));
  sort_sensor_streams(inst.sensors_u3, reordered);
  flag(files::kSensorsThreeUncalibrated, std::exchange(reordered, false));
  sort_sensor_streams(inst.sensors1, reordered);
  flag(files::kSensorsOne, std::exchange(reordered, false));
  sort_stream(inst.gps, [](const GpsFix& f) { return f.t_epoch_ms; }, reordered);
  flag(files::kGps, std::exchange(reordered, false));
  sort_stream(inst.battery, [](const BatterySample& b) { return b.t_epoch_ms; }, reordered);
  flag(files::kConsumption, std::exchange(reordered, false));

  if (fs::is_regular_file(dir / files::kVideo)) {
    inst.video_path = dir / files::kVideo;
  } else {
    note(inst, Severity::Info, "sensor_only", "no video.mp4; instance is sensor-only");
  }

  if (options.apply_timeline && inst.metadata.boot_anchor) apply_timeline(inst);
  return inst;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void add(ValidationReport& report, Severity severity, std::string code, std::string message) {
  report.push_back({severity, std::move(code), std::move(message)});
}

constexpr double kRateTolerance = 0.20;

constexpr double kPaperSensorRateHz = 50.0;
constexpr double kPaperGpsRateMaxHz = 15.0;
constexpr double kPaperGpsRateMinHz = 1.0;
constexpr double kPaperFps = 30.0;
constexpr int kPaperMinWidth = 1280;
constexpr int kPaperMinHeight = 720;

bool within(double observed, double expected, double tolerance) {
  return std::abs(observed - expected) <= tolerance * expected;
}

template <class Sample>
std::vector<double> raw_times_ms(const Series<Sample>& series) {
  std::vector<double> t;
  t.reserve(series.size());
  for (const auto& s : series) t.push_back(static_cast<double>(s.t_raw_nanos) / 1e6);
  return t;
}

}  // namespace

ValidationReport validate_instance(const Instance& inst, Profile profile) {
  ValidationReport report;
  const auto& m = inst.metadata;

  for (const auto& f : inst.load_report) {
    if (f.severity != Severity::Info) report.push_back(f);
  }

  if (!(m.start_epoch_ms < m.stop_epoch_ms)) {
    add(report, Severity::Error, "metadata.interval", "start_epoch_ms must precede stop_epoch_ms");
  }
  if (!m.boot_anchor) {
    add(report, Severity::Error, "metadata.anchor", "boot_anchor is required for clock alignment");
  }

  for (const auto& [name, series] : inst.sensors3) {
    for (const auto& s : series) {
      if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z) || s.t_raw_nanos < 0) {
        add(report, Severity::Error, "sensor.value(" + name + ")", "non-finite value or negative time");
        break;
      }
    }
  }
  for (const auto& [name, series] : inst.sensors_u3) {
    for (const auto& s : series) {
      if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z) ||
          !std::isfinite(s.bias_x) || !std::isfinite(s.bias_y) || !std::isfinite(s.bias_z)) {
        add(report, Severity::Error, "sensor.value(" + name + ")", "non-finite value or bias");
        break;
      }
    }
  }
  for (const auto& [name, series] : inst.sensors1) {
    for (const auto& s : series) {
      if (!std::isfinite(s.value)) {
        add(report, Severity::Error, "sensor.value(" + name + ")", "non-finite value");
        break;
      }
    }
  }

  for (std::size_t i = 0; i < inst.gps.size(); ++i) {
    const auto& fix = inst.gps[i];
    if (!(fix.lat >= -90.0 && fix.lat <= 90.0 && fix.lon >= -180.0 && fix.lon <= 180.0)) {
      add(report, Severity::Error, "gps.range",
          "fix " + std::to_string(i) + " has coordinates out of range");
      break;
    }
  }
  for (std::size_t i = 0; i < inst.gps.size(); ++i) {
    if (!(inst.gps[i].accuracy_m >= 0.0)) {
      add(report, Severity::Error, "gps.accuracy", "fix " + std::to_string(i) + " has negative accuracy");
      break;
    }
  }
  for (std::size_t i = 0; i < inst.battery.size(); ++i) {
    const double pct = inst.battery[i].battery_pct;
    if (!(pct >= 0.0 && pct <= 100.0)) {
      add(report, Severity::Error, "battery.range", "sample " + std::to_string(i) + " outside 0-100%");
      break;
    }
  }

  // Observed rates against the rates declared in metadata.
  if (m.sensor_rate_hz > 0) {
    for (auto kind : {SensorKind::Accelerometer, SensorKind::Gyroscope, SensorKind::Magnetometer}) {
      const auto* series = find_sensor(inst, kind);
      if (!series) continue;
      const double rate = observed_rate_hz(raw_times_ms(*series));
      if (rate > 0 && !within(rate, m.sensor_rate_hz, kRateTolerance)) {
        add(report, Severity::Warning, "rate.mismatch(" + std::string(to_string(kind)) + ")",
            "observed " + detail::format_double(rate) + " Hz, metadata declares " +
                detail::format_double(m.sensor_rate_hz) + " Hz");
      }
    }
  }
  if (inst.gps.size() >= 2) {
    std::vector<double> t;
    for (const auto& f : inst.gps) t.push_back(static_cast<double>(f.t_epoch_ms));
    const double rate = observed_rate_hz(t);
    const double upper = std::max(m.gps_rate_hz, kPaperGpsRateMinHz) * (1.0 + kRateTolerance);
    const double lower = kPaperGpsRateMinHz * (1.0 - kRateTolerance);
    if (rate > 0 && (rate > upper || rate < lower)) {
      add(report, Severity::Warning, "rate.mismatch(gps)",
          "observed " + detail::format_double(rate) + " Hz");
    }
  }

  if (profile == Profile::Paper) {
    if (m.camera_resolution.width < kPaperMinWidth || m.camera_resolution.height < kPaperMinHeight) {
      add(report, Severity::Error, "profile.resolution", "camera resolution below 1280x720");
    }
    if (!within(m.sensor_rate_hz, kPaperSensorRateHz, kRateTolerance)) {
      add(report, Severity::Error, "profile.sensor_rate", "sensor rate must be about 50 Hz");
    }
    if (!(m.gps_rate_hz >= kPaperGpsRateMinHz && m.gps_rate_hz <= kPaperGpsRateMaxHz)) {
      add(report, Severity::Error, "profile.gps_rate", "GPS rate must lie in 1-15 Hz");
    }
    if (!within(m.video_fps, kPaperFps, kRateTolerance)) {
      add(report, Severity::Error, "profile.fps", "video must be recorded at about 30 fps");
    }
    for (auto kind : {SensorKind::Accelerometer, SensorKind::Gyroscope, SensorKind::Magnetometer}) {
      const auto* series = find_sensor(inst, kind);
      if (!series || series->empty()) {
        add(report, Severity::Error, "sensor.missing(" + std::string(to_string(kind)) + ")",
            std::string(to_string(kind)) + " stream is required");
      }
    }
  }
  return report;
}

bool passes(const ValidationReport& report) {
  return std::none_of(report.begin(), report.end(),
                      [](const Finding& f) { return f.severity == Severity::Error; });
}

// ---------------------------------------------------------------------------
// Emit

namespace {

using detail::format_double;

template <class Sample>
std::vector<const Sample*> merged_by_time(const std::map<std::string, Series<Sample>>& streams) {
  std::vector<std::tuple<std::int64_t, std::size_t, std::size_t, const Sample*>> rows;
  std::size_t stream_index = 0;
  for (const auto& [name, series] : streams) {
    for (std::size_t i = 0; i < series.size(); ++i) {
      rows.emplace_back(series[i].t_raw_nanos, stream_index, i, &series[i]);
    }
    ++stream_index;
  }
  std::sort(rows.begin(), rows.end());
  std::vector<const Sample*> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(std::get<3>(r));
  return out;
}

}  // namespace

void emit_instance(const Instance& inst, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::IoFailure, "cannot create directory " + dir.string());
  }

  {
    std::string out(headers::kSensorsThree);
    out += '\n';
    for (const auto* s : merged_by_time(inst.sensors3)) {
      out += std::to_string(s->t_raw_nanos) + ',' + s->sensor_name + ',' +
             std::to_string(s->accuracy) + ',' + format_double(s->x) + ',' + format_double(s->y) +
             ',' + format_double(s->z) + '\n';
    }
    detail::write_file(dir / files::kSensorsThree, out);
  }
  {
    std::string out(headers::kSensorsThreeUncalibrated);
    out += '\n';
    for (const auto* s : merged_by_time(inst.sensors_u3)) {
      out += std::to_string(s->t_raw_nanos) + ',' + s->sensor_name + ',' +
             std::to_string(s->accuracy) + ',' + format_double(s->x) + ',' + format_double(s->y) +
             ',' + format_double(s->z) + ',' + format_double(s->bias_x) + ',' +
             format_double(s->bias_y) + ',' + format_double(s->bias_z) + '\n';
    }
    detail::write_file(dir / files::kSensorsThreeUncalibrated, out);
  }
  {
    std::string out(headers::kSensorsOne);
    out += '\n';
    for (const auto* s : merged_by_time(inst.sensors1)) {
      out += std::to_string(s->t_raw_nanos) + ',' + s->sensor_name + ',' +
             std::to_string(s->accuracy) + ',' + format_double(s->value) + '\n';
    }
    detail::write_file(dir / files::kSensorsOne, out);
  }
  {
    std::string out(headers::kGps);
    out += '\n';
    for (const auto& f : inst.gps) {
      out += std::to_string(f.t_epoch_ms) + ',' + format_double(f.lat) + ',' + format_double(f.lon) +
             ',' + format_double(f.accuracy_m) + '\n';
    }
    detail::write_file(dir / files::kGps, out);
  }
  {
    std::string out(headers::kConsumption);
    out += '\n';
    for (const auto& b : inst.battery) {
      out += std::to_string(b.t_epoch_ms) + ',' + format_double(b.battery_pct) + ',' +
             (b.charging ? "true" : "false") + '\n';
    }
    detail::write_file(dir / files::kConsumption, out);
  }
  detail::write_file(dir / files::kMetadata, metadata_to_json(inst.metadata).dump(2) + "\n");

  if (inst.video_path) {
    const auto target = dir / files::kVideo;
    if (!fs::exists(target) || !fs::equivalent(*inst.video_path, target)) {
      fs::copy_file(*inst.video_path, target, fs::copy_options::overwrite_existing, ec);
      if (ec) throw Error(ErrorCode::IoFailure, "cannot copy video: " + ec.message());
    }
  }
}

}  // namespace sideseeing
