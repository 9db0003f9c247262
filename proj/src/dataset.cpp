#include "sideseeing/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "sideseeing/error.hpp"
#include "sideseeing/snippet.hpp"
#include "sideseeing/taxonomy.hpp"
#include "sideseeing/timeline.hpp"
#include "util.hpp"

namespace sideseeing {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Scanning

const DatasetEntry* DatasetIndex::find(const std::string& instance_id) const {
  for (const auto& e : entries) {
    if (e.instance_id == instance_id) return &e;
  }
  return nullptr;
}

std::size_t DatasetIndex::error_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const DatasetEntry& e) { return !e.ok; }));
}

std::vector<std::string> DatasetIndex::cities() const {
  std::set<std::string> names;
  for (const auto& e : entries) names.insert(e.city);
  return {names.begin(), names.end()};
}

namespace {

bool hidden(const fs::path& p) {
  const auto name = p.filename().string();
  return name.empty() || name.front() == '.';
}

std::vector<fs::path> sorted_subdirs(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_directory() && !hidden(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

DatasetIndex scan_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::RootMissing, root.string() + " is not a directory");
  DatasetIndex index;
  index.root = root;
  for (const auto& city_dir : sorted_subdirs(root)) {
    for (const auto& inst_dir : sorted_subdirs(city_dir)) {
      if (!fs::exists(inst_dir / files::kMetadata)) continue;
      DatasetEntry e;
      e.instance_id = inst_dir.filename().string();
      e.city = city_dir.filename().string();
      e.path = inst_dir;
      try {
        const auto m = read_metadata_file(inst_dir / files::kMetadata);
        if (!m.city.empty()) e.city = m.city;
        e.country = m.country;
      } catch (const Error& err) {
        e.ok = false;
        e.error = err.what();
      }
      index.entries.push_back(std::move(e));
    }
  }
  std::stable_sort(index.entries.begin(), index.entries.end(),
                   [](const DatasetEntry& a, const DatasetEntry& b) { return a.instance_id < b.instance_id; });
  for (std::size_t i = 1; i < index.entries.size(); ++i) {
    if (index.entries[i].instance_id == index.entries[i - 1].instance_id) {
      index.entries[i].ok = false;
      index.entries[i].error = "duplicate instance id (also at " + index.entries[i - 1].path.string() + ")";
    }
  }
  return index;
}

json to_json(const DatasetIndex& index) {
  json entries = json::array();
  for (const auto& e : index.entries) {
    entries.push_back({{"instance_id", e.instance_id},
                       {"city", e.city},
                       {"country", e.country},
                       {"path", fs::relative(e.path, index.root).generic_string()},
                       {"status", e.ok ? "ok" : "error"},
                       {"error", e.error}});
  }
  return {{"root", index.root.generic_string()}, {"entries", entries}};
}

json to_geojson(const DatasetIndex& index, const TrackOptions& track) {
  std::vector<Instance> instances;
  for (const auto& e : index.entries) {
    if (!e.ok) continue;
    instances.push_back(load_instance(e.path));
  }
  return to_geojson(instances, track);
}

// ---------------------------------------------------------------------------
// Synthetic generator

namespace {

constexpr double kGravity = 9.81;
constexpr double kStepHz = 2.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kAudioRateHz = 16000;
constexpr double kToneAmplitude = 0.5;
constexpr std::int64_t kEpochBaseMs = 1704067200000;  // 2024-01-01T00:00:00Z

class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal(double sigma) {
    if (sigma == 0.0) return 0.0;
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

struct Vec3 {
  double x = 0, y = 0, z = 0;
};
Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }

std::string slug(std::string_view text) {
  static const std::pair<std::string_view, char> kFolds[] = {
      {"á", 'a'}, {"à", 'a'}, {"â", 'a'}, {"ã", 'a'}, {"é", 'e'}, {"ê", 'e'}, {"í", 'i'},
      {"ó", 'o'}, {"ô", 'o'}, {"õ", 'o'}, {"ú", 'u'}, {"ü", 'u'}, {"ç", 'c'}, {"Á", 'a'},
      {"É", 'e'}, {"Í", 'i'}, {"Ó", 'o'}, {"Ú", 'u'}, {"Ç", 'c'}, {"Ã", 'a'}, {"Õ", 'o'}};
  std::string out;
  for (std::size_t i = 0; i < text.size();) {
    bool folded = false;
    for (const auto& [from, to] : kFolds) {
      if (text.substr(i, from.size()) == from) {
        out += to;
        i += from.size();
        folded = true;
        break;
      }
    }
    if (folded) continue;
    const auto c = static_cast<unsigned char>(text[i++]);
    if (std::isalnum(c) && c < 128) {
      out += static_cast<char>(std::tolower(c));
    } else if (!out.empty() && out.back() != '-') {
      out += '-';
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out.empty() ? "city" : out;
}

struct Schedule {
  double total_s = 0.0;
  std::int64_t duration_ms = 0;
  std::vector<std::pair<double, double>> pauses_s;  // [start, end)
  std::vector<std::pair<double, double>> turns_s;   // [start, end)
  std::vector<double> turn_rates;                   // rad/s
  double speed = 0.0;

  bool moving(double t_s) const {
    if (t_s < 0 || t_s >= total_s) return false;
    for (const auto& [a, b] : pauses_s) {
      if (t_s >= a && t_s < b) return false;
    }
    return true;
  }
  double turn_rate(double t_s) const {
    double w = 0.0;
    for (std::size_t i = 0; i < turns_s.size(); ++i) {
      if (t_s >= turns_s[i].first && t_s < turns_s[i].second) w += turn_rates[i];
    }
    return w;
  }
};

Schedule make_schedule(const RouteSpec& route) {
  if (!(route.length_m > 0) || !(route.walk_speed_mps > 0) || !(route.imu_rate_hz > 0) ||
      !(route.gps_rate_hz > 0) || !(route.fps > 0) || !(route.turn_duration_s > 0)) {
    throw Error(ErrorCode::InvalidArgument, "route lengths, speeds and rates must be positive");
  }
  Schedule s;
  s.speed = route.walk_speed_mps;
  double pause_total = 0.0;
  for (const auto& p : route.pauses) {
    if (p.duration_s < 0) throw Error(ErrorCode::InvalidArgument, "negative pause duration");
    pause_total += p.duration_s;
  }
  s.total_s = route.length_m / route.walk_speed_mps + pause_total;
  s.duration_ms = std::llround(s.total_s * 1000.0);
  for (const auto& p : route.pauses) {
    if (p.duration_s == 0) continue;
    const double start = p.offset_s >= 0 ? p.offset_s : s.total_s + p.offset_s;
    s.pauses_s.emplace_back(std::max(0.0, start), std::min(s.total_s, start + p.duration_s));
  }
  std::sort(s.pauses_s.begin(), s.pauses_s.end());
  for (std::size_t i = 1; i < s.pauses_s.size(); ++i) {
    if (s.pauses_s[i].first < s.pauses_s[i - 1].second) {
      throw Error(ErrorCode::InvalidArgument, "configured pauses overlap");
    }
  }
  for (const auto& t : route.turns) {
    s.turns_s.emplace_back(t.offset_s, t.offset_s + route.turn_duration_s);
    s.turn_rates.push_back(t.angle_deg * std::numbers::pi / 180.0 / route.turn_duration_s);
  }
  return s;
}

// Heading and planar position (east, north) sampled every millisecond.
struct Trajectory {
  std::vector<double> heading, east, north;

  double interp(const std::vector<double>& v, double t_ms) const {
    if (t_ms <= 0) return v.front();
    const auto i = static_cast<std::size_t>(t_ms);
    if (i + 1 >= v.size()) return v.back();
    const double w = t_ms - static_cast<double>(i);
    return v[i] + (v[i + 1] - v[i]) * w;
  }
};

Trajectory integrate(const Schedule& s, double initial_heading_rad) {
  const auto n = static_cast<std::size_t>(s.duration_ms) + 1;
  Trajectory tr;
  tr.heading.resize(n);
  tr.east.resize(n);
  tr.north.resize(n);
  tr.heading[0] = initial_heading_rad;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double mid_s = (static_cast<double>(k) + 0.5) / 1000.0;
    tr.heading[k + 1] = tr.heading[k] + s.turn_rate(mid_s) * 0.001;
    const double h = 0.5 * (tr.heading[k] + tr.heading[k + 1]);
    const double v = s.moving(mid_s) ? s.speed : 0.0;
    tr.east[k + 1] = tr.east[k] + v * std::cos(h) * 0.001;
    tr.north[k + 1] = tr.north[k] + v * std::sin(h) * 0.001;
  }
  return tr;
}

// Device axes for a chest-mounted phone in landscape tilted by the mount angle:
// x points mostly up, y to the walker's left, z mostly backwards.
struct DeviceFrame {
  Vec3 up, forward, left;
};

DeviceFrame device_frame(double mount_angle_deg) {
  const double tilt = (90.0 - mount_angle_deg) * std::numbers::pi / 180.0;
  const double c = std::cos(tilt), s = std::sin(tilt);
  return {{c, 0.0, s}, {s, 0.0, -c}, {0.0, 1.0, 0.0}};
}

std::vector<std::int64_t> sample_offsets_ns(double rate_hz, std::int64_t duration_ms) {
  std::vector<std::int64_t> out;
  const std::int64_t limit = duration_ms * 1000000;
  for (std::int64_t k = 0;; ++k) {
    const auto ns = std::llround(static_cast<double>(k) * 1e9 / rate_hz);
    if (ns >= limit) break;
    out.push_back(ns);
  }
  return out;
}

std::vector<std::int64_t> sample_offsets_ms(double rate_hz, std::int64_t duration_ms) {
  std::vector<std::int64_t> out;
  for (std::int64_t k = 0;; ++k) {
    const auto ms = std::llround(static_cast<double>(k) * 1000.0 / rate_hz);
    if (ms >= duration_ms) break;
    out.push_back(ms);
  }
  return out;
}

json to_json(const IntervalTruth& i) { return {{"t_start_ms", i.t_start_ms}, {"t_end_ms", i.t_end_ms}}; }

}  // namespace

std::pair<Instance, InstanceTruth> synthesize_instance(const RouteSpec& route, const CitySpec& city,
                                                       std::uint64_t seed, const std::string& instance_id) {
  const Schedule sched = make_schedule(route);
  const Trajectory traj = integrate(sched, route.initial_heading_deg * std::numbers::pi / 180.0);
  const DeviceFrame frame = device_frame(route.mount_angle_deg);
  Random rng(seed);

  const std::int64_t start_ms = kEpochBaseMs + static_cast<std::int64_t>(seed % 100000) * 3600000;
  const std::int64_t boot_ns = (1000 + static_cast<std::int64_t>(seed % 100000) * 37) * 1000000000LL;

  Instance inst;
  auto& m = inst.metadata;
  m.instance_id = instance_id;
  m.device_model = "SynthPhone";
  m.os_version = "Android 13";
  m.app_version = "synthetic-1";
  m.camera_resolution = {1280, 720};
  m.video_fps = route.fps;
  m.sensor_rate_hz = route.imu_rate_hz;
  m.gps_rate_hz = route.gps_rate_hz;
  m.start_epoch_ms = start_ms;
  m.stop_epoch_ms = start_ms + sched.duration_ms;
  m.boot_anchor = BootAnchor{boot_ns, start_ms};
  m.mount_angle_deg = route.mount_angle_deg;
  m.orientation = Orientation::Landscape;
  m.facility = route.facility;
  m.city = city.name;
  m.country = city.country;
  m.extra = {{"generator", "sideseeing-synth"}, {"seed", seed}};

  const Vec3 field_world{0.0, 20.0, -40.0};  // east, north, up (µT)
  const Vec3 mag_bias{5.0, -3.0, 2.0};

  auto& acc = inst.sensors3["accelerometer"];
  auto& gyr = inst.sensors3["gyroscope"];
  auto& mag = inst.sensors3["magnetometer"];
  auto& mag_u = inst.sensors_u3["magnetometer_uncalibrated"];
  const Timeline clock = timeline_of(m);
  for (const auto off_ns : sample_offsets_ns(route.imu_rate_hz, sched.duration_ms)) {
    const double t_ms = static_cast<double>(off_ns) / 1e6;
    const double t_s = t_ms / 1000.0;
    const double moving = sched.moving(t_s) ? 1.0 : 0.0;
    const double omega = sched.turn_rate(t_s);
    const double phase = kTwoPi * kStepHz * t_s;
    const std::int64_t raw = boot_ns + off_ns;
    const double t_epoch = clock.to_epoch_ms(raw);

    const Vec3 a = (kGravity + moving * route.gait_amplitude * std::sin(phase)) * frame.up +
                   (moving * 0.6 * std::sin(phase + 0.5)) * frame.forward +
                   (moving * (0.3 * std::sin(phase / 2.0) + sched.speed * omega)) * frame.left;
    acc.push_back({raw, t_epoch, "accelerometer", 3, a.x + rng.normal(route.noise.accel),
                   a.y + rng.normal(route.noise.accel), a.z + rng.normal(route.noise.accel)});

    const Vec3 w = omega * frame.up + (moving * 0.2 * std::sin(phase / 2.0)) * frame.forward +
                   (moving * 0.15 * std::sin(phase)) * frame.left;
    gyr.push_back({raw, t_epoch, "gyroscope", 3, w.x + rng.normal(route.noise.gyro),
                   w.y + rng.normal(route.noise.gyro), w.z + rng.normal(route.noise.gyro)});

    const double h = traj.interp(traj.heading, t_ms);
    const double b_fwd = field_world.x * std::cos(h) + field_world.y * std::sin(h);
    const double b_left = -field_world.x * std::sin(h) + field_world.y * std::cos(h);
    const Vec3 b = b_fwd * frame.forward + b_left * frame.left + field_world.z * frame.up;
    const Vec3 bn{b.x + rng.normal(route.noise.mag), b.y + rng.normal(route.noise.mag),
                  b.z + rng.normal(route.noise.mag)};
    mag.push_back({raw, t_epoch, "magnetometer", 3, bn.x, bn.y, bn.z});
    mag_u.push_back({raw, t_epoch, "magnetometer_uncalibrated", 3, bn.x + mag_bias.x, bn.y + mag_bias.y,
                     bn.z + mag_bias.z, mag_bias.x, mag_bias.y, mag_bias.z});
  }

  auto& prox = inst.sensors1["proximity"];
  for (const auto off_ns : sample_offsets_ns(5.0, sched.duration_ms)) {
    prox.push_back({boot_ns + off_ns, clock.to_epoch_ms(boot_ns + off_ns), "proximity", 3, 5.0});
  }

  const double lat0 = city.origin.lat * std::numbers::pi / 180.0;
  for (const auto off : sample_offsets_ms(route.gps_rate_hz, sched.duration_ms)) {
    const double t = static_cast<double>(off);
    const double east = traj.interp(traj.east, t) + rng.normal(route.noise.gps_m);
    const double north = traj.interp(traj.north, t) + rng.normal(route.noise.gps_m);
    GpsFix fix;
    fix.t_epoch_ms = start_ms + off;
    fix.lat = city.origin.lat + north / kEarthRadiusM * 180.0 / std::numbers::pi;
    fix.lon = city.origin.lon + east / (kEarthRadiusM * std::cos(lat0)) * 180.0 / std::numbers::pi;
    fix.accuracy_m = 4.0;
    inst.gps.push_back(fix);
  }

  for (const auto off : sample_offsets_ms(1.0, sched.duration_ms)) {
    inst.battery.push_back({start_ms + off, 80.0 - 0.01 * static_cast<double>(off) / 1000.0, false});
  }
  inst.on_timeline = true;

  InstanceTruth truth;
  truth.instance_id = instance_id;
  truth.city = city.name;
  truth.country = city.country;
  truth.facility = route.facility;
  truth.seed = seed;
  truth.start_epoch_ms = m.start_epoch_ms;
  truth.stop_epoch_ms = m.stop_epoch_ms;
  truth.distance_m = route.length_m;
  for (const auto& [a, b] : sched.pauses_s) {
    truth.pauses.push_back({static_cast<double>(start_ms) + a * 1000.0, static_cast<double>(start_ms) + b * 1000.0});
  }
  for (std::size_t i = 0; i < route.turns.size(); ++i) {
    truth.turns.push_back({static_cast<double>(start_ms) + sched.turns_s[i].first * 1000.0,
                           static_cast<double>(start_ms) + sched.turns_s[i].second * 1000.0,
                           route.turns[i].angle_deg});
    truth.net_heading_deg += route.turns[i].angle_deg;
  }
  truth.counts = {{"accelerometer", static_cast<std::int64_t>(acc.size())},
                  {"gyroscope", static_cast<std::int64_t>(gyr.size())},
                  {"magnetometer", static_cast<std::int64_t>(mag.size())},
                  {"magnetometer_uncalibrated", static_cast<std::int64_t>(mag_u.size())},
                  {"proximity", static_cast<std::int64_t>(prox.size())},
                  {"gps", static_cast<std::int64_t>(inst.gps.size())},
                  {"battery", static_cast<std::int64_t>(inst.battery.size())}};
  truth.video_frames = std::llround(static_cast<double>(sched.duration_ms) * route.fps / 1000.0);
  for (const auto& tone : route.tones) truth.tones.push_back({tone.start_s * 1000.0, tone.end_s * 1000.0});
  return {std::move(inst), std::move(truth)};
}

namespace {

void write_video(const RouteSpec& route, const InstanceTruth& truth, std::int64_t duration_ms,
                 const fs::path& dir, const MediaTool& media) {
  const auto frames = truth.video_frames;
  std::string video(static_cast<std::size_t>(frames) * kWatermarkWidth * kWatermarkHeight, '\0');
  for (std::int64_t f = 0; f < frames; ++f) {
    auto* px = video.data() + static_cast<std::size_t>(f) * kWatermarkWidth * kWatermarkHeight;
    for (int b = 0; b < kWatermarkBits; ++b) {
      const char value = ((f >> b) & 1) ? static_cast<char>(255) : static_cast<char>(0);
      for (int y = 0; y < kWatermarkHeight; ++y) {
        for (int x = 8 * b; x < 8 * b + 8; ++x) px[y * kWatermarkWidth + x] = value;
      }
    }
  }
  const auto video_raw = dir / ".video.gray";
  detail::write_file(video_raw, video);

  fs::path audio_raw = dir / ".audio.s16le";
  if (route.audio) {
    const auto n = static_cast<std::size_t>(duration_ms * kAudioRateHz / 1000);
    std::string pcm(n * 2, '\0');
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / kAudioRateHz;
      double v = 0.0;
      for (const auto& tone : route.tones) {
        if (t >= tone.start_s && t < tone.end_s) v += kToneAmplitude * std::sin(kTwoPi * tone.frequency_hz * t);
      }
      const auto s = static_cast<std::int16_t>(std::clamp(std::lround(v * 32767.0), -32768L, 32767L));
      const auto u = static_cast<std::uint16_t>(s);
      pcm[2 * i] = static_cast<char>(u & 0xFF);
      pcm[2 * i + 1] = static_cast<char>(u >> 8);
    }
    detail::write_file(audio_raw, pcm);
  }
  try {
    media.encode(video_raw, route.audio ? &audio_raw : nullptr, kWatermarkWidth, kWatermarkHeight,
                 route.fps, kAudioRateHz, dir / files::kVideo);
  } catch (...) {
    std::error_code ec;
    fs::remove(video_raw, ec);
    fs::remove(audio_raw, ec);
    throw;
  }
  std::error_code ec;
  fs::remove(video_raw, ec);
  fs::remove(audio_raw, ec);
}

}  // namespace

GroundTruth generate_synthetic(const SynthConfig& config, const fs::path& out_root, const MediaTool* media) {
  std::error_code ec;
  fs::create_directories(out_root, ec);
  if (!fs::is_directory(out_root)) throw Error(ErrorCode::IoFailure, "cannot create " + out_root.string());

  GroundTruth truth;
  std::uint64_t global = 0;
  for (const auto& city : config.cities) {
    const auto city_slug = slug(city.name);
    for (std::size_t r = 0; r < city.routes.size(); ++r, ++global) {
      RouteSpec route = city.routes[r];
      const auto seed = route.seed.value_or(config.seed + global);
      std::string id = route.id;
      if (id.empty()) {
        id = city_slug + "-" + (r + 1 < 10 ? "0" : "") + std::to_string(r + 1);
      }
      if (route.facility.empty()) route.facility = city.name + " Hospital " + std::to_string(r % 2 + 1);
      auto [inst, gt] = synthesize_instance(route, city, seed, id);
      const auto dir = out_root / city_slug / id;
      emit_instance(inst, dir);
      gt.path = dir;
      if (route.video) {
        if (media && media->available()) {
          write_video(route, gt, inst.metadata.stop_epoch_ms - inst.metadata.start_epoch_ms, dir, *media);
          gt.has_video = true;
          gt.has_audio = route.audio;
          gt.watermark = "16-bit frame index, bit b = 8px column block b, white = 1";
        } else if (config.require_video) {
          throw Error(ErrorCode::MediaToolMissing, "video requested for " + id + " but no media tool is available");
        }
      }
      truth.instances.push_back(std::move(gt));
    }
  }
  auto doc = to_json(truth);
  for (auto& item : doc["instances"]) {
    item["path"] = fs::path(item["path"].get<std::string>()).lexically_relative(out_root).generic_string();
  }
  detail::write_file(out_root / "ground_truth.json", doc.dump(2) + "\n");
  return truth;
}

std::int64_t decode_watermark(const std::vector<std::uint8_t>& gray, int width, int height) {
  if (width < kWatermarkWidth || height < 1 ||
      gray.size() < static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::InvalidArgument, "frame too small for the watermark");
  }
  const int row = height / 2;
  std::int64_t index = 0;
  for (int b = 0; b < kWatermarkBits; ++b) {
    int sum = 0;
    for (int x = 8 * b + 2; x < 8 * b + 6; ++x) sum += gray[static_cast<std::size_t>(row * width + x)];
    if (sum / 4 >= 128) index |= (std::int64_t{1} << b);
  }
  return index;
}

json to_json(const GroundTruth& truth) {
  json instances = json::array();
  for (const auto& t : truth.instances) {
    json pauses = json::array(), turns = json::array(), tones = json::array();
    for (const auto& p : t.pauses) pauses.push_back(to_json(p));
    for (const auto& p : t.tones) tones.push_back(to_json(p));
    for (const auto& tt : t.turns) {
      turns.push_back({{"t_start_ms", tt.t_start_ms}, {"t_end_ms", tt.t_end_ms}, {"angle_deg", tt.angle_deg}});
    }
    instances.push_back({{"instance_id", t.instance_id},
                         {"city", t.city},
                         {"country", t.country},
                         {"facility", t.facility},
                         {"path", t.path.generic_string()},
                         {"seed", t.seed},
                         {"start_epoch_ms", t.start_epoch_ms},
                         {"stop_epoch_ms", t.stop_epoch_ms},
                         {"distance_m", t.distance_m},
                         {"net_heading_deg", t.net_heading_deg},
                         {"pauses", pauses},
                         {"turns", turns},
                         {"counts", t.counts},
                         {"video_frames", t.video_frames},
                         {"has_video", t.has_video},
                         {"has_audio", t.has_audio},
                         {"tones", tones},
                         {"watermark", t.watermark}});
  }
  return {{"instances", instances}};
}

// ---------------------------------------------------------------------------
// Config (JSON)

SynthConfig synth_config_from_json(const json& doc) {
  SynthConfig config;
  try {
    config.seed = doc.value("seed", std::uint64_t{1});
    config.require_video = doc.value("require_video", false);
    for (const auto& c : doc.at("cities")) {
      CitySpec city;
      city.name = c.at("name").get<std::string>();
      city.country = c.value("country", std::string());
      if (c.contains("origin")) {
        city.origin = {c["origin"].at("lat").get<double>(), c["origin"].at("lon").get<double>()};
      }
      for (const auto& r : c.value("routes", json::array())) {
        RouteSpec route;
        route.id = r.value("id", std::string());
        route.facility = r.value("facility", std::string());
        route.length_m = r.value("length_m", route.length_m);
        route.walk_speed_mps = r.value("walk_speed_mps", route.walk_speed_mps);
        if (r.contains("pauses")) {
          route.pauses.clear();
          for (const auto& p : r["pauses"]) route.pauses.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        }
        for (const auto& t : r.value("turns", json::array())) {
          route.turns.push_back({t.at(0).get<double>(), t.at(1).get<double>()});
        }
        route.turn_duration_s = r.value("turn_duration_s", route.turn_duration_s);
        route.initial_heading_deg = r.value("initial_heading_deg", route.initial_heading_deg);
        route.imu_rate_hz = r.value("imu_rate_hz", route.imu_rate_hz);
        route.gps_rate_hz = r.value("gps_rate_hz", route.gps_rate_hz);
        route.fps = r.value("fps", route.fps);
        route.mount_angle_deg = r.value("mount_angle_deg", route.mount_angle_deg);
        route.gait_amplitude = r.value("gait_amplitude", route.gait_amplitude);
        if (r.contains("noise")) {
          const auto& n = r["noise"];
          route.noise.accel = n.value("accel", route.noise.accel);
          route.noise.gyro = n.value("gyro", route.noise.gyro);
          route.noise.mag = n.value("mag", route.noise.mag);
          route.noise.gps_m = n.value("gps_m", route.noise.gps_m);
        }
        if (r.contains("seed")) route.seed = r["seed"].get<std::uint64_t>();
        route.video = r.value("video", false);
        route.audio = r.value("audio", true);
        for (const auto& t : r.value("tones", json::array())) {
          route.tones.push_back({t.at(0).get<double>(), t.at(1).get<double>(),
                                 t.size() > 2 ? t.at(2).get<double>() : 440.0});
        }
        city.routes.push_back(std::move(route));
      }
      config.cities.push_back(std::move(city));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedJson, std::string("synth config: ") + e.what());
  }
  return config;
}

json to_json(const SynthConfig& config) {
  json cities = json::array();
  for (const auto& c : config.cities) {
    json routes = json::array();
    for (const auto& r : c.routes) {
      json pauses = json::array(), turns = json::array(), tones = json::array();
      for (const auto& p : r.pauses) pauses.push_back({p.offset_s, p.duration_s});
      for (const auto& t : r.turns) turns.push_back({t.offset_s, t.angle_deg});
      for (const auto& t : r.tones) tones.push_back({t.start_s, t.end_s, t.frequency_hz});
      json route = {{"id", r.id},
                    {"facility", r.facility},
                    {"length_m", r.length_m},
                    {"walk_speed_mps", r.walk_speed_mps},
                    {"pauses", pauses},
                    {"turns", turns},
                    {"turn_duration_s", r.turn_duration_s},
                    {"initial_heading_deg", r.initial_heading_deg},
                    {"imu_rate_hz", r.imu_rate_hz},
                    {"gps_rate_hz", r.gps_rate_hz},
                    {"fps", r.fps},
                    {"mount_angle_deg", r.mount_angle_deg},
                    {"gait_amplitude", r.gait_amplitude},
                    {"noise", {{"accel", r.noise.accel}, {"gyro", r.noise.gyro}, {"mag", r.noise.mag}, {"gps_m", r.noise.gps_m}}},
                    {"video", r.video},
                    {"audio", r.audio},
                    {"tones", tones}};
      if (r.seed) route["seed"] = *r.seed;
      routes.push_back(route);
    }
    cities.push_back({{"name", c.name},
                      {"country", c.country},
                      {"origin", {{"lat", c.origin.lat}, {"lon", c.origin.lon}}},
                      {"routes", routes}});
  }
  return {{"seed", config.seed}, {"require_video", config.require_video}, {"cities", cities}};
}

SynthConfig protocol_dataset_config(std::uint64_t first_seed, int per_city) {
  SynthConfig config;
  config.seed = first_seed;
  const std::vector<std::tuple<std::string, std::string, LatLon>> cities = {
      {"Chicago", "USA", {41.8781, -87.6298}},
      {"Jundiaí", "Brazil", {-23.1857, -46.8978}},
      {"Santos", "Brazil", {-23.9608, -46.3336}},
      {"São Paulo", "Brazil", {-23.5505, -46.6333}},
  };
  static const double kAngles[][3] = {{90.0, -90.0, 90.0}, {-80.0, 100.0, -75.0}, {110.0, 90.0, -95.0},
                                      {-90.0, -85.0, 80.0}};
  int g = 0;
  for (const auto& [name, country, origin] : cities) {
    CitySpec city{name, country, origin, {}};
    for (int r = 0; r < per_city; ++r, ++g) {
      RouteSpec route;
      route.length_m = 60.0 + 15.0 * (g % 4);
      route.initial_heading_deg = 30.0 * g;
      const double walk_s = route.length_m / route.walk_speed_mps;
      const int n_turns = 2 + g % 2;
      for (int j = 0; j < n_turns; ++j) {
        const double offset = 2.0 + walk_s * (j + 1) / (n_turns + 1) - route.turn_duration_s / 2.0;
        route.turns.push_back({std::round(offset * 10.0) / 10.0, kAngles[g % 4][j]});
      }
      city.routes.push_back(std::move(route));
    }
    config.cities.push_back(std::move(city));
  }
  return config;
}

// ---------------------------------------------------------------------------
// Bundle

fs::path export_bundle(const Instance& inst, const fs::path& out_dir, const BundleOptions& options) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string());

  const auto summary = summarize_instance(inst, options.media);
  const auto& m = inst.metadata;
  json meta = metadata_to_json(m);
  meta["instance_id"] = m.instance_id;

  json listed = json::array({"instance.json", "gps.geojson", "sensors.downsampled.json", "annotations.json"});

  const Instance timed = inst.on_timeline || !m.boot_anchor ? inst : to_timeline(inst);
  json sensors = json::object();
  if (timed.on_timeline) {
    for (const auto& [name, series] : timed.sensors3) {
      if (series.size() < 2) continue;
      const auto u = resample_linear(series, options.downsample_hz);
      sensors[name] = {{"t0_ms", u.t0_ms},   {"dt_ms", u.dt_ms},       {"count", u.size()},
                       {"x", u.channels[0]}, {"y", u.channels[1]},     {"z", u.channels[2]}};
    }
  }
  detail::write_file(out_dir / "sensors.downsampled.json",
                     json({{"rate_hz", options.downsample_hz}, {"sensors", sensors}}).dump() + "\n");

  json geo = inst.gps.empty() ? json({{"type", "FeatureCollection"}, {"features", json::array()}})
                              : to_geojson(inst);
  detail::write_file(out_dir / "gps.geojson", geo.dump() + "\n");

  std::vector<Annotation> anns;
  if (!inst.dir.empty()) anns = read_annotations(inst.dir);
  detail::write_file(out_dir / "annotations.json", to_json(anns).dump(2) + "\n");

  const bool no_video = !inst.video_path.has_value();
  if (!no_video) {
    fs::copy_file(*inst.video_path, out_dir / files::kVideo, fs::copy_options::overwrite_existing, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot copy video: " + ec.message());
    listed.push_back(std::string(files::kVideo));
  } else {
    fs::remove(out_dir / files::kVideo, ec);
  }

  bool waveform = false;
  if (options.waveform && !no_video && options.media && options.media->available()) {
    try {
      export_audio_waveform(inst, options.waveform_rate_hz, out_dir / "waveform.csv", *options.media);
      waveform = true;
      listed.push_back("waveform.csv");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoAudioTrack) throw;
    }
  }

  json doc = {{"bundle_version", kBundleVersion},
              {"instance_id", m.instance_id},
              {"metadata", meta},
              {"summary", to_json(summary)},
              {"taxonomy", load_taxonomy().to_json()},
              {"no_video", no_video},
              {"waveform", waveform},
              {"span", {{"start_epoch_ms", m.start_epoch_ms}, {"stop_epoch_ms", m.stop_epoch_ms}}},
              {"files", listed}};
  detail::write_file(out_dir / "instance.json", doc.dump(2) + "\n");
  return out_dir;
}

}  // namespace sideseeing
