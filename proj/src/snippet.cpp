#include "sideseeing/snippet.hpp"

#include <cmath>
#include <cstring>

#include "sideseeing/error.hpp"
#include "sideseeing/timeline.hpp"
#include "util.hpp"

namespace sideseeing {

using nlohmann::json;

namespace {

constexpr int kPcmRateHz = 16000;

template <class Sample>
std::map<std::string, Series<Sample>> slice_streams(const std::map<std::string, Series<Sample>>& streams,
                                                    double t0, double t1) {
  std::map<std::string, Series<Sample>> out;
  for (const auto& [name, series] : streams) out[name] = slice(series, t0, t1);
  return out;
}

template <class Sample>
StreamExtent extent_of(std::string name, const Series<Sample>& series) {
  StreamExtent e;
  e.stream = std::move(name);
  e.rows = series.size();
  if (!series.empty()) {
    e.first_ms = time_ms(series.front());
    e.last_ms = time_ms(series.back());
  }
  return e;
}

json to_json(const StreamExtent& e) {
  json j = {{"stream", e.stream}, {"rows", e.rows}};
  j["first_ms"] = e.first_ms ? json(*e.first_ms) : json(nullptr);
  j["last_ms"] = e.last_ms ? json(*e.last_ms) : json(nullptr);
  return j;
}

}  // namespace

Instance trim_instance(const Instance& source, std::int64_t t_start_ms, std::int64_t t_end_ms) {
  if (!(t_start_ms < t_end_ms)) throw Error(ErrorCode::EmptyInterval, "invalid interval");
  const auto& m = source.metadata;
  if (t_start_ms < m.start_epoch_ms || t_end_ms > m.stop_epoch_ms) {
    throw Error(ErrorCode::IntervalOutOfRange,
                "[" + std::to_string(t_start_ms) + ", " + std::to_string(t_end_ms) +
                    ") is outside the instance span [" + std::to_string(m.start_epoch_ms) + ", " +
                    std::to_string(m.stop_epoch_ms) + ")");
  }
  const Instance inst = source.on_timeline ? source : to_timeline(source);
  const auto t0 = static_cast<double>(t_start_ms);
  const auto t1 = static_cast<double>(t_end_ms);

  Instance out;
  out.metadata = inst.metadata;
  out.metadata.start_epoch_ms = t_start_ms;
  out.metadata.stop_epoch_ms = t_end_ms;
  out.metadata.extra["parent_instance_id"] = inst.metadata.instance_id;
  out.sensors3 = slice_streams(inst.sensors3, t0, t1);
  out.sensors1 = slice_streams(inst.sensors1, t0, t1);
  out.sensors_u3 = slice_streams(inst.sensors_u3, t0, t1);
  out.gps = slice(inst.gps, t0, t1);
  out.battery = slice(inst.battery, t0, t1);
  out.on_timeline = true;
  return out;
}

Snippet extract_snippet(const Instance& inst, std::int64_t t_start_ms, std::int64_t t_end_ms,
                        const fs::path& out_dir, const SnippetOptions& options) {
  Snippet snip;
  snip.parent_id = inst.metadata.instance_id;
  snip.t_start_ms = t_start_ms;
  snip.t_end_ms = t_end_ms;
  snip.instance = trim_instance(inst, t_start_ms, t_end_ms);

  const bool want_video = options.cut_video && inst.video_path.has_value();
  if (want_video && (!options.media || !options.media->available())) {
    throw Error(ErrorCode::MediaToolMissing, "video cutting requested but no media tool is available");
  }

  emit_instance(snip.instance, out_dir);
  snip.instance.dir = out_dir;
  snip.instance.metadata.instance_id = out_dir.filename().string();

  for (const auto& [name, s] : snip.instance.sensors3) snip.extents.push_back(extent_of("sensors3/" + name, s));
  for (const auto& [name, s] : snip.instance.sensors_u3) snip.extents.push_back(extent_of("sensors_u3/" + name, s));
  for (const auto& [name, s] : snip.instance.sensors1) snip.extents.push_back(extent_of("sensors1/" + name, s));
  snip.extents.push_back(extent_of("gps", snip.instance.gps));
  snip.extents.push_back(extent_of("battery", snip.instance.battery));

  json video = nullptr;
  if (want_video) {
    const auto& m = inst.metadata;
    const double start_s = static_cast<double>(t_start_ms - m.start_epoch_ms) / 1000.0;
    const double duration_ms = static_cast<double>(t_end_ms - t_start_ms);
    const bool copy = options.allow_stream_copy && t_start_ms == m.start_epoch_ms;
    const auto target = out_dir / files::kVideo;
    options.media->cut(*inst.video_path, target, start_s, duration_ms / 1000.0, copy);
    const auto probe = options.media->probe(target);
    const double fps = probe.fps > 0 ? probe.fps : m.video_fps;
    const double frame_ms = fps > 0 ? 1000.0 / fps : 0.0;
    if (std::abs(probe.duration_ms - duration_ms) > frame_ms + 1e-6) {
      throw MediaToolError(0, "cut video lasts " + detail::format_double(probe.duration_ms) +
                                  " ms, expected " + detail::format_double(duration_ms) + " ms");
    }
    snip.video_path = target;
    snip.instance.video_path = target;
    video = {{"mode", copy ? "copy" : "reencode"},
             {"start_offset_s", start_s},
             {"expected_duration_ms", duration_ms},
             {"probed_duration_ms", probe.duration_ms},
             {"frames", probe.frames}};
  }

  json extents = json::array();
  for (const auto& e : snip.extents) extents.push_back(to_json(e));
  snip.manifest = {{"parent_id", snip.parent_id},
                   {"t_start_ms", t_start_ms},
                   {"t_end_ms", t_end_ms},
                   {"streams", extents},
                   {"video", video}};
  detail::write_file(out_dir / "snippet.json", snip.manifest.dump(2) + "\n");
  return snip;
}

std::vector<fs::path> export_frames_at_times(const Instance& inst,
                                             const std::vector<std::int64_t>& times_ms,
                                             const fs::path& out_dir, const MediaTool& media) {
  if (!media.available()) throw Error(ErrorCode::MediaToolMissing, "frame export needs a media tool");
  if (!inst.video_path) throw Error(ErrorCode::InvalidArgument, "instance has no video");
  const auto probe = media.probe(*inst.video_path);
  const double fps = probe.fps > 0 ? probe.fps : inst.metadata.video_fps;
  if (!(fps > 0)) throw Error(ErrorCode::InvalidArgument, "unknown frame rate");
  const auto last_frame = probe.frames > 0
                              ? probe.frames - 1
                              : static_cast<std::int64_t>(std::floor(probe.duration_ms * fps / 1000.0));
  for (auto t : times_ms) {
    if (t < 0 || static_cast<double>(t) > probe.duration_ms) {
      throw Error(ErrorCode::TimeOutOfRange,
                  std::to_string(t) + " ms is outside the video (" +
                      detail::format_double(probe.duration_ms) + " ms)");
    }
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string());
  std::vector<fs::path> out;
  for (auto t : times_ms) {
    auto frame = static_cast<std::int64_t>(std::llround(static_cast<double>(t) * fps / 1000.0));
    frame = std::min(frame, last_frame);
    const auto path = out_dir / ("frame_" + std::to_string(t) + ".png");
    media.extract_frame(*inst.video_path, path, frame, fps);
    if (!fs::is_regular_file(path) || fs::file_size(path) == 0) {
      throw MediaToolError(0, "no image written for frame " + std::to_string(frame));
    }
    out.push_back(path);
  }
  return out;
}

fs::path export_audio_waveform(const Instance& inst, double rate_hz, const fs::path& out_path,
                               const MediaTool& media) {
  if (!(rate_hz > 0) || rate_hz > kPcmRateHz) {
    throw Error(ErrorCode::InvalidArgument, "rate_hz must be in (0, 16000]");
  }
  if (!media.available()) throw Error(ErrorCode::MediaToolMissing, "audio export needs a media tool");
  if (!inst.video_path) throw Error(ErrorCode::NoAudioTrack, "instance has no video");
  if (!media.probe(*inst.video_path).has_audio) {
    throw Error(ErrorCode::NoAudioTrack, inst.video_path->string() + " has no audio stream");
  }
  auto pcm_path = out_path;
  pcm_path += ".pcm";
  media.extract_audio_pcm(*inst.video_path, pcm_path, kPcmRateHz);
  const auto bytes = detail::read_file(pcm_path);
  std::error_code ec;
  fs::remove(pcm_path, ec);

  const std::size_t n = bytes.size() / 2;
  std::vector<std::int16_t> samples(n);
  std::memcpy(samples.data(), bytes.data(), n * 2);

  const double per_bin = kPcmRateHz / rate_hz;
  std::string out = "t_ms,amplitude\n";
  for (std::size_t k = 0;; ++k) {
    const auto begin = static_cast<std::size_t>(std::llround(static_cast<double>(k) * per_bin));
    if (begin >= n) break;
    const auto end = std::min(n, static_cast<std::size_t>(std::llround(static_cast<double>(k + 1) * per_bin)));
    double peak = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = static_cast<double>(samples[i]) / 32768.0;
      if (std::abs(v) > std::abs(peak)) peak = v;
    }
    out += detail::format_double(static_cast<double>(k) * 1000.0 / rate_hz) + ',' +
           detail::format_double(peak) + '\n';
  }
  detail::write_file(out_path, out);
  return out_path;
}

}  // namespace sideseeing
