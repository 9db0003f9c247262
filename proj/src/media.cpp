#include "sideseeing/media.hpp"

#include <sys/wait.h>

#include <array>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include "sideseeing/error.hpp"
#include "util.hpp"

namespace sideseeing {

struct MediaTool::Limiter {
  std::mutex mutex;
  std::condition_variable cv;
  std::size_t limit = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  std::size_t active = 0;
};

namespace {

constexpr std::size_t kExcerptBytes = 600;

std::string env_or(const char* name, const std::string& fallback) {
  const char* value = std::getenv(name);
  return value && *value ? std::string(value) : fallback;
}

fs::path search_path(const std::string& name) {
  const char* path = std::getenv("PATH");
  if (!path) return {};
  for (auto dir : detail::split(path, ':')) {
    if (dir.empty()) continue;
    fs::path candidate = fs::path(std::string(dir)) / name;
    std::error_code ec;
    if (fs::is_regular_file(candidate, ec)) return candidate;
  }
  return {};
}

std::string seconds(double value) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed << value;
  return out.str();
}

}  // namespace

std::string shell_quote(const std::string& text) {
  std::string out = "'";
  for (char c : text) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

MediaTemplates MediaTemplates::ffmpeg_defaults() {
  MediaTemplates t;
  t.cut =
      "{ffmpeg} -hide_banner -v error -y -ss {start_s} -i {in} -t {dur_s} -c:v libx264 "
      "-preset ultrafast -crf 12 -pix_fmt yuv420p -c:a aac {out}";
  t.copy_cut = "{ffmpeg} -hide_banner -v error -y -ss {start_s} -i {in} -t {dur_s} -c copy {out}";
  t.probe = "{ffmpeg} -hide_banner -i {in} -map '0:v:0?' -f null -";
  t.frame =
      "{ffmpeg} -hide_banner -v error -y -i {in} -vf 'select=eq(n\\,'{frame}')' "
      "-fps_mode passthrough -frames:v 1 {out}";
  t.audio_pcm = "{ffmpeg} -hide_banner -v error -y -i {in} -vn -ac 1 -ar {rate} -f s16le {out}";
  t.encode_av =
      "{ffmpeg} -hide_banner -v error -y -f rawvideo -pix_fmt gray -s {width}x{height} -r {fps} "
      "-i {video_raw} -f s16le -ar {audio_rate} -ac 1 -i {audio_raw} -c:v libx264 -preset "
      "ultrafast -qp 0 -pix_fmt yuv420p -c:a aac -b:a 96k {out}";
  t.encode_v =
      "{ffmpeg} -hide_banner -v error -y -f rawvideo -pix_fmt gray -s {width}x{height} -r {fps} "
      "-i {video_raw} -c:v libx264 -preset ultrafast -qp 0 -pix_fmt yuv420p {out}";
  return t;
}

MediaTool::MediaTool() : limiter_(std::make_shared<Limiter>()) {}

MediaTool::MediaTool(fs::path executable, MediaTemplates templates)
    : executable_(std::move(executable)),
      templates_(std::move(templates)),
      limiter_(std::make_shared<Limiter>()) {}

MediaTool MediaTool::from_environment() {
  fs::path exe;
  if (const char* configured = std::getenv("SIDESEEING_FFMPEG"); configured && *configured) {
    exe = configured;
  } else {
    exe = search_path("ffmpeg");
  }
  auto defaults = MediaTemplates::ffmpeg_defaults();
  MediaTemplates t;
  t.cut = env_or("SIDESEEING_MEDIA_CUT", defaults.cut);
  t.copy_cut = env_or("SIDESEEING_MEDIA_COPY_CUT", defaults.copy_cut);
  t.probe = env_or("SIDESEEING_MEDIA_PROBE", defaults.probe);
  t.frame = env_or("SIDESEEING_MEDIA_FRAME", defaults.frame);
  t.audio_pcm = env_or("SIDESEEING_MEDIA_AUDIO", defaults.audio_pcm);
  t.encode_av = env_or("SIDESEEING_MEDIA_ENCODE_AV", defaults.encode_av);
  t.encode_v = env_or("SIDESEEING_MEDIA_ENCODE_V", defaults.encode_v);
  MediaTool tool(exe, t);
  if (const char* limit = std::getenv("SIDESEEING_MEDIA_JOBS")) {
    const long n = std::strtol(limit, nullptr, 10);
    if (n > 0) tool.set_concurrency_limit(static_cast<std::size_t>(n));
  }
  return tool;
}

bool MediaTool::available() const {
  if (executable_.empty()) return false;
  std::error_code ec;
  return fs::is_regular_file(executable_, ec);
}

void MediaTool::set_concurrency_limit(std::size_t limit) {
  std::lock_guard lock(limiter_->mutex);
  limiter_->limit = std::max<std::size_t>(1, limit);
  limiter_->cv.notify_all();
}

void MediaTool::require_available() const {
  if (!available()) {
    throw Error(ErrorCode::MediaToolMissing,
                "no media tool configured (set SIDESEEING_FFMPEG or put ffmpeg on PATH)");
  }
}

std::string MediaTool::run(const std::string& command_template,
                           const std::map<std::string, std::string>& values) const {
  require_available();
  std::string command;
  for (std::size_t i = 0; i < command_template.size();) {
    if (command_template[i] == '{') {
      const auto close = command_template.find('}', i);
      if (close != std::string::npos) {
        const auto key = command_template.substr(i + 1, close - i - 1);
        if (key == "ffmpeg") {
          command += shell_quote(executable_.string());
          i = close + 1;
          continue;
        }
        if (auto it = values.find(key); it != values.end()) {
          command += shell_quote(it->second);
          i = close + 1;
          continue;
        }
      }
    }
    command += command_template[i++];
  }
  command += " 2>&1 < /dev/null";

  {
    std::unique_lock lock(limiter_->mutex);
    limiter_->cv.wait(lock, [&] { return limiter_->active < limiter_->limit; });
    ++limiter_->active;
  }
  std::string output;
  int status = -1;
  if (FILE* pipe = ::popen(command.c_str(), "r")) {
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) output.append(buf.data(), n);
    status = ::pclose(pipe);
  }
  {
    std::lock_guard lock(limiter_->mutex);
    --limiter_->active;
    limiter_->cv.notify_one();
  }
  const int exit_code = status == -1 ? -1 : (WIFEXITED(status) ? WEXITSTATUS(status) : 128);
  if (exit_code != 0) {
    const auto excerpt =
        output.size() > kExcerptBytes ? output.substr(output.size() - kExcerptBytes) : output;
    throw MediaToolError(exit_code, excerpt);
  }
  return output;
}

ProbeResult parse_probe_output(const std::string& text) {
  ProbeResult r;
  // A custom probe may print a bare duration in milliseconds.
  {
    std::size_t pos = 0;
    try {
      const double ms = std::stod(text, &pos);
      if (text.find_first_not_of(" \t\r\n", pos) == std::string::npos) {
        r.duration_ms = r.container_duration_ms = ms;
        r.has_video = true;
        return r;
      }
    } catch (const std::exception&) {
    }
  }
  std::smatch m;
  static const std::regex duration_re(R"(Duration:\s*(\d+):(\d+):(\d+(?:\.\d+)?))");
  if (std::regex_search(text, m, duration_re)) {
    r.container_duration_ms =
        (std::stod(m[1]) * 3600.0 + std::stod(m[2]) * 60.0 + std::stod(m[3])) * 1000.0;
  }
  static const std::regex video_re(R"(Stream #\d+:\d+[^\n]*Video:[^\n]*)");
  if (std::regex_search(text, m, video_re)) {
    r.has_video = true;
    static const std::regex fps_re(R"(([\d.]+) fps)");
    std::smatch f;
    const std::string line = m[0];
    if (std::regex_search(line, f, fps_re)) r.fps = std::stod(f[1]);
  }
  static const std::regex audio_re(R"(Stream #\d+:\d+[^\n]*Audio:)");
  r.has_audio = std::regex_search(text, audio_re);
  static const std::regex frame_re(R"(frame=\s*(\d+))");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), frame_re);
       it != std::sregex_iterator(); ++it) {
    r.frames = std::stoll((*it)[1]);
  }
  if (r.frames > 0 && r.fps > 0) {
    r.duration_ms = 1000.0 * static_cast<double>(r.frames) / r.fps;
  } else {
    r.duration_ms = r.container_duration_ms;
  }
  return r;
}

ProbeResult MediaTool::probe(const fs::path& input) const {
  require_available();
  if (!fs::is_regular_file(input)) {
    throw Error(ErrorCode::IoFailure, "no such media file " + input.string());
  }
  return parse_probe_output(run(templates_.probe, {{"in", input.string()}}));
}

void MediaTool::cut(const fs::path& input, const fs::path& output, double start_s,
                    double duration_s, bool stream_copy) const {
  run(stream_copy ? templates_.copy_cut : templates_.cut,
      {{"in", input.string()},
       {"out", output.string()},
       {"start_s", seconds(start_s)},
       {"dur_s", seconds(duration_s)}});
}

void MediaTool::extract_frame(const fs::path& input, const fs::path& output,
                              std::int64_t frame_index, double fps) const {
  run(templates_.frame, {{"in", input.string()},
                         {"out", output.string()},
                         {"frame", std::to_string(frame_index)},
                         {"start_s", seconds(fps > 0 ? static_cast<double>(frame_index) / fps : 0)}});
}

void MediaTool::extract_audio_pcm(const fs::path& input, const fs::path& output,
                                  int rate_hz) const {
  run(templates_.audio_pcm,
      {{"in", input.string()}, {"out", output.string()}, {"rate", std::to_string(rate_hz)}});
}

void MediaTool::encode(const fs::path& video_raw, const fs::path* audio_raw, int width, int height,
                       double fps, int audio_rate, const fs::path& output) const {
  std::map<std::string, std::string> values = {{"video_raw", video_raw.string()},
                                               {"width", std::to_string(width)},
                                               {"height", std::to_string(height)},
                                               {"fps", detail::format_double(fps)},
                                               {"audio_rate", std::to_string(audio_rate)},
                                               {"out", output.string()}};
  if (audio_raw) {
    values["audio_raw"] = audio_raw->string();
    run(templates_.encode_av, values);
  } else {
    run(templates_.encode_v, values);
  }
}

}  // namespace sideseeing
