#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

namespace sideseeing {

namespace fs = std::filesystem;

struct ProbeResult {
  double duration_ms = 0.0;  // video stream duration when known, else container
  double container_duration_ms = 0.0;
  std::int64_t frames = 0;
  double fps = 0.0;
  bool has_video = false;
  bool has_audio = false;
};

// Command templates run through /bin/sh. Placeholders are replaced with
// shell-quoted values: {ffmpeg} {in} {out} {start_s} {dur_s} {frame} {rate}
// {video_raw} {audio_raw} {width} {height} {fps} {audio_rate}.
struct MediaTemplates {
  std::string cut;       // re-encoding cut
  std::string copy_cut;  // stream-copy cut
  std::string probe;     // prints ffmpeg-style stream info, or a bare duration in ms
  std::string frame;     // writes one image of frame {frame}
  std::string audio_pcm; // writes mono signed 16-bit little-endian PCM at {rate}
  std::string encode_av; // raw gray frames + raw PCM -> mp4
  std::string encode_v;  // raw gray frames -> mp4 without audio

  static MediaTemplates ffmpeg_defaults();
};

/// Wrapper around an external media-processing executable.
class MediaTool {
 public:
  MediaTool();  // unavailable
  MediaTool(fs::path executable, MediaTemplates templates = MediaTemplates::ffmpeg_defaults());

  // Executable from SIDESEEING_FFMPEG, else `ffmpeg` on PATH. Individual
  // templates may be overridden with SIDESEEING_MEDIA_CUT, _COPY_CUT, _PROBE,
  // _FRAME, _AUDIO, _ENCODE_AV and _ENCODE_V.
  static MediaTool from_environment();

  bool available() const;
  const fs::path& executable() const { return executable_; }
  const MediaTemplates& templates() const { return templates_; }

  // Bounds concurrent subprocesses across all copies of this tool.
  void set_concurrency_limit(std::size_t limit);

  ProbeResult probe(const fs::path& input) const;
  void cut(const fs::path& input, const fs::path& output, double start_s, double duration_s,
           bool stream_copy) const;
  void extract_frame(const fs::path& input, const fs::path& output, std::int64_t frame_index,
                     double fps) const;
  void extract_audio_pcm(const fs::path& input, const fs::path& output, int rate_hz) const;
  void encode(const fs::path& video_raw, const fs::path* audio_raw, int width, int height,
              double fps, int audio_rate, const fs::path& output) const;

  // Substitutes placeholders and runs; returns combined stdout/stderr.
  // Throws MediaToolFailed on a non-zero exit status.
  std::string run(const std::string& command_template,
                  const std::map<std::string, std::string>& values) const;

 private:
  void require_available() const;
  struct Limiter;
  fs::path executable_;
  MediaTemplates templates_;
  std::shared_ptr<Limiter> limiter_;
};

ProbeResult parse_probe_output(const std::string& text);

std::string shell_quote(const std::string& text);

}  // namespace sideseeing
