#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sideseeing/instance.hpp"
#include "sideseeing/media.hpp"

namespace sideseeing {

struct SnippetOptions {
  bool cut_video = true;
  // Stream copy is used only when the cut starts at the first frame; any
  // other start re-encodes.
  bool allow_stream_copy = true;
  const MediaTool* media = nullptr;
};

struct StreamExtent {
  std::string stream;
  std::size_t rows = 0;
  std::optional<double> first_ms;
  std::optional<double> last_ms;
};

struct Snippet {
  std::string parent_id;
  std::int64_t t_start_ms = 0;
  std::int64_t t_end_ms = 0;
  Instance instance;  // trimmed streams with adjusted metadata
  std::optional<fs::path> video_path;
  std::vector<StreamExtent> extents;
  nlohmann::json manifest;
};

// Pure trimming: every stream is sliced to [t_start_ms, t_end_ms) and the
// metadata start/stop moved to the interval. Video is not touched.
Instance trim_instance(const Instance& inst, std::int64_t t_start_ms, std::int64_t t_end_ms);

// Writes the trimmed instance to out_dir (same layout as any instance) plus
// a snippet.json manifest, cutting the video when requested and possible.
Snippet extract_snippet(const Instance& inst, std::int64_t t_start_ms, std::int64_t t_end_ms,
                        const fs::path& out_dir, const SnippetOptions& options = {});

// Times are offsets in ms from the instance start. Each is mapped to the
// nearest frame and written as out_dir/frame_<t>.png.
std::vector<fs::path> export_frames_at_times(const Instance& inst,
                                             const std::vector<std::int64_t>& times_ms,
                                             const fs::path& out_dir, const MediaTool& media);

// Mono peak envelope at rate_hz as CSV "t_ms,amplitude" (t_ms from video start).
fs::path export_audio_waveform(const Instance& inst, double rate_hz, const fs::path& out_path,
                               const MediaTool& media);

}  // namespace sideseeing
