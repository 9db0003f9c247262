#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "sideseeing/dataset.hpp"
#include "sideseeing/error.hpp"
#include "sideseeing/geo.hpp"
#include "sideseeing/media.hpp"
#include "sideseeing/snippet.hpp"
#include "support.hpp"

using namespace sideseeing;
using testing::TempDir;

namespace {

// Same tool, but frame extraction writes raw 8-bit gray pixels instead of PNG.
MediaTool raw_frame_tool(const MediaTool& base) {
  auto t = base.templates();
  t.frame =
      "{ffmpeg} -hide_banner -v error -y -i {in} -vf 'select=eq(n\\,'{frame}')' -fps_mode passthrough "
      "-frames:v 1 -f rawvideo -pix_fmt gray {out}";
  return MediaTool(base.executable(), t);
}

std::int64_t frame_index_at(const MediaTool& raw, const fs::path& video, std::int64_t frame, const fs::path& scratch) {
  raw.extract_frame(video, scratch, frame, 30.0);
  const auto bytes = testing::slurp(scratch);
  std::vector<std::uint8_t> px(bytes.begin(), bytes.end());
  return decode_watermark(px, kWatermarkWidth, kWatermarkHeight);
}

struct VideoFixture {
  TempDir tmp{"media"};
  GroundTruth truth;
  Instance inst;
};

void make_video(VideoFixture& f, const MediaTool& media) {
  RouteSpec route;
  route.length_m = 13.0;  // 10 s walk, 14 s total
  route.video = true;
  route.tones = {{3.0, 5.0, 440.0}, {9.0, 10.0, 660.0}};
  auto config = testing::one_city({route}, 5);
  config.require_video = true;
  f.truth = generate_synthetic(config, f.tmp.path(), &media);
  f.inst = load_instance(f.truth.instances[0].path);
}

}  // namespace

TEST_CASE("probe output parsing") {
  const std::string text =
      "Input #0, mov,mp4,m4a,3gp,3g2,mj2, from 'v.mp4':\n"
      "  Duration: 00:00:14.03, start: 0.000000, bitrate: 120 kb/s\n"
      "  Stream #0:0[0x1](und): Video: h264 (High 4:4:4) (avc1 / 0x31637661), yuv420p, 128x16, 29.97 fps, 30 tbr\n"
      "  Stream #0:1[0x2](und): Audio: aac (LC) (mp4a / 0x6134706D), 16000 Hz, mono, fltp, 96 kb/s\n"
      "frame=  100 fps=0.0 q=-1.0 size=N/A time=00:00:03.33\n"
      "frame=  420 fps=0.0 q=-1.0 Lsize=N/A time=00:00:14.00\n";
  const auto p = parse_probe_output(text);
  CHECK(p.has_video);
  CHECK(p.has_audio);
  CHECK(p.frames == 420);
  CHECK(p.fps == doctest::Approx(29.97));
  CHECK(p.container_duration_ms == doctest::Approx(14030.0));
  CHECK(p.duration_ms == doctest::Approx(420 / 29.97 * 1000.0));

  const auto bare = parse_probe_output("  12345.5\n");
  CHECK(bare.duration_ms == 12345.5);
}

TEST_CASE("shell quoting") {
  CHECK(shell_quote("plain") == "'plain'");
  CHECK(shell_quote("it's") == "'it'\\''s'");
}

TEST_CASE("templates run through the shell; failures carry the exit status") {
  TempDir tmp("tpl");
  MediaTemplates t;
  t.probe = "echo 2500";
  t.cut = "echo boom; exit 3";
  const MediaTool tool("/bin/sh", t);
  REQUIRE(tool.available());
  std::ofstream(tmp / "in.mp4") << "x";
  CHECK(tool.probe(tmp / "in.mp4").duration_ms == 2500.0);
  try {
    tool.cut(tmp / "in.mp4", tmp / "out.mp4", 0.0, 1.0, false);
    FAIL("expected MediaToolError");
  } catch (const MediaToolError& e) {
    CHECK(e.exit_status() == 3);
    CHECK(e.stderr_excerpt().find("boom") != std::string::npos);
  }
  const auto values = tool.run("printf %s {in}", {{"in", "a b'c"}});
  CHECK(values == "a b'c");
}

TEST_CASE("unavailable tool raises MediaToolMissing") {
  const MediaTool none;
  CHECK_FALSE(none.available());
  try {
    none.probe("x.mp4");
    FAIL("expected MediaToolMissing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MediaToolMissing);
  }
}

TEST_CASE("concurrency limit bounds parallel subprocesses") {
  MediaTemplates t;
  MediaTool tool("/bin/sh", t);
  tool.set_concurrency_limit(2);
  std::vector<std::thread> threads;
  std::atomic<int> done{0};
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&] {
      tool.run("sleep 0.05", {});
      ++done;
    });
  }
  for (auto& th : threads) th.join();
  CHECK(done == 6);
}

TEST_CASE("synthetic video: frame count, watermark and audio tones") {
  const auto media = testing::test_media();
  if (!media.available()) {
    MESSAGE("no media tool; skipped");
    return;
  }
  VideoFixture f;
  make_video(f, media);
  const auto& truth = f.truth.instances[0];
  REQUIRE(truth.has_video);
  REQUIRE(f.inst.video_path);

  const auto probe = media.probe(*f.inst.video_path);
  CHECK(probe.frames == truth.video_frames);
  CHECK(probe.has_audio);
  CHECK(summarize_instance(f.inst, &media).video_frames == truth.video_frames);
  CHECK_FALSE(summarize_instance(f.inst, &media).frames_estimated);

  const auto raw = raw_frame_tool(media);
  for (std::int64_t k : {std::int64_t{0}, std::int64_t{1}, std::int64_t{77}, truth.video_frames - 1}) {
    CHECK(frame_index_at(raw, *f.inst.video_path, k, f.tmp / "frame.gray") == k);
  }

  const auto frames = export_frames_at_times(f.inst, {0, 1000, 5000}, f.tmp / "frames", media);
  REQUIRE(frames.size() == 3);
  for (const auto& p : frames) {
    const auto bytes = testing::slurp(p);
    CHECK(bytes.substr(1, 3) == "PNG");
  }
  CHECK_THROWS_AS(export_frames_at_times(f.inst, {999999}, f.tmp / "frames", media), Error);

  const auto wave = export_audio_waveform(f.inst, 100.0, f.tmp / "wave.csv", media);
  const auto lines = testing::csv_lines(wave);
  double loud_in = 0.0, loud_out = 0.0;
  for (const auto& line : lines) {
    const auto comma = line.find(',');
    const double t = std::stod(line.substr(0, comma));
    const double a = std::abs(std::stod(line.substr(comma + 1)));
    const bool inside = (t >= 3200 && t < 4800) || (t >= 9200 && t < 9800);
    const bool outside = (t >= 500 && t < 2800) || (t >= 5200 && t < 8800) || (t >= 10200 && t < 13500);
    if (inside) loud_in = std::max(loud_in, a);
    if (outside) loud_out = std::max(loud_out, a);
  }
  CHECK(loud_in > 0.3);
  CHECK(loud_out < 0.05);
}

TEST_CASE("video snippet: re-encoded cut starts at the right frame and lasts the interval") {
  const auto media = testing::test_media();
  if (!media.available()) {
    MESSAGE("no media tool; skipped");
    return;
  }
  VideoFixture f;
  make_video(f, media);
  const auto s = f.inst.metadata.start_epoch_ms;
  SnippetOptions opts;
  opts.media = &media;

  const auto snip = extract_snippet(f.inst, s + 4000, s + 9000, f.tmp / "cut", opts);
  REQUIRE(snip.video_path);
  CHECK(snip.manifest["video"]["mode"] == "reencode");
  const auto probe = media.probe(*snip.video_path);
  CHECK(std::abs(probe.duration_ms - 5000.0) <= 1000.0 / 30.0 + 1e-6);
  const auto raw = raw_frame_tool(media);
  CHECK(frame_index_at(raw, *snip.video_path, 0, f.tmp / "first.gray") == 120);

  const auto head = extract_snippet(f.inst, s, s + 3000, f.tmp / "head", opts);
  CHECK(head.manifest["video"]["mode"] == "copy");
  CHECK(frame_index_at(raw, *head.video_path, 0, f.tmp / "h.gray") == 0);

  const auto child = load_instance(f.tmp / "cut");
  CHECK(child.video_path);
  CHECK(passes(validate_instance(child, Profile::Paper)));
}

TEST_CASE("bundle with video and waveform") {
  const auto media = testing::test_media();
  if (!media.available()) {
    MESSAGE("no media tool; skipped");
    return;
  }
  VideoFixture f;
  make_video(f, media);
  BundleOptions opts;
  opts.media = &media;
  opts.waveform = true;
  const auto out = export_bundle(f.inst, f.tmp / "bundle", opts);
  CHECK(fs::exists(out / "video.mp4"));
  CHECK(fs::exists(out / "waveform.csv"));
  const auto doc = nlohmann::json::parse(testing::slurp(out / "instance.json"));
  CHECK(doc["no_video"] == false);
  CHECK(doc["waveform"] == true);
}
