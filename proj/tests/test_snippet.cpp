#include <algorithm>
#include <random>

#include "doctest.h"
#include "sideseeing/error.hpp"
#include "sideseeing/snippet.hpp"
#include "support.hpp"

using namespace sideseeing;
using testing::TempDir;

namespace {

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

void check_against_oracle(const Instance& parent, const fs::path& snippet_dir, std::int64_t t0, std::int64_t t1) {
  const auto& anchor = *parent.metadata.boot_anchor;
  for (const char* f : {"sensors.three.csv", "sensors.three.uncalibrated.csv", "sensors.one.csv"}) {
    const auto expected = testing::filter_sensor_rows(parent.dir / f, anchor.elapsed_nanos, anchor.epoch_ms, t0, t1);
    CHECK_MESSAGE(sorted(testing::csv_lines(snippet_dir / f)) == sorted(expected), f);
  }
  for (const char* f : {"gps.csv", "consumption.csv"}) {
    CHECK_MESSAGE(testing::csv_lines(snippet_dir / f) == testing::filter_epoch_rows(parent.dir / f, t0, t1), f);
  }
}

}  // namespace

TEST_CASE("trim_instance errors") {
  TempDir tmp("trim");
  const auto inst = testing::write_synthetic(tmp.path(), RouteSpec{.length_m = 20.0}, 2, "p");
  const auto s = inst.metadata.start_epoch_ms, e = inst.metadata.stop_epoch_ms;
  try {
    trim_instance(inst, s + 100, s + 100);
    FAIL("expected EmptyInterval");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::EmptyInterval);
    CHECK(std::string(err.what()).find("invalid interval") != std::string::npos);
  }
  CHECK_THROWS_AS(trim_instance(inst, s - 1, s + 100), Error);
  CHECK_THROWS_AS(trim_instance(inst, s, e + 1), Error);
  CHECK_NOTHROW(trim_instance(inst, s, e));
}

TEST_CASE("snippet files equal a brute-force row filter") {
  TempDir tmp("snip");
  const auto parent = testing::write_synthetic(tmp.path(), RouteSpec{.length_m = 30.0}, 4, "p");
  const auto s = parent.metadata.start_epoch_ms;
  std::mt19937_64 rng(99);
  const auto span = parent.metadata.stop_epoch_ms - s;
  for (int i = 0; i < 10; ++i) {
    auto a = std::uniform_int_distribution<std::int64_t>(0, span - 1)(rng);
    auto b = std::uniform_int_distribution<std::int64_t>(0, span - 1)(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const auto dir = tmp / ("s" + std::to_string(i));
    const auto snip = extract_snippet(parent, s + a, s + b, dir);
    check_against_oracle(parent, dir, s + a, s + b);
    CHECK(snip.manifest["video"].is_null());
    CHECK(fs::exists(dir / "snippet.json"));
  }
}

TEST_CASE("snippet is itself a valid instance with adjusted metadata") {
  TempDir tmp("valid");
  const auto parent = testing::write_synthetic(tmp.path(), RouteSpec{.length_m = 30.0}, 4, "p");
  const auto s = parent.metadata.start_epoch_ms;
  extract_snippet(parent, s + 3000, s + 9000, tmp / "cut");
  const auto child = load_instance(tmp / "cut");
  CHECK(child.metadata.start_epoch_ms == s + 3000);
  CHECK(child.metadata.stop_epoch_ms == s + 9000);
  CHECK(child.metadata.extra["parent_instance_id"] == "p");
  CHECK(passes(validate_instance(child, Profile::Paper)));
  const auto& acc = child.sensors3.at("accelerometer");
  CHECK(acc.front().t_ms >= s + 3000);
  CHECK(acc.back().t_ms < s + 9000);
}

TEST_CASE("adjacent snippets concatenate to the parent interval") {
  TempDir tmp("adj");
  const auto parent = testing::write_synthetic(tmp.path(), RouteSpec{.length_m = 30.0}, 6, "p");
  const auto s = parent.metadata.start_epoch_ms;
  const auto whole = trim_instance(parent, s + 1000, s + 20000);
  const auto left = trim_instance(parent, s + 1000, s + 7777);
  const auto right = trim_instance(parent, s + 7777, s + 20000);
  for (const auto& [name, series] : whole.sensors3) {
    const auto& l = left.sensors3.at(name);
    const auto& r = right.sensors3.at(name);
    REQUIRE(l.size() + r.size() == series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
      const auto& x = i < l.size() ? l[i] : r[i - l.size()];
      CHECK(x.t_raw_nanos == series[i].t_raw_nanos);
      CHECK(x.x == series[i].x);
    }
  }
  CHECK(left.gps.size() + right.gps.size() == whole.gps.size());
  CHECK(left.battery.size() + right.battery.size() == whole.battery.size());
}

TEST_CASE("video cut without a media tool is an explicit error") {
  TempDir tmp("nomedia");
  const auto parent = testing::write_synthetic(tmp.path(), RouteSpec{.length_m = 20.0}, 1, "p");
  auto with_video = parent;
  with_video.video_path = tmp / "fake.mp4";
  const auto s = parent.metadata.start_epoch_ms;
  SnippetOptions opts;
  opts.media = nullptr;
  try {
    extract_snippet(with_video, s, s + 1000, tmp / "out", opts);
    FAIL("expected MediaToolMissing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MediaToolMissing);
  }
  opts.cut_video = false;
  CHECK_NOTHROW(extract_snippet(with_video, s, s + 1000, tmp / "out2", opts));
}
