#include <cmath>
#include <fstream>

#include "doctest.h"
#include "sideseeing/dataset.hpp"
#include "sideseeing/error.hpp"
#include "sideseeing/taxonomy.hpp"
#include "sideseeing/timeline.hpp"
#include "support.hpp"

using namespace sideseeing;
using testing::TempDir;

namespace {

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = testing::slurp(e.path());
  }
  return out;
}

}  // namespace

TEST_CASE("scan: missing root and empty root") {
  TempDir tmp("scan0");
  CHECK_THROWS_AS(scan_dataset(tmp / "absent"), Error);
  CHECK(scan_dataset(tmp.path()).entries.empty());
}

TEST_CASE("scan of the synthetic four-city dataset") {
  TempDir tmp("scan4");
  generate_synthetic(protocol_dataset_config(1, 2), tmp.path());
  const auto index = scan_dataset(tmp.path());
  CHECK(index.entries.size() == 8);
  CHECK(index.error_count() == 0);
  CHECK(index.cities() == std::vector<std::string>{"Chicago", "Jundiaí", "Santos", "São Paulo"});
  CHECK(std::is_sorted(index.entries.begin(), index.entries.end(),
                       [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; }));
  CHECK(index.find("santos-02") != nullptr);
  CHECK(index.find("nope") == nullptr);
  // Idempotent.
  CHECK(to_json(scan_dataset(tmp.path())) == to_json(index));
}

TEST_CASE("scan marks a corrupted instance without aborting") {
  TempDir tmp("scanbad");
  auto config = testing::one_city({RouteSpec{.length_m = 10}, RouteSpec{.length_m = 10}, RouteSpec{.length_m = 10},
                                   RouteSpec{.length_m = 10}, RouteSpec{.length_m = 10}});
  generate_synthetic(config, tmp.path());
  {
    std::ofstream out(tmp / "testville/testville-03/metadata.json");
    out << "{ not json";
  }
  const auto index = scan_dataset(tmp.path());
  CHECK(index.entries.size() == 5);
  CHECK(index.error_count() == 1);
  CHECK_FALSE(index.find("testville-03")->ok);
}

TEST_CASE("scan flags duplicate instance ids and skips hidden directories") {
  TempDir tmp("dup");
  generate_synthetic(testing::one_city({RouteSpec{.length_m = 10}}), tmp.path());
  fs::create_directories(tmp / "elsewhere");
  fs::copy(tmp / "testville/testville-01", tmp / "elsewhere/testville-01");
  fs::create_directories(tmp / ".bundle-cache/x");
  fs::copy(tmp / "testville/testville-01/metadata.json", tmp / ".bundle-cache/x/metadata.json");
  const auto index = scan_dataset(tmp.path());
  CHECK(index.entries.size() == 2);
  CHECK(index.error_count() == 1);
}

TEST_CASE("generator with a fixed seed is byte-identical across runs") {
  TempDir a("gen-a"), b("gen-b");
  auto config = protocol_dataset_config(7, 1);
  generate_synthetic(config, a.path());
  generate_synthetic(config, b.path());
  const auto ta = tree_contents(a.path()), tb = tree_contents(b.path());
  REQUIRE(ta.size() == tb.size());
  for (const auto& [name, content] : ta) {
    CHECK_MESSAGE(content == tb.at(name), name);
  }
  TempDir c("gen-c");
  generate_synthetic(protocol_dataset_config(8, 1), c.path());
  CHECK(tree_contents(c.path()).at("chicago/chicago-01/sensors.three.csv") !=
        ta.at("chicago/chicago-01/sensors.three.csv"));
}

TEST_CASE("200 m route: duration and GPS row count follow from the config") {
  RouteSpec route;
  route.length_m = 200.0;
  route.pauses.clear();
  CitySpec city{"C", "X", {10.0, 10.0}, {}};
  auto [inst, truth] = synthesize_instance(route, city, 1, "long");
  const double duration_s = static_cast<double>(inst.metadata.stop_epoch_ms - inst.metadata.start_epoch_ms) / 1000.0;
  CHECK(duration_s == doctest::Approx(200.0 / 1.3).epsilon(1e-5));
  CHECK(std::abs(static_cast<double>(inst.gps.size()) - duration_s * 15.0) <= 1.0);
  CHECK(static_cast<std::int64_t>(inst.gps.size()) == truth.counts.at("gps"));
  CHECK(std::abs(static_cast<double>(inst.sensors3.at("accelerometer").size()) - duration_s * 50.0) <= 1.0);
}

TEST_CASE("configured pauses pass through to ground truth") {
  RouteSpec route;
  route.length_m = 26.0;  // 20 s walk, 24 s total
  CitySpec city{"C", "X", {0, 0}, {}};
  auto [inst, truth] = synthesize_instance(route, city, 1, "p");
  const double s = static_cast<double>(inst.metadata.start_epoch_ms);
  REQUIRE(truth.pauses.size() == 2);
  CHECK(truth.pauses[0].t_start_ms == s);
  CHECK(truth.pauses[0].t_end_ms == s + 2000.0);
  CHECK(truth.pauses[1].t_start_ms == doctest::Approx(s + 22000.0));
  CHECK(truth.pauses[1].t_end_ms == doctest::Approx(s + 24000.0));
}

TEST_CASE("generated instances pass the paper profile and summaries match truth") {
  TempDir tmp("gen-v");
  const auto truth = generate_synthetic(protocol_dataset_config(3, 1), tmp.path());
  REQUIRE(truth.instances.size() == 4);
  for (const auto& t : truth.instances) {
    const auto inst = load_instance(t.path);
    CHECK_MESSAGE(passes(validate_instance(inst, Profile::Paper)), t.instance_id);
    CHECK(inst.sensors3.at("accelerometer").size() == static_cast<std::size_t>(t.counts.at("accelerometer")));
    CHECK(inst.sensors_u3.at("magnetometer_uncalibrated").size() ==
          static_cast<std::size_t>(t.counts.at("magnetometer_uncalibrated")));
    CHECK(inst.battery.size() == static_cast<std::size_t>(t.counts.at("battery")));
  }
  CHECK(fs::exists(tmp / "ground_truth.json"));
}

TEST_CASE("generator rejects invalid routes and missing media when video is required") {
  TempDir tmp("gen-e");
  CHECK_THROWS_AS(generate_synthetic(testing::one_city({RouteSpec{.length_m = -1.0}}), tmp.path()), Error);
  RouteSpec overlap;
  overlap.pauses = {{0.0, 5.0}, {3.0, 2.0}};
  CHECK_THROWS_AS(generate_synthetic(testing::one_city({overlap}), tmp.path()), Error);

  RouteSpec video;
  video.length_m = 5.0;
  video.video = true;
  auto config = testing::one_city({video});
  config.require_video = true;
  try {
    generate_synthetic(config, tmp / "v");
    FAIL("expected MediaToolMissing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MediaToolMissing);
  }
  config.require_video = false;
  const auto truth = generate_synthetic(config, tmp / "v2");
  CHECK_FALSE(truth.instances[0].has_video);
}

TEST_CASE("synth config JSON round trip") {
  auto config = protocol_dataset_config(5, 2);
  config.cities[0].routes[0].tones = {{1.0, 2.0, 880.0}};
  config.cities[0].routes[0].seed = 77;
  config.cities[0].routes[1].noise.gps_m = 1.5;
  const auto back = synth_config_from_json(to_json(config));
  CHECK(to_json(back) == to_json(config));
  CHECK(back.cities[0].routes[0].seed == std::optional<std::uint64_t>(77));
  CHECK_THROWS_AS(synth_config_from_json({{"seed", 1}}), Error);

  const auto minimal = synth_config_from_json(nlohmann::json::parse(R"({"cities":[{"name":"A","routes":[{}]}]})"));
  CHECK(minimal.cities[0].routes[0].imu_rate_hz == 50.0);
  CHECK(minimal.cities[0].routes[0].gps_rate_hz == 15.0);
  CHECK(minimal.cities[0].routes[0].fps == 30.0);
  CHECK(minimal.cities[0].routes[0].walk_speed_mps == 1.3);
}

TEST_CASE("watermark decoding") {
  std::vector<std::uint8_t> frame(kWatermarkWidth * kWatermarkHeight, 0);
  const std::int64_t index = 0b1010'0000'0110'0101;
  for (int b = 0; b < kWatermarkBits; ++b) {
    if (!((index >> b) & 1)) continue;
    for (int y = 0; y < kWatermarkHeight; ++y)
      for (int x = 8 * b; x < 8 * b + 8; ++x) frame[y * kWatermarkWidth + x] = 250;
  }
  CHECK(decode_watermark(frame, kWatermarkWidth, kWatermarkHeight) == index);
  CHECK_THROWS_AS(decode_watermark(frame, 10, 10), Error);
}

TEST_CASE("bundle of a sensor-only instance") {
  TempDir tmp("bundle");
  const auto inst = testing::write_synthetic(tmp.path(), RouteSpec{.length_m = 78.0}, 3, "b");
  std::vector<Annotation> anns(1);
  anns[0].id = "a";
  anns[0].instance_id = "b";
  anns[0].t_start_ms = inst.metadata.start_epoch_ms + 1000;
  anns[0].t_end_ms = inst.metadata.start_epoch_ms + 4000;
  anns[0].category = "Sidewalk structure";
  anns[0].element = "Tactile paving";
  write_annotations(inst.dir, anns);

  const auto out = export_bundle(inst, tmp / "bundle");
  CHECK_FALSE(fs::exists(out / "video.mp4"));
  const auto doc = nlohmann::json::parse(testing::slurp(out / "instance.json"));
  CHECK(doc["bundle_version"] == kBundleVersion);
  CHECK(doc["no_video"] == true);
  CHECK(doc["taxonomy"]["leaf_count"] == 68);
  CHECK(doc["summary"]["acc_points"].get<std::int64_t>() == static_cast<std::int64_t>(inst.sensors3.at("accelerometer").size()));

  const auto sensors = nlohmann::json::parse(testing::slurp(out / "sensors.downsampled.json"));
  const auto& acc = inst.sensors3.at("accelerometer");
  const double span_s = (acc.back().t_ms - acc.front().t_ms) / 1000.0;
  const auto count = sensors["sensors"]["accelerometer"]["count"].get<double>();
  CHECK(std::abs(count - std::ceil(span_s * 10.0)) <= 1.0);
  CHECK(sensors["sensors"]["accelerometer"]["x"].size() == static_cast<std::size_t>(count));
  CHECK(sensors["rate_hz"] == 10.0);

  CHECK(testing::geojson_problems(nlohmann::json::parse(testing::slurp(out / "gps.geojson"))).empty());

  const auto back = annotations_from_json(nlohmann::json::parse(testing::slurp(out / "annotations.json")));
  CHECK(back == anns);
  const auto report = validate_annotations(back, &inst, load_taxonomy());
  CHECK_MESSAGE(report.empty(), (report.empty() ? "" : report.front().message));
}

TEST_CASE("bundle without annotations or GPS") {
  TempDir tmp("bundle2");
  auto inst = testing::write_synthetic(tmp.path(), RouteSpec{.length_m = 10.0}, 3, "b");
  fs::remove(inst.dir / "annotations.json");
  inst.gps.clear();
  const auto out = export_bundle(inst, tmp / "bundle");
  CHECK(nlohmann::json::parse(testing::slurp(out / "annotations.json")).empty());
  const auto geo = nlohmann::json::parse(testing::slurp(out / "gps.geojson"));
  CHECK(geo["type"] == "FeatureCollection");
  CHECK(geo["features"].empty());
}
