#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "sideseeing/dataset.hpp"
#include "sideseeing/error.hpp"
#include "sideseeing/geo.hpp"
#include "support.hpp"

using namespace sideseeing;

namespace {

CitySummary row(std::string city, std::string country, std::int64_t routes, std::int64_t hospitals, double dist,
                double dur, std::int64_t frames, std::int64_t acc, std::int64_t gyr, std::int64_t mag) {
  return {std::move(city), std::move(country), routes, hospitals, dist, dur, frames, acc, gyr, mag};
}

std::vector<CitySummary> dataset_table() {
  return {row("Chicago", "USA", 25, 3, 5865, 4616, 175847, 609890, 58247, 333626),
          row("Jundiaí", "Brazil", 7, 2, 1482, 1890, 44476, 139294, 8243, 68096),
          row("Santos", "Brazil", 11, 2, 2247, 3532, 67431, 215573, 12499, 105680),
          row("São Paulo", "Brazil", 4, 2, 1271, 1840, 38129, 92638, 63624, 38073)};
}

}  // namespace

TEST_CASE("haversine: one degree of longitude on the equator") {
  CHECK(haversine_m({0, 0}, {0, 1}) == doctest::Approx(6371000.0 * std::numbers::pi / 180.0).epsilon(1e-12));
  CHECK(std::abs(haversine_m({0, 0}, {0, 1}) - 111195.0) <= 1.0);
  CHECK(haversine_m({10, 20}, {10, 20}) == 0.0);
}

TEST_CASE("haversine agrees with the spherical law of cosines") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> lat(-80, 80), lon(-179, 179);
  for (int i = 0; i < 500; ++i) {
    const double a = lat(rng), b = lon(rng), c = lat(rng), d = lon(rng);
    const double h = haversine_m({a, b}, {c, d});
    CHECK(h == doctest::Approx(testing::cosine_law_m(a, b, c, d)).epsilon(1e-6));
    CHECK(h == doctest::Approx(haversine_m({c, d}, {a, b})).epsilon(1e-12));
  }
}

TEST_CASE("haversine rejects invalid coordinates") {
  CHECK_THROWS_AS(haversine_m({91, 0}, {0, 0}), Error);
  CHECK_THROWS_AS(haversine_m({0, 181}, {0, 0}), Error);
  CHECK_THROWS_AS(haversine_m({NAN, 0}, {0, 0}), Error);
}

TEST_CASE("track length sums legs and honours the accuracy filter") {
  GpsTrack t{{0, 0.0, 0.0, 3.0}, {1000, 0.0, 0.001, 3.0}, {2000, 0.0, 0.5, 80.0}, {3000, 0.0, 0.002, 3.0}};
  const double leg = haversine_m({0, 0}, {0, 0.001});
  CHECK(track_length_m(t) == doctest::Approx(2 * leg));
  CHECK(track_length_m(t, {std::nullopt}) > 100000.0);
  CHECK(track_length_m({}) == 0.0);
  CHECK(track_length_m({t[0]}) == 0.0);
}

TEST_CASE("dataset table: the All row is the componentwise sum") {
  const auto all = aggregate_summaries(dataset_table());
  CHECK(all.city == "All");
  CHECK(all.routes == 47);
  CHECK(all.hospitals == 9);
  CHECK(all.distance_m == 10865.0);
  CHECK(all.duration_s == 11878.0);
  CHECK(all.video_frames == 325883);
  CHECK(all.acc_points == 1057395);
  CHECK(all.gyr_points == 142613);
  CHECK(all.mag_points == 545475);
}

TEST_CASE("aggregate edge cases") {
  CHECK_THROWS_AS(aggregate_summaries({}), Error);
  const auto one = dataset_table()[1];
  CHECK(aggregate_summaries({one}) == one);
}

TEST_CASE("aggregation is order independent") {
  auto rows = dataset_table();
  const auto a = aggregate_summaries(rows);
  std::reverse(rows.begin(), rows.end());
  CHECK(aggregate_summaries(rows) == a);
}

TEST_CASE("table formats") {
  const auto csv = format_summary_table(dataset_table(), TableFormat::Csv);
  CHECK(csv.rfind("City - Country,Routes,Hospitals,Distance,Duration,Video Frames,ACC,GYR,MAG\n", 0) == 0);
  CHECK(csv.find("Chicago - USA,25,3,5865,4616,175847,609890,58247,333626\n") != std::string::npos);
  CHECK(csv.find("All,47,9,10865,11878,325883,1057395,142613,545475\n") != std::string::npos);

  const auto md = format_summary_table(dataset_table(), TableFormat::Markdown);
  CHECK(md.find("1,057,395") != std::string::npos);

  const auto js = nlohmann::json::parse(format_summary_table(dataset_table(), TableFormat::Json));
  CHECK(js.dump().find("\"All\"") != std::string::npos);
}

TEST_CASE("summaries of synthetic instances match ground truth") {
  const auto config = protocol_dataset_config(1, 1);
  for (const auto& city : config.cities) {
    auto [inst, truth] = synthesize_instance(city.routes[0], city, 7, "g");
    const auto s = summarize_instance(inst);
    CHECK(s.acc_points == truth.counts.at("accelerometer"));
    CHECK(s.gyr_points == truth.counts.at("gyroscope"));
    CHECK(s.mag_points == truth.counts.at("magnetometer"));
    CHECK(s.video_frames == truth.video_frames);
    CHECK(s.frames_estimated);
    CHECK(std::abs(s.distance_m - truth.distance_m) <= 0.005 * truth.distance_m);
    CHECK(s.duration_s * 1000.0 == static_cast<double>(truth.stop_epoch_ms - truth.start_epoch_ms));
  }
}

TEST_CASE("zero-duration instance yields zeros with a warning") {
  Instance inst;
  inst.metadata.start_epoch_ms = inst.metadata.stop_epoch_ms = 5;
  const auto s = summarize_instance(inst);
  CHECK(s.distance_m == 0.0);
  CHECK(s.acc_points == 0);
  CHECK(std::find(s.warnings.begin(), s.warnings.end(), "zero_duration") != s.warnings.end());
}

TEST_CASE("summarize_cities groups by city and counts distinct facilities") {
  std::vector<InstanceSummary> rows(3);
  rows[0].city = "B";
  rows[0].facility = "h1";
  rows[0].acc_points = 10;
  rows[1].city = "A";
  rows[1].facility = "h1";
  rows[2].city = "B";
  rows[2].facility = "h2";
  rows[2].acc_points = 5;
  const auto cities = summarize_cities(rows);
  REQUIRE(cities.size() == 2);
  CHECK(cities[0].city == "A");
  CHECK(cities[1].routes == 2);
  CHECK(cities[1].hospitals == 2);
  CHECK(cities[1].acc_points == 15);
}

TEST_CASE("GeoJSON export is RFC 7946 structured with [lon, lat]") {
  const auto config = protocol_dataset_config(1, 1);
  std::vector<Instance> all;
  for (const auto& city : config.cities) all.push_back(synthesize_instance(city.routes[0], city, 3, city.name).first);
  const auto doc = to_geojson(all);
  CHECK(testing::geojson_problems(doc).empty());
  REQUIRE(doc["features"].size() == 4);
  const auto& f = doc["features"][0];
  CHECK(f["geometry"]["type"] == "LineString");
  // Chicago origin: longitude first.
  CHECK(f["geometry"]["coordinates"][0][0].get<double>() == doctest::Approx(-87.6298).epsilon(1e-4));
  CHECK(f["geometry"]["coordinates"][0][1].get<double>() == doctest::Approx(41.8781).epsilon(1e-4));
  CHECK(f["properties"]["city"] == "Chicago");
}

TEST_CASE("GeoJSON: single fix is a Point, no fixes is an error") {
  Instance inst;
  inst.metadata.stop_epoch_ms = 1000;
  CHECK_THROWS_AS(geojson_feature(inst), Error);
  inst.gps.push_back({0, -23.5, -46.6, 3});
  const auto f = geojson_feature(inst);
  CHECK(f["geometry"]["type"] == "Point");
  CHECK(testing::geojson_problems(f).empty());
}

TEST_CASE("the structural checker itself catches mistakes") {
  nlohmann::json bad = {{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", {{0.0, 95.0}}}}},
                        {"properties", nullptr}};
  CHECK(testing::geojson_problems(bad).size() >= 2);
  CHECK_FALSE(testing::geojson_problems({{"type", "FeatureCollection"}}).empty());
}
