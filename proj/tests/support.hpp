#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "sideseeing/dataset.hpp"
#include "sideseeing/instance.hpp"
#include "sideseeing/media.hpp"

namespace testing {

namespace fs = std::filesystem;

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

// Media tool from SIDESEEING_FFMPEG / PATH; unavailable when neither is set.
sideseeing::MediaTool test_media();

// Single-city config with one route per entry of `routes`.
sideseeing::SynthConfig one_city(std::vector<sideseeing::RouteSpec> routes, std::uint64_t seed = 1);

// Writes an instance from `route` under dir/<id>; returns the loaded instance.
sideseeing::Instance write_synthetic(const fs::path& dir, const sideseeing::RouteSpec& route,
                                     std::uint64_t seed = 1, const std::string& id = "inst");

std::string slurp(const fs::path& path);

// Data lines (header dropped) of a CSV file.
std::vector<std::string> csv_lines(const fs::path& path);

// Independent row filter: keeps the data lines of a sensor CSV whose boot
// timestamp maps into [t0, t1) under the anchor, done with integer arithmetic.
std::vector<std::string> filter_sensor_rows(const fs::path& csv, std::int64_t anchor_elapsed_ns,
                                            std::int64_t anchor_epoch_ms, std::int64_t t0_ms,
                                            std::int64_t t1_ms);

// Same for files whose first column is already epoch milliseconds.
std::vector<std::string> filter_epoch_rows(const fs::path& csv, std::int64_t t0_ms, std::int64_t t1_ms);

// Structural RFC 7946 check. Returns a list of problems (empty = valid).
std::vector<std::string> geojson_problems(const nlohmann::json& doc);

// Reference great-circle distance via the spherical law of cosines.
double cosine_law_m(double lat1, double lon1, double lat2, double lon2);

}  // namespace testing
