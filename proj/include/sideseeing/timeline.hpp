#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sideseeing/error.hpp"
#include "sideseeing/instance.hpp"

namespace sideseeing {

/// Affine map from the boot clock of the sensors to wall-clock milliseconds.
struct Timeline {
  std::int64_t origin_epoch_ms = 0;
  BootAnchor anchor;

  double to_epoch_ms(std::int64_t raw_nanos) const {
    return static_cast<double>(anchor.epoch_ms) +
           static_cast<double>(raw_nanos - anchor.elapsed_nanos) / 1e6;
  }
};

Timeline timeline_of(const InstanceMetadata& metadata);

// Fills t_ms of every sensor sample from the boot anchor. GPS and battery
// timestamps are already wall-clock and stay untouched. Idempotent.
Instance to_timeline(Instance inst);
void apply_timeline(Instance& inst);

// Wall-clock time of video frame k under the fixed-rate convention.
std::int64_t frame_time_ms(const InstanceMetadata& metadata, std::int64_t frame_index);

inline double time_ms(const SensorSample3& s) { return s.t_ms; }
inline double time_ms(const SensorSample1& s) { return s.t_ms; }
inline double time_ms(const SensorSampleU3& s) { return s.t_ms; }
inline double time_ms(const GpsFix& s) { return static_cast<double>(s.t_epoch_ms); }
inline double time_ms(const BatterySample& s) { return static_cast<double>(s.t_epoch_ms); }

/// Samples with t0_ms <= t < t1_ms, in their original order.
template <class Sample>
std::vector<Sample> slice(const std::vector<Sample>& series, double t0_ms, double t1_ms) {
  if (!(t0_ms < t1_ms)) {
    throw Error(ErrorCode::EmptyInterval, "slice requires t0_ms < t1_ms");
  }
  std::vector<Sample> out;
  for (const auto& s : series) {
    const double t = time_ms(s);
    if (t >= t0_ms && t < t1_ms) out.push_back(s);
  }
  return out;
}

struct UniformSeries {
  double t0_ms = 0.0;
  double dt_ms = 1.0;
  std::vector<std::vector<double>> channels;

  std::size_t size() const { return channels.empty() ? 0 : channels.front().size(); }
  double time_at(std::size_t i) const { return t0_ms + static_cast<double>(i) * dt_ms; }
  // Each grid point covers [t_i, t_i + dt).
  double span_ms() const { return static_cast<double>(size()) * dt_ms; }
};

UniformSeries resample_linear(const Series<SensorSample3>& series, double rate_hz);

// Generic form used by the resampler; times must be non-decreasing.
UniformSeries resample_linear(std::span<const double> times_ms,
                              const std::vector<std::span<const double>>& channels,
                              double rate_hz);

struct WindowView {
  double t_center_ms = 0.0;
  std::size_t begin = 0;  // grid index, inclusive
  std::size_t end = 0;    // grid index, exclusive
};

// Window k covers [t0 + k*stride, t0 + k*stride + win). Only windows that fit
// entirely inside the series are produced.
std::vector<WindowView> sliding_windows(const UniformSeries& series, double win_ms,
                                        double stride_ms);

// (n - 1) / span of a sensor stream in Hz, 0 when undefined.
double observed_rate_hz(std::span<const double> times_ms);

template <class Sample>
std::vector<double> times_of(const std::vector<Sample>& series) {
  std::vector<double> t;
  t.reserve(series.size());
  for (const auto& s : series) t.push_back(time_ms(s));
  return t;
}

}  // namespace sideseeing
