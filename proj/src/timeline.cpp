#include "sideseeing/timeline.hpp"

#include <cmath>

namespace sideseeing {

namespace {

constexpr double kEps = 1e-9;

template <class Sample>
void stamp(std::map<std::string, Series<Sample>>& streams, const Timeline& timeline) {
  for (auto& [name, series] : streams) {
    for (auto& s : series) s.t_ms = timeline.to_epoch_ms(s.t_raw_nanos);
  }
}

}  // namespace

Timeline timeline_of(const InstanceMetadata& metadata) {
  if (!metadata.boot_anchor) {
    throw Error(ErrorCode::MissingAnchor,
                "instance '" + metadata.instance_id + "' has no boot_anchor");
  }
  return Timeline{metadata.start_epoch_ms, *metadata.boot_anchor};
}

void apply_timeline(Instance& inst) {
  const Timeline timeline = timeline_of(inst.metadata);
  stamp(inst.sensors3, timeline);
  stamp(inst.sensors1, timeline);
  stamp(inst.sensors_u3, timeline);
  inst.on_timeline = true;
}

Instance to_timeline(Instance inst) {
  apply_timeline(inst);
  return inst;
}

std::int64_t frame_time_ms(const InstanceMetadata& metadata, std::int64_t frame_index) {
  if (metadata.video_fps <= 0) {
    throw Error(ErrorCode::InvalidArgument, "video_fps must be positive");
  }
  return metadata.start_epoch_ms +
         static_cast<std::int64_t>(
             std::llround(1000.0 * static_cast<double>(frame_index) / metadata.video_fps));
}

UniformSeries resample_linear(std::span<const double> times_ms,
                              const std::vector<std::span<const double>>& channels,
                              double rate_hz) {
  if (!(rate_hz > 0) || !std::isfinite(rate_hz)) {
    throw Error(ErrorCode::InvalidArgument, "rate_hz must be positive");
  }
  const std::size_t n = times_ms.size();
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "resampling needs at least 2 samples");

  UniformSeries out;
  out.t0_ms = times_ms.front();
  out.dt_ms = 1000.0 / rate_hz;
  const double span = times_ms.back() - times_ms.front();
  const auto points = static_cast<std::size_t>(std::floor(span / out.dt_ms + kEps)) + 1;
  out.channels.assign(channels.size(), std::vector<double>(points, 0.0));

  std::size_t seg = 0;  // times_ms[seg] <= t < times_ms[seg + 1], or the last segment
  for (std::size_t k = 0; k < points; ++k) {
    const double t = out.time_at(k);
    while (seg + 2 < n && times_ms[seg + 1] <= t) ++seg;
    const double ta = times_ms[seg];
    const double tb = times_ms[seg + 1];
    double w = tb > ta ? (t - ta) / (tb - ta) : 1.0;
    w = std::clamp(w, 0.0, 1.0);
    for (std::size_t c = 0; c < channels.size(); ++c) {
      const double a = channels[c][seg];
      const double b = channels[c][seg + 1];
      out.channels[c][k] = a + (b - a) * w;
    }
  }
  return out;
}

UniformSeries resample_linear(const Series<SensorSample3>& series, double rate_hz) {
  std::vector<double> t, x, y, z;
  t.reserve(series.size());
  x.reserve(series.size());
  y.reserve(series.size());
  z.reserve(series.size());
  for (const auto& s : series) {
    t.push_back(s.t_ms);
    x.push_back(s.x);
    y.push_back(s.y);
    z.push_back(s.z);
  }
  return resample_linear(t, {x, y, z}, rate_hz);
}

std::vector<WindowView> sliding_windows(const UniformSeries& series, double win_ms,
                                        double stride_ms) {
  if (!(win_ms >= series.dt_ms - kEps) || !(stride_ms >= series.dt_ms - kEps)) {
    throw Error(ErrorCode::InvalidArgument, "window and stride must be at least dt");
  }
  const double span = series.span_ms();
  if (win_ms > span + kEps) {
    throw Error(ErrorCode::WindowTooLarge, "window longer than the series");
  }
  const auto count = static_cast<std::size_t>(std::floor((span - win_ms) / stride_ms + kEps)) + 1;
  std::vector<WindowView> out;
  out.reserve(count);
  const double dt = series.dt_ms;
  for (std::size_t k = 0; k < count; ++k) {
    const double a = static_cast<double>(k) * stride_ms;  // offset from t0
    WindowView w;
    w.t_center_ms = series.t0_ms + a + win_ms / 2.0;
    w.begin = static_cast<std::size_t>(std::ceil(a / dt - kEps));
    w.end = std::min(series.size(),
                     static_cast<std::size_t>(std::ceil((a + win_ms) / dt - kEps)));
    out.push_back(w);
  }
  return out;
}

double observed_rate_hz(std::span<const double> times_ms) {
  if (times_ms.size() < 2) return 0.0;
  const double span = times_ms.back() - times_ms.front();
  if (!(span > 0)) return 0.0;
  return static_cast<double>(times_ms.size() - 1) / (span / 1000.0);
}

}  // namespace sideseeing
