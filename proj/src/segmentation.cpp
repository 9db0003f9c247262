#include "sideseeing/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sideseeing/error.hpp"

namespace sideseeing {

using nlohmann::json;

void SegmentationParams::validate() const {
  for (double v : {win_ms, stride_ms, pause_std_threshold, min_pause_ms, merge_gap_ms,
                   turn_window_ms, min_turn_deg, min_segment_ms}) {
    if (!(v > 0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, "segmentation parameters must be positive and finite");
    }
  }
}

namespace {

std::optional<Axis> axis_from_string(const std::string& s) {
  if (s == "auto") return std::nullopt;
  if (s == "x") return Axis::X;
  if (s == "y") return Axis::Y;
  if (s == "z") return Axis::Z;
  throw Error(ErrorCode::InvalidArgument, "turn_axis must be one of auto, x, y, z");
}

const char* axis_name(Axis a) {
  switch (a) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
  }
  return "x";
}

}  // namespace

SegmentationParams params_from_json(const json& doc) {
  SegmentationParams p;
  try {
    p.win_ms = doc.value("win_ms", p.win_ms);
    p.stride_ms = doc.value("stride_ms", p.stride_ms);
    p.pause_std_threshold = doc.value("pause_std_threshold", p.pause_std_threshold);
    p.min_pause_ms = doc.value("min_pause_ms", p.min_pause_ms);
    p.merge_gap_ms = doc.value("merge_gap_ms", p.merge_gap_ms);
    p.turn_window_ms = doc.value("turn_window_ms", p.turn_window_ms);
    p.min_turn_deg = doc.value("min_turn_deg", p.min_turn_deg);
    p.min_segment_ms = doc.value("min_segment_ms", p.min_segment_ms);
    p.turn_axis = axis_from_string(doc.value("turn_axis", std::string("auto")));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedJson, e.what());
  }
  p.validate();
  return p;
}

json to_json(const SegmentationParams& p) {
  return {{"win_ms", p.win_ms},
          {"stride_ms", p.stride_ms},
          {"pause_std_threshold", p.pause_std_threshold},
          {"min_pause_ms", p.min_pause_ms},
          {"merge_gap_ms", p.merge_gap_ms},
          {"turn_axis", p.turn_axis ? axis_name(*p.turn_axis) : "auto"},
          {"turn_window_ms", p.turn_window_ms},
          {"min_turn_deg", p.min_turn_deg},
          {"min_segment_ms", p.min_segment_ms}};
}

json to_json(const PauseInterval& p) {
  return {{"t_start_ms", p.t_start_ms}, {"t_end_ms", p.t_end_ms}, {"mean_std", p.mean_std}};
}

json to_json(const TurnEvent& t) {
  return {{"t_start_ms", t.t_start_ms},
          {"t_end_ms", t.t_end_ms},
          {"angle_deg", t.angle_deg},
          {"axis", axis_name(t.axis)}};
}

json to_json(const WalkSegment& s) { return {{"t_start_ms", s.t_start_ms}, {"t_end_ms", s.t_end_ms}}; }

UniformSeries accel_magnitude(const UniformSeries& accel) {
  if (accel.size() == 0 || accel.channels.size() != 3) {
    throw Error(ErrorCode::InvalidArgument, "magnitude needs a non-empty 3-channel series");
  }
  UniformSeries out;
  out.t0_ms = accel.t0_ms;
  out.dt_ms = accel.dt_ms;
  out.channels.assign(1, std::vector<double>(accel.size()));
  const auto& x = accel.channels[0];
  const auto& y = accel.channels[1];
  const auto& z = accel.channels[2];
  for (std::size_t i = 0; i < accel.size(); ++i) {
    out.channels[0][i] = std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
  }
  return out;
}

namespace {

struct Stream {
  std::vector<double> t, x, y, z;
};

Stream stream_of(const Instance& inst, SensorKind kind) {
  const auto* series = find_sensor(inst, kind);
  if (!series || series->empty()) {
    throw Error(ErrorCode::MissingSensor, std::string(to_string(kind)));
  }
  std::optional<Timeline> timeline;
  if (!inst.on_timeline) timeline = timeline_of(inst.metadata);
  Stream s;
  for (const auto& sample : *series) {
    s.t.push_back(timeline ? timeline->to_epoch_ms(sample.t_raw_nanos) : sample.t_ms);
    s.x.push_back(sample.x);
    s.y.push_back(sample.y);
    s.z.push_back(sample.z);
  }
  return s;
}

UniformSeries uniform(const Stream& s) {
  if (s.t.size() < 2) throw Error(ErrorCode::TooFewSamples, "stream has fewer than 2 samples");
  const double rate = observed_rate_hz(s.t);
  if (!(rate > 0)) throw Error(ErrorCode::TooFewSamples, "stream has zero time span");
  return resample_linear(s.t, {s.x, s.y, s.z}, rate);
}

double window_std(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  const auto n = static_cast<double>(end - begin);
  if (n <= 0) return 0.0;
  double mean = 0.0;
  for (std::size_t i = begin; i < end; ++i) mean += v[i];
  mean /= n;
  double var = 0.0;
  for (std::size_t i = begin; i < end; ++i) var += (v[i] - mean) * (v[i] - mean);
  return std::sqrt(var / n);
}

}  // namespace

std::vector<PauseInterval> detect_pauses(const Instance& inst, const SegmentationParams& params) {
  params.validate();
  const auto stream = stream_of(inst, SensorKind::Accelerometer);
  if (stream.t.back() - stream.t.front() < 2.0 * params.win_ms) {
    throw Error(ErrorCode::SpanTooShort, "accelerometer span shorter than two windows");
  }
  const auto magnitude = accel_magnitude(uniform(stream));
  const auto& m = magnitude.channels[0];
  const auto windows = sliding_windows(magnitude, params.win_ms, params.stride_ms);
  const double series_end = magnitude.t0_ms + magnitude.span_ms();

  struct Run {
    double start, end, std_sum;
    std::size_t count;
  };
  std::vector<Run> runs;
  bool open = false;
  for (const auto& w : windows) {
    const double sd = window_std(m, w.begin, w.end);
    const double w_start = w.t_center_ms - params.win_ms / 2.0;
    const double w_end = std::min(series_end, w.t_center_ms + params.win_ms / 2.0);
    if (sd < params.pause_std_threshold) {
      if (open) {
        runs.back().end = w_end;
        runs.back().std_sum += sd;
        runs.back().count += 1;
      } else {
        runs.push_back({w_start, w_end, sd, 1});
        open = true;
      }
    } else {
      open = false;
    }
  }

  std::vector<Run> merged;
  for (const auto& r : runs) {
    if (!merged.empty() && r.start - merged.back().end < params.merge_gap_ms) {
      auto& last = merged.back();
      last.end = std::max(last.end, r.end);
      last.std_sum += r.std_sum;
      last.count += r.count;
    } else {
      merged.push_back(r);
    }
  }

  std::vector<PauseInterval> out;
  for (const auto& r : merged) {
    if (r.end - r.start >= params.min_pause_ms) {
      out.push_back({r.start, r.end, r.std_sum / static_cast<double>(r.count)});
    }
  }
  return out;
}

Axis dominant_turn_axis(const UniformSeries& gyro) {
  const auto n = gyro.size();
  const auto width = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1000.0 / gyro.dt_ms)));
  Axis best = Axis::X;
  double best_energy = -1.0;
  for (std::size_t c = 0; c < 3 && c < gyro.channels.size(); ++c) {
    const auto& v = gyro.channels[c];
    double energy = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += v[i];
      if (i >= width) acc -= v[i - width];
      if (i + 1 >= width) {
        const double avg = acc / static_cast<double>(width);
        energy += avg * avg;
      }
    }
    if (energy > best_energy) {
      best_energy = energy;
      best = static_cast<Axis>(c);
    }
  }
  return best;
}

std::vector<TurnEvent> detect_turns(const Instance& inst, const SegmentationParams& params) {
  params.validate();
  const auto gyro = uniform(stream_of(inst, SensorKind::Gyroscope));
  const Axis axis = params.turn_axis.value_or(dominant_turn_axis(gyro));
  const auto& omega = gyro.channels[static_cast<std::size_t>(axis)];
  const std::size_t n = gyro.size();
  const double dt_s = gyro.dt_ms / 1000.0;
  constexpr double kDegPerRad = 180.0 / std::numbers::pi;

  // Cumulative heading change in degrees at each grid point (trapezoid rule).
  std::vector<double> heading(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    heading[i] = heading[i - 1] + 0.5 * (omega[i - 1] + omega[i]) * dt_s * kDegPerRad;
  }

  const auto win = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(params.turn_window_ms / gyro.dt_ms)));
  const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(params.stride_ms / gyro.dt_ms)));

  struct Span {
    std::size_t begin, end;
    int sign;
  };
  std::vector<Span> spans;
  for (std::size_t k = 0; k + win < n; k += stride) {
    const double delta = heading[k + win] - heading[k];
    if (std::abs(delta) < params.min_turn_deg) continue;
    const int sign = delta > 0 ? 1 : -1;
    if (!spans.empty() && spans.back().sign == sign && k <= spans.back().end) {
      spans.back().end = k + win;
    } else {
      spans.push_back({k, k + win, sign});
    }
  }

  std::vector<TurnEvent> out;
  for (const auto& s : spans) {
    const double angle = heading[s.end] - heading[s.begin];
    if (std::abs(angle) < params.min_turn_deg) continue;
    out.push_back({gyro.time_at(s.begin), gyro.time_at(s.end), angle, axis});
  }
  return out;
}

std::vector<WalkSegment> split_by_pauses(const Instance& inst, const SegmentationParams& params) {
  const auto pauses = detect_pauses(inst, params);
  const auto stream = stream_of(inst, SensorKind::Accelerometer);
  const double span_start = stream.t.front();
  const double span_end = stream.t.back();
  std::vector<WalkSegment> out;
  double cursor = span_start;
  auto emit = [&](double a, double b) {
    if (b - a >= params.min_segment_ms) out.push_back({a, b});
  };
  for (const auto& p : pauses) {
    emit(cursor, std::min(p.t_start_ms, span_end));
    cursor = std::max(cursor, p.t_end_ms);
  }
  emit(cursor, span_end);
  return out;
}

}  // namespace sideseeing
