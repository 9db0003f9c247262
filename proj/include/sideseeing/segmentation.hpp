#pragma once

#include <optional>
#include <vector>

#include "json.hpp"
#include "sideseeing/instance.hpp"
#include "sideseeing/timeline.hpp"

namespace sideseeing {

struct PauseInterval {
  double t_start_ms = 0.0;
  double t_end_ms = 0.0;
  double mean_std = 0.0;  // m/s², mean windowed std inside the interval
};

enum class Axis { X = 0, Y = 1, Z = 2 };

struct TurnEvent {
  double t_start_ms = 0.0;
  double t_end_ms = 0.0;
  double angle_deg = 0.0;  // positive = left (counter-clockwise about the up axis)
  Axis axis = Axis::X;
};

struct SegmentationParams {
  double win_ms = 1000.0;
  double stride_ms = 100.0;
  double pause_std_threshold = 0.35;
  double min_pause_ms = 1000.0;
  double merge_gap_ms = 300.0;
  std::optional<Axis> turn_axis;  // nullopt = auto
  double turn_window_ms = 3000.0;
  double min_turn_deg = 60.0;
  double min_segment_ms = 1000.0;

  void validate() const;
};

SegmentationParams params_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SegmentationParams& params);

/// sqrt(x² + y² + z²) at every grid point.
UniformSeries accel_magnitude(const UniformSeries& accel);

std::vector<PauseInterval> detect_pauses(const Instance& inst, const SegmentationParams& params = {});

// Gyroscope axis with the largest low-frequency energy (1 s moving average).
Axis dominant_turn_axis(const UniformSeries& gyro);

std::vector<TurnEvent> detect_turns(const Instance& inst, const SegmentationParams& params = {});

struct WalkSegment {
  double t_start_ms = 0.0;
  double t_end_ms = 0.0;
};

std::vector<WalkSegment> split_by_pauses(const Instance& inst, const SegmentationParams& params = {});

nlohmann::json to_json(const PauseInterval& p);
nlohmann::json to_json(const TurnEvent& t);
nlohmann::json to_json(const WalkSegment& s);

}  // namespace sideseeing
