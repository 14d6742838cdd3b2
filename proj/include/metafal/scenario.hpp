#pragma once

#include <cstddef>
#include <random>

#include "metafal/geometry.hpp"

namespace metafal {

using Rng = std::mt19937_64;

/// Car state: rear-axle position, heading, steering angle and speed.
struct SystemState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double steer = 0.0;
  double speed = 0.0;

  friend bool operator==(const SystemState&, const SystemState&) = default;
};

struct Control {
  double accel = 0.0;
  double steer_rate = 0.0;

  friend bool operator==(const Control&, const Control&) = default;
};

inline constexpr std::size_t kImageColumns = 100;
inline constexpr std::size_t kImageRows = 50;

/// Obstructed-track scenario constants. Defaults reproduce the evaluation
/// setup: a 1.6-wide band around y = 0.8 sin(x) on [0, 5pi], end zone from
/// 4.5pi, a 0.2 x 0.4 car, and three r = 0.1 obstacles.
struct ScenarioConfig {
  double amplitude = 0.8;
  double x_start = 0.0;
  double x_end = 5.0 * kPi;
  double width = 1.6;
  double end_zone_start = 4.5 * kPi;
  double boundary_sample_step = 0.01;

  double car_length = 0.4;
  double car_width = 0.2;
  double wheelbase = 0.3;
  double rear_overhang = 0.05;
  double max_speed = 0.4;
  double max_steer_rate = deg_to_rad(10.0);
  double max_steer = deg_to_rad(60.0);
  double control_period = 1.0;
  int substeps = 10;

  double sensor_range = 2.0;
  double sensor_half_angle = deg_to_rad(72.0);

  std::size_t obstacle_count = 3;
  double obstacle_radius = 0.1;
  std::size_t max_obstacles = 64;
  /// Reject sampled elements that overlap the car's initial footprint.
  bool keep_start_clear = true;

  std::size_t horizon = 300;
  bool timeout_is_violation = false;

  /// Throws ConfigError on non-positive or inconsistent values.
  void validate() const;

  double half_width() const { return 0.5 * width; }
  double row_depth() const { return sensor_range / static_cast<double>(kImageRows); }

  /// Rear axle at (x_start, c(x_start)), heading along the curve, at rest.
  SystemState initial_state() const;
};

OrientedRect car_shape(const SystemState& s, const ScenarioConfig& cfg);
/// Sensor pose: front axle, facing along the car heading.
Pose2 sensor_pose(const SystemState& s, const ScenarioConfig& cfg);
SectorFOV sensor_footprint(const SystemState& s, const ScenarioConfig& cfg);
/// Bearing of image column `col`, relative to the heading; column 0 is the
/// rightmost ray.
double column_bearing(std::size_t col, const ScenarioConfig& cfg);

}  // namespace metafal
