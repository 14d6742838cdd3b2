#include "metafal/scenario.hpp"

#include <cmath>

#include "metafal/errors.hpp"

namespace metafal {

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) {
      throw ConfigError(std::string("scenario: ") + what);
    }
  };
  require(std::isfinite(amplitude), "amplitude must be finite");
  require(x_start < x_end, "x_start must be below x_end");
  require(width > 0.0, "width must be positive");
  require(end_zone_start > x_start && end_zone_start < x_end,
          "end zone must start inside the track range");
  require(boundary_sample_step > 0.0, "boundary sample step must be positive");
  require(car_length > 0.0 && car_width > 0.0, "car dimensions must be positive");
  require(wheelbase > 0.0 && rear_overhang >= 0.0 && wheelbase + rear_overhang <= car_length,
          "wheelbase must fit inside the car body");
  require(max_speed > 0.0, "max speed must be positive");
  require(max_steer_rate > 0.0, "max steer rate must be positive");
  require(max_steer > 0.0 && max_steer < 0.5 * kPi, "max steer must be in (0, 90) degrees");
  require(control_period > 0.0, "control period must be positive");
  require(substeps >= 1, "substeps must be at least 1");
  require(sensor_range > 0.0, "sensor range must be positive");
  require(sensor_half_angle > 0.0 && sensor_half_angle <= kPi, "sensor half angle out of range");
  require(obstacle_radius > 0.0, "obstacle radius must be positive");
  require(obstacle_count <= max_obstacles, "obstacle count exceeds the collection maximum");
  require(horizon >= 1, "horizon must be at least 1");
}

SystemState ScenarioConfig::initial_state() const {
  SystemState s;
  s.x = x_start;
  s.y = amplitude * std::sin(x_start);
  s.heading = std::atan(amplitude * std::cos(x_start));
  return s;
}

OrientedRect car_shape(const SystemState& s, const ScenarioConfig& cfg) {
  const double offset = 0.5 * cfg.car_length - cfg.rear_overhang;
  return OrientedRect{Pose2(s.x + offset * std::cos(s.heading), s.y + offset * std::sin(s.heading),
                            s.heading),
                      cfg.car_length, cfg.car_width};
}

Pose2 sensor_pose(const SystemState& s, const ScenarioConfig& cfg) {
  return Pose2(s.x + cfg.wheelbase * std::cos(s.heading), s.y + cfg.wheelbase * std::sin(s.heading),
               s.heading);
}

SectorFOV sensor_footprint(const SystemState& s, const ScenarioConfig& cfg) {
  return SectorFOV{sensor_pose(s, cfg), cfg.sensor_range, cfg.sensor_half_angle};
}

double column_bearing(std::size_t col, const ScenarioConfig& cfg) {
  const double frac = static_cast<double>(col) / static_cast<double>(kImageColumns - 1);
  return -cfg.sensor_half_angle + 2.0 * cfg.sensor_half_angle * frac;
}

}  // namespace metafal
