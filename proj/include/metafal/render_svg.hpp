#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "metafal/env_model.hpp"
#include "metafal/simulator.hpp"

namespace metafal {

struct RenderOptions {
  double pixels_per_unit = 60.0;
  /// Step whose sensor wedge is drawn; the last step when unset.
  std::optional<std::size_t> fov_step;
};

/// Track band, end zone, obstacles, the trajectory polyline, the car at the
/// terminal step (red on a collision) and one sensor wedge.
std::string render_svg(const Environment& env, const Trajectory& traj, const StatusReport& status,
                       const ScenarioConfig& cfg, const RenderOptions& opts = {});

}  // namespace metafal
