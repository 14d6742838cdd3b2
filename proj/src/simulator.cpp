#include "metafal/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "metafal/errors.hpp"

namespace metafal {

std::array<std::uint8_t, kBitmapBytes> Observation::pack_bitmap() const {
  std::array<std::uint8_t, kBitmapBytes> bits{};
  for (std::size_t row = 0; row < kImageRows; ++row) {
    for (std::size_t col = 0; col < kImageColumns; ++col) {
      if (pixel(col, row)) {
        const std::size_t idx = row * kImageColumns + col;
        bits[idx / 8] |= static_cast<std::uint8_t>(0x80u >> (idx % 8));
      }
    }
  }
  return bits;
}

Observation Observation::from_bitmap(std::span<const std::uint8_t, kBitmapBytes> bits,
                                     double steer) {
  Observation obs;
  obs.steer = steer;
  for (std::size_t col = 0; col < kImageColumns; ++col) {
    std::optional<std::size_t> first;
    for (std::size_t row = 0; row < kImageRows; ++row) {
      const std::size_t idx = row * kImageColumns + col;
      const bool set = (bits[idx / 8] & (0x80u >> (idx % 8))) != 0;
      if (set && !first) {
        first = row;
      } else if (!set && first) {
        throw ControllerProtocolError("bitmap column " + std::to_string(col) +
                                      " is not filled to the far edge");
      }
    }
    if (!first) {
      throw ControllerProtocolError("bitmap column " + std::to_string(col) + " is empty");
    }
    obs.hit_row[col] = static_cast<std::uint8_t>(*first);
  }
  return obs;
}

std::string_view to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::kNone:
      return "none";
    case FailureKind::kCollisionObstacle:
      return "collision_obstacle";
    case FailureKind::kCollisionShoulder:
      return "collision_shoulder";
    case FailureKind::kTimeoutNoReach:
      return "timeout_no_reach";
  }
  return "unknown";
}

SystemState step(const SystemState& s, const Control& u, const ScenarioConfig& cfg) {
  return integrate(s, u, cfg, [](const SystemState&) {});
}

namespace {

double obstacle_clearance(const OrientedRect& shape, const Environment& env) {
  double best = std::numeric_limits<double>::infinity();
  for (const Disc& d : env.obstacles()) {
    best = std::min(best, rect_to_disc_distance(shape, d));
  }
  return best;
}

// Obstacle and end-zone terms of one state; the shoulder term is the
// caller's.
void fold_state(EntryCheck& acc, const SystemState& s, const Environment& env,
                const ScenarioConfig& cfg, bool with_shoulder) {
  const OrientedRect shape = car_shape(s, cfg);
  const double obs = obstacle_clearance(shape, env);
  acc.obstacle_clearance = std::min(acc.obstacle_clearance, obs);
  acc.obstacle_contact = acc.obstacle_contact || obs <= 0.0;
  acc.end_contained = acc.end_contained || rect_in_end_zone(shape, env.track());
  if (with_shoulder) {
    const double sh = rect_to_shoulders_distance(shape, env.track());
    acc.shoulder_clearance = std::min(acc.shoulder_clearance, sh);
  }
}

EntryCheck empty_check() {
  EntryCheck c;
  c.obstacle_clearance = std::numeric_limits<double>::infinity();
  c.shoulder_clearance = std::numeric_limits<double>::infinity();
  return c;
}

void finish(EntryCheck& c) { c.shoulder_contact = c.shoulder_clearance <= 0.0; }

}  // namespace

EntryCheck check_state(const SystemState& s, const Environment& env, const ScenarioConfig& cfg) {
  EntryCheck c = empty_check();
  fold_state(c, s, env, cfg, true);
  finish(c);
  return c;
}

std::pair<EntryCheck, SystemState> check_step(const SystemState& from, const Control& u,
                                              const Environment& env,
                                              const ScenarioConfig& cfg) {
  EntryCheck c = empty_check();
  const SystemState next =
      integrate(from, u, cfg, [&](const SystemState& s) { fold_state(c, s, env, cfg, true); });
  finish(c);
  return {c, next};
}

EntryCheck recheck_step(const SystemState& from, const Control& u, const Environment& env,
                        const ScenarioConfig& cfg, double cached_shoulder_clearance) {
  EntryCheck c = empty_check();
  integrate(from, u, cfg, [&](const SystemState& s) { fold_state(c, s, env, cfg, false); });
  c.shoulder_clearance = cached_shoulder_clearance;
  finish(c);
  return c;
}

EntryCheck recheck_state(const SystemState& s, const Environment& env, const ScenarioConfig& cfg,
                         double cached_shoulder_clearance) {
  EntryCheck c = empty_check();
  fold_state(c, s, env, cfg, false);
  c.shoulder_clearance = cached_shoulder_clearance;
  finish(c);
  return c;
}

void rebuild_shoulder_cache(Trajectory& traj, const Environment& env, const ScenarioConfig& cfg) {
  traj.shoulder_clearance.clear();
  if (traj.empty()) {
    return;
  }
  traj.shoulder_clearance.push_back(check_state(traj.states[0], env, cfg).shoulder_clearance);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    traj.shoulder_clearance.push_back(
        check_step(traj.states[k - 1], traj.controls[k - 1], env, cfg).first.shoulder_clearance);
  }
}

void TraceMonitor::add(const EntryCheck& check, std::size_t index) {
  min_clearance_ =
      std::min({min_clearance_, check.obstacle_clearance, check.shoulder_clearance});
  if (!collision_at_ && (check.obstacle_contact || check.shoulder_contact)) {
    collision_at_ = true;
    collision_index_ = index;
    collision_kind_ = check.obstacle_contact ? FailureKind::kCollisionObstacle
                                             : FailureKind::kCollisionShoulder;
  }
  if (end_at_ == kNever && check.end_contained) {
    end_at_ = index;
  }
}

StatusReport TraceMonitor::report(std::size_t last_index) const {
  if (collision_at_) {
    return {0, collision_kind_, collision_index_};
  }
  if (end_at_ != kNever) {
    return {1, FailureKind::kNone, end_at_};
  }
  return {cfg_->timeout_is_violation ? 0 : 1, FailureKind::kTimeoutNoReach, last_index};
}

double TraceMonitor::distance_to_failure() const {
  const double range = cfg_->sensor_range;
  return std::clamp(min_clearance_, 0.0, range) / range;
}

namespace {

TraceMonitor monitor_trace(const Trajectory& traj, const Environment& env,
                           const ScenarioConfig& cfg) {
  TraceMonitor monitor(cfg);
  if (traj.empty()) {
    return monitor;
  }
  monitor.add(check_state(traj.states[0], env, cfg), 0);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    monitor.add(check_step(traj.states[k - 1], traj.controls[k - 1], env, cfg).first, k);
  }
  return monitor;
}

}  // namespace

StatusReport status(const Trajectory& traj, const Environment& env, const ScenarioConfig& cfg) {
  return monitor_trace(traj, env, cfg).report(traj.empty() ? 0 : traj.size() - 1);
}

double distance_to_failure(const Trajectory& traj, const Environment& env,
                           const ScenarioConfig& cfg) {
  return monitor_trace(traj, env, cfg).distance_to_failure();
}

Simulator::Simulator(ScenarioConfig cfg, Controller& controller)
    : cfg_(std::move(cfg)), controller_(&controller) {
  cfg_.validate();
}

Observation Simulator::observe(const SystemState& s, const Environment& env) const {
  Observation obs;
  obs.steer = s.steer;
  const Pose2 apex = sensor_pose(s, cfg_);
  const double bin_depth = cfg_.row_depth();
  const auto last_row = static_cast<double>(kImageRows - 1);
  for (std::size_t col = 0; col < kImageColumns; ++col) {
    const double d = cast_ray(apex, column_bearing(col, cfg_), cfg_.sensor_range, env.track(),
                              env.obstacles());
    const double bin = std::min(last_row, std::floor(d / bin_depth));
    obs.hit_row[col] = static_cast<std::uint8_t>(std::max(0.0, bin));
  }
  return obs;
}

SimulationResult Simulator::simulate(const Scene& scene) {
  Trajectory traj;
  traj.states.push_back(scene.initial_state);
  const EntryCheck first = check_state(scene.initial_state, scene.env, cfg_);
  traj.shoulder_clearance.push_back(first.shoulder_clearance);
  TraceMonitor monitor(cfg_);
  monitor.add(first, 0);
  return resume(scene.env, std::move(traj), {}, std::move(monitor));
}

SimulationResult Simulator::resume(const Environment& env, Trajectory prefix,
                                   ObservationHistory history, TraceMonitor monitor) {
  SimulationResult out;
  history.resize(prefix.size() - 1);
  const std::uint64_t calls_before = calls_;
  while (true) {
    const SystemState& s = prefix.states.back();
    history.push_back(observe(s, env));
    if (monitor.terminated() || prefix.size() - 1 >= cfg_.horizon) {
      break;
    }
    const Control u = controller_->act(history.back());
    ++calls_;
    auto [check, next] = check_step(s, u, env, cfg_);
    prefix.controls.push_back(u);
    prefix.states.push_back(next);
    prefix.shoulder_clearance.push_back(check.shoulder_clearance);
    monitor.add(check, prefix.size() - 1);
  }
  out.status = monitor.report(prefix.size() - 1);
  out.distance_to_failure = monitor.distance_to_failure();
  out.controller_calls = calls_ - calls_before;
  out.trajectory = std::move(prefix);
  out.history = std::move(history);
  return out;
}

}  // namespace metafal
