#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "metafal/env_model.hpp"
#include "metafal/scenario.hpp"

namespace metafal {

inline constexpr std::size_t kBitmapBytes = kImageColumns * kImageRows / 8;

/// Polar depth image plus the current steering angle. Column i holds the
/// quantized hit depth of ray i; pixel (col, row) is set iff
/// hit_row[col] <= row, so every column is filled from its hit to the far
/// edge.
struct Observation {
  std::array<std::uint8_t, kImageColumns> hit_row{};
  double steer = 0.0;

  bool pixel(std::size_t col, std::size_t row) const { return hit_row[col] <= row; }

  /// 100 x 50 bits, row-major (row 0 first), most significant bit first.
  std::array<std::uint8_t, kBitmapBytes> pack_bitmap() const;
  /// Inverse of pack_bitmap; throws ControllerProtocolError when a column
  /// is not an occlusion fill.
  static Observation from_bitmap(std::span<const std::uint8_t, kBitmapBytes> bits, double steer);

  friend bool operator==(const Observation&, const Observation&) = default;
};

using ObservationHistory = std::vector<Observation>;

/// Control-period samples of the closed-loop run. controls[k] drives
/// states[k] to states[k + 1]. shoulder_clearance[k] caches the least
/// shoulder clearance over the sweep that ends at states[k] (state 0 alone
/// for k = 0); it depends only on the track, never on obstacles.
struct Trajectory {
  std::vector<SystemState> states;
  std::vector<Control> controls;
  std::vector<double> shoulder_clearance;

  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

enum class FailureKind { kNone, kCollisionObstacle, kCollisionShoulder, kTimeoutNoReach };

std::string_view to_string(FailureKind kind);

struct StatusReport {
  int status = 1;
  FailureKind kind = FailureKind::kNone;
  std::size_t terminal_step = 0;

  bool is_collision() const {
    return kind == FailureKind::kCollisionObstacle || kind == FailureKind::kCollisionShoulder;
  }

  friend bool operator==(const StatusReport&, const StatusReport&) = default;
};

/// Black-box policy g: Z -> U. Implementations must be pure functions of the
/// observation they are given (no memory across calls); prefix reuse relies
/// on it.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual Control act(const Observation& obs) = 0;
};

/// Kinematic bicycle with `cfg.substeps` Euler substeps per control period.
/// `visit` sees every substate in order; the last one is the returned state.
template <typename Visit>
SystemState integrate(const SystemState& start, const Control& u, const ScenarioConfig& cfg,
                      Visit&& visit);

SystemState step(const SystemState& s, const Control& u, const ScenarioConfig& cfg);

/// Monitor verdict for one trace entry: state 0, or the substep sweep that
/// ends at a control-period state.
struct EntryCheck {
  bool obstacle_contact = false;
  bool shoulder_contact = false;
  bool end_contained = false;
  double obstacle_clearance = 0.0;
  double shoulder_clearance = 0.0;
};

EntryCheck check_state(const SystemState& s, const Environment& env, const ScenarioConfig& cfg);
/// Sweep of one control period. Returns the checked entry and the next state.
std::pair<EntryCheck, SystemState> check_step(const SystemState& from, const Control& u,
                                              const Environment& env, const ScenarioConfig& cfg);
/// Same as check_step with the shoulder term taken from a cached value.
EntryCheck recheck_step(const SystemState& from, const Control& u, const Environment& env,
                        const ScenarioConfig& cfg, double cached_shoulder_clearance);
EntryCheck recheck_state(const SystemState& s, const Environment& env, const ScenarioConfig& cfg,
                         double cached_shoulder_clearance);

/// Recomputes `traj.shoulder_clearance` from its states and controls.
void rebuild_shoulder_cache(Trajectory& traj, const Environment& env, const ScenarioConfig& cfg);

/// Incremental evaluation of the finite-trace task: eventually inside the
/// end zone, always clear of obstacles and shoulders. Within one entry an
/// obstacle contact is reported ahead of a shoulder contact.
class TraceMonitor {
 public:
  explicit TraceMonitor(const ScenarioConfig& cfg) : cfg_(&cfg) {}

  void add(const EntryCheck& check, std::size_t index);
  /// A monitor event (collision or end-zone containment) has been seen.
  bool terminated() const { return collision_at_ || end_at_ != kNever; }
  StatusReport report(std::size_t last_index) const;
  /// Least clearance seen so far, in length units.
  double min_clearance() const { return min_clearance_; }
  double distance_to_failure() const;

 private:
  static constexpr std::size_t kNever = static_cast<std::size_t>(-1);

  const ScenarioConfig* cfg_;
  bool collision_at_ = false;
  std::size_t collision_index_ = kNever;
  FailureKind collision_kind_ = FailureKind::kNone;
  std::size_t end_at_ = kNever;
  double min_clearance_ = 1e300;
};

/// Task status of a complete trace, recomputed from scratch.
StatusReport status(const Trajectory& traj, const Environment& env, const ScenarioConfig& cfg);

/// min over the swept trace of the clearance to obstacles and shoulders,
/// clamped to [0, sensor_range] and normalized by sensor_range.
double distance_to_failure(const Trajectory& traj, const Environment& env,
                           const ScenarioConfig& cfg);

struct SimulationResult {
  Trajectory trajectory;
  ObservationHistory history;
  StatusReport status;
  double distance_to_failure = 1.0;
  std::uint64_t controller_calls = 0;
};

/// Closed-loop executor. Owns the controller-call counter; confine an
/// instance to one thread.
class Simulator {
 public:
  Simulator(ScenarioConfig cfg, Controller& controller);

  const ScenarioConfig& config() const { return cfg_; }
  std::uint64_t controller_calls() const { return calls_; }

  Observation observe(const SystemState& s, const Environment& env) const;

  SimulationResult simulate(const Scene& scene);

  /// Continues a run whose trace so far is `prefix` (all entries already fed
  /// to `monitor`) and whose observations cover every prefix state but the
  /// last. The last prefix state is observed afresh.
  SimulationResult resume(const Environment& env, Trajectory prefix, ObservationHistory history,
                          TraceMonitor monitor);

 private:
  ScenarioConfig cfg_;
  Controller* controller_;
  std::uint64_t calls_ = 0;
};

template <typename Visit>
SystemState integrate(const SystemState& start, const Control& u, const ScenarioConfig& cfg,
                      Visit&& visit) {
  const double dt = cfg.control_period / static_cast<double>(cfg.substeps);
  const double steer_rate =
      std::isfinite(u.steer_rate)
          ? std::clamp(u.steer_rate, -cfg.max_steer_rate, cfg.max_steer_rate)
          : 0.0;
  const double accel = std::isfinite(u.accel) ? u.accel : 0.0;
  SystemState s = start;
  for (int i = 0; i < cfg.substeps; ++i) {
    s.steer = std::clamp(s.steer + steer_rate * dt, -cfg.max_steer, cfg.max_steer);
    s.speed = std::clamp(s.speed + accel * dt, 0.0, cfg.max_speed);
    s.heading = normalize_angle(s.heading + s.speed / cfg.wheelbase * std::tan(s.steer) * dt);
    s.x += s.speed * std::cos(s.heading) * dt;
    s.y += s.speed * std::sin(s.heading) * dt;
    visit(static_cast<const SystemState&>(s));
  }
  return s;
}

}  // namespace metafal
