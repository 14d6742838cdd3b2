#pragma once

#include <cstddef>
#include <cstdint>

#include "metafal/env_model.hpp"
#include "metafal/simulator.hpp"

namespace metafal {

/// A simulated scene: the environment, the trajectory and observation
/// history it induces from the fixed initial state, and the cached status
/// and distance-to-failure of that run.
struct MetaState {
  Environment env;
  Trajectory traj;
  ObservationHistory history;
  StatusReport status;
  double dtf = 1.0;

  std::size_t length() const { return traj.size(); }

  friend bool operator==(const MetaState&, const MetaState&) = default;
};

MetaState make_meta_state(Environment env, SimulationResult run);

enum class DynamicsMode { kFull, kIncremental };
enum class PrefixValidation { kGeneric, kFast };

struct Transition {
  MetaState state;
  std::uint64_t controller_calls = 0;
  /// History-compromise timestamp that was used (trajectory length when the
  /// whole history stays valid); 0 in full mode.
  std::size_t compromise = 0;
  /// Index of the state the simulation was resumed from.
  std::size_t resume_index = 0;
};

/// Smallest i with observe(traj[i], env') != history[i]; the trajectory
/// length when every recorded observation is still valid.
std::size_t compromise_timestamp_generic(const MetaState& s, const Environment& next_env,
                                         const Simulator& sim);

/// Smallest i whose (slightly inflated) sensor sector touches a removed or
/// added element. Never later than the generic timestamp.
std::size_t compromise_timestamp_fast(const MetaState& s, const Mutation& m,
                                      const ScenarioConfig& cfg);

/// Successor meta-state under mutation `m`. Incremental mode keeps the
/// trajectory up to the compromise timestamp, re-monitors that prefix in the
/// new environment and resumes the closed loop from its last state; the
/// result equals full re-simulation exactly.
Transition meta_dynamics(const MetaState& s, const Mutation& m, Simulator& sim,
                         DynamicsMode mode = DynamicsMode::kIncremental,
                         PrefixValidation validation = PrefixValidation::kFast);

struct SampledMetaState {
  MetaState state;
  std::uint64_t controller_calls = 0;
};

SampledMetaState sample_meta_state(const EnvironmentSpace& space, Simulator& sim, Rng& rng);

/// Re-simulates `s` and throws ValidityError unless trajectory, history and
/// status are reproduced exactly.
void verify_meta_state(const MetaState& s, Simulator& sim);

/// Area between the trajectories read as curves y(x) over their common x
/// span. Repeated x keeps the later visit; trapezoid rule on a grid of
/// spacing about `dx`.
double traj_distance(const Trajectory& a, const Trajectory& b, double dx = 0.05);

/// w * env_distance + (1 - w) * traj_distance. A zero-weight term is not
/// evaluated.
double meta_state_distance(const MetaState& a, const MetaState& b, double w, Rng& rng);

}  // namespace metafal
