#include "metafal/meta.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "metafal/errors.hpp"

namespace metafal {

MetaState make_meta_state(Environment env, SimulationResult run) {
  return MetaState{std::move(env), std::move(run.trajectory), std::move(run.history), run.status,
                   run.distance_to_failure};
}

std::size_t compromise_timestamp_generic(const MetaState& s, const Environment& next_env,
                                         const Simulator& sim) {
  for (std::size_t i = 0; i < s.traj.size(); ++i) {
    if (sim.observe(s.traj.states[i], next_env) != s.history[i]) {
      return i;
    }
  }
  return s.traj.size();
}

std::size_t compromise_timestamp_fast(const MetaState& s, const Mutation& m,
                                      const ScenarioConfig& cfg) {
  for (std::size_t i = 0; i < s.traj.size(); ++i) {
    const SectorFOV fov = sensor_footprint(s.traj.states[i], cfg);
    auto touches = [&](const Disc& d) { return sector_intersects_disc(fov, d, true); };
    if (std::any_of(m.removed.begin(), m.removed.end(), touches) ||
        std::any_of(m.added.begin(), m.added.end(), touches)) {
      return i;
    }
  }
  return s.traj.size();
}

Transition meta_dynamics(const MetaState& s, const Mutation& m, Simulator& sim, DynamicsMode mode,
                         PrefixValidation validation) {
  Environment next = apply_mutation(s.env, m);
  const ScenarioConfig& cfg = sim.config();
  if (mode == DynamicsMode::kFull) {
    SimulationResult run = sim.simulate(Scene{next, s.traj.states.front()});
    const std::uint64_t calls = run.controller_calls;
    return Transition{make_meta_state(std::move(next), std::move(run)), calls, 0, 0};
  }

  const std::size_t compromise = validation == PrefixValidation::kGeneric
                                     ? compromise_timestamp_generic(s, next, sim)
                                     : compromise_timestamp_fast(s, m, cfg);
  // States up to the compromise step are reproduced exactly; the last
  // recorded state is the deepest point a resumed run can start from.
  const std::size_t reusable = std::min(compromise, s.traj.size() - 1);

  const Trajectory& old = s.traj;
  Trajectory prefix;
  prefix.states.push_back(old.states[0]);
  prefix.shoulder_clearance.push_back(old.shoulder_clearance[0]);
  TraceMonitor monitor(cfg);
  monitor.add(recheck_state(old.states[0], next, cfg, old.shoulder_clearance[0]), 0);
  std::size_t k = 0;
  while (k < reusable && !monitor.terminated()) {
    ++k;
    monitor.add(recheck_step(old.states[k - 1], old.controls[k - 1], next, cfg,
                             old.shoulder_clearance[k]),
                k);
    prefix.states.push_back(old.states[k]);
    prefix.controls.push_back(old.controls[k - 1]);
    prefix.shoulder_clearance.push_back(old.shoulder_clearance[k]);
  }
  ObservationHistory history(s.history.begin(), s.history.begin() + static_cast<std::ptrdiff_t>(k));

  SimulationResult run = sim.resume(next, std::move(prefix), std::move(history), monitor);
  const std::uint64_t calls = run.controller_calls;
  return Transition{make_meta_state(std::move(next), std::move(run)), calls, compromise, k};
}

SampledMetaState sample_meta_state(const EnvironmentSpace& space, Simulator& sim, Rng& rng) {
  Environment env = space.sample_env(rng);
  SimulationResult run = sim.simulate(Scene{env, space.config().initial_state()});
  const std::uint64_t calls = run.controller_calls;
  return SampledMetaState{make_meta_state(std::move(env), std::move(run)), calls};
}

void verify_meta_state(const MetaState& s, Simulator& sim) {
  if (s.traj.empty()) {
    throw ValidityError("meta-state has an empty trajectory");
  }
  const SimulationResult run = sim.simulate(Scene{s.env, s.traj.states.front()});
  const Trajectory& t = run.trajectory;
  if (t.size() != s.traj.size()) {
    throw ValidityError("replay produced " + std::to_string(t.size()) + " states, recorded " +
                        std::to_string(s.traj.size()));
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.states[i] != s.traj.states[i]) {
      throw ValidityError("replay diverges from the recorded trajectory at step " +
                          std::to_string(i));
    }
  }
  if (t.controls != s.traj.controls) {
    throw ValidityError("replay issues different controls than recorded");
  }
  if (!s.history.empty() && run.history != s.history) {
    throw ValidityError("replay observations differ from the recorded history");
  }
  if (run.status != s.status) {
    throw ValidityError("recorded status does not match the replayed run");
  }
}

namespace {

struct Curve {
  std::vector<double> x;
  std::vector<double> y;

  double at(double q) const {
    auto it = std::upper_bound(x.begin(), x.end(), q);
    if (it == x.begin()) {
      return y.front();
    }
    if (it == x.end()) {
      return y.back();
    }
    const auto i = static_cast<std::size_t>(it - x.begin());
    const double t = (q - x[i - 1]) / (x[i] - x[i - 1]);
    return y[i - 1] + t * (y[i] - y[i - 1]);
  }
};

Curve as_curve(const Trajectory& traj) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(traj.size());
  for (const auto& s : traj.states) {
    pts.emplace_back(s.x, s.y);
  }
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  Curve c;
  for (const auto& [x, y] : pts) {
    if (!c.x.empty() && c.x.back() == x) {
      c.y.back() = y;
    } else {
      c.x.push_back(x);
      c.y.push_back(y);
    }
  }
  return c;
}

}  // namespace

double traj_distance(const Trajectory& a, const Trajectory& b, double dx) {
  if (a.empty() || b.empty()) {
    return 0.0;
  }
  const Curve ca = as_curve(a);
  const Curve cb = as_curve(b);
  const double lo = std::max(ca.x.front(), cb.x.front());
  const double hi = std::min(ca.x.back(), cb.x.back());
  if (!(hi > lo)) {
    return 0.0;
  }
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((hi - lo) / dx)));
  const double h = (hi - lo) / static_cast<double>(n);
  double area = 0.0;
  double prev = std::abs(ca.at(lo) - cb.at(lo));
  for (std::size_t i = 1; i <= n; ++i) {
    const double q = i == n ? hi : lo + h * static_cast<double>(i);
    const double cur = std::abs(ca.at(q) - cb.at(q));
    area += 0.5 * h * (prev + cur);
    prev = cur;
  }
  return area;
}

double meta_state_distance(const MetaState& a, const MetaState& b, double w, Rng& rng) {
  if (!a.env.same_parameters(b.env)) {
    throw IncompatibleEnvironments();
  }
  double total = 0.0;
  if (w != 0.0) {
    total += w * env_distance(a.env, b.env, rng);
  }
  if (w != 1.0) {
    total += (1.0 - w) * traj_distance(a.traj, b.traj);
  }
  return total;
}

}  // namespace metafal
