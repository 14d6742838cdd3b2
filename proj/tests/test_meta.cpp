#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "metafal/controller.hpp"
#include "metafal/errors.hpp"
#include "metafal/meta.hpp"
#include "support.hpp"

using namespace metafal;

namespace {

struct Fixture {
  ScenarioConfig cfg;
  EnvironmentSpace space{cfg};
  ReferenceController ctrl{cfg};
  Simulator sim{cfg, ctrl};
};

Trajectory polyline(std::vector<std::pair<double, double>> pts) {
  Trajectory t;
  for (auto [x, y] : pts) {
    t.states.push_back({x, y, 0.0, 0.0, 0.0});
  }
  return t;
}

// Piecewise-linear y(x) through the states, for the Riemann oracle.
double curve_at(const Trajectory& t, double q) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : t.states) {
    pts.emplace_back(s.x, s.y);
  }
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (q <= pts[i].first) {
      const double f = (q - pts[i - 1].first) / (pts[i].first - pts[i - 1].first);
      return pts[i - 1].second + f * (pts[i].second - pts[i - 1].second);
    }
  }
  return pts.back().second;
}

}  // namespace

TEST_CASE("incremental dynamics equals full re-simulation") {
  Fixture f;
  Rng rng(101);
  std::uint64_t saved = 0;
  for (int i = 0; i < 40; ++i) {
    const auto c = testing::random_mutation_case(f.space, f.sim, rng);
    const Transition full = meta_dynamics(c.state, c.mutation, f.sim, DynamicsMode::kFull);
    for (auto v : {PrefixValidation::kFast, PrefixValidation::kGeneric}) {
      const Transition inc = meta_dynamics(c.state, c.mutation, f.sim, DynamicsMode::kIncremental, v);
      CHECK(inc.state == full.state);
      CHECK(inc.controller_calls + inc.resume_index == full.controller_calls);
      CHECK(inc.controller_calls <= full.controller_calls);
      saved += full.controller_calls - inc.controller_calls;
    }
  }
  CHECK(saved > 0);
}

TEST_CASE("the fast timestamp never exceeds the generic one") {
  Fixture f;
  Rng rng(102);
  for (int i = 0; i < 60; ++i) {
    const auto c = testing::random_mutation_case(f.space, f.sim, rng);
    const Environment next = apply_mutation(c.state.env, c.mutation);
    CHECK(compromise_timestamp_fast(c.state, c.mutation, f.cfg) <=
          compromise_timestamp_generic(c.state, next, f.sim));
  }
}

TEST_CASE("an unseen mutation keeps the whole history") {
  const ScenarioConfig cfg;
  const EnvironmentSpace space{cfg};
  auto ctrl = testing::crash_controller();
  Simulator sim(cfg, ctrl);
  const Disc far{10.0, 0.8 * std::sin(10.0), 0.1};
  const Disc moved{10.5, 0.8 * std::sin(10.5), 0.1};
  const Environment env = space.make({far});
  const MetaState s = make_meta_state(env, sim.simulate({env, cfg.initial_state()}));
  REQUIRE(s.traj.states.back().x + 3.0 < far.cx);
  const Mutation m = Mutation::replace({far}, {moved});
  CHECK(compromise_timestamp_fast(s, m, cfg) == s.length());
  CHECK(compromise_timestamp_generic(s, apply_mutation(s.env, m), sim) == s.length());
  const Transition t = meta_dynamics(s, m, sim);
  CHECK(t.state.traj == s.traj);
  CHECK(t.state.status == s.status);
  CHECK(t.controller_calls == 0);
  CHECK(t.resume_index == s.length() - 1);
  CHECK(compromise_timestamp_generic(s, s.env, sim) == s.length());
}

TEST_CASE("a mutation in view of the start invalidates everything") {
  Fixture f;
  Rng rng(104);
  const MetaState s = sample_meta_state(f.space, f.sim, rng).state;
  const Pose2 apex = sensor_pose(s.traj.states[0], f.cfg);
  const Vec2 p = apex.to_world({0.5, 0.0});
  const Mutation m = Mutation::replace({s.env.obstacles()[0]}, {{p.x, p.y, 0.1}});
  CHECK(compromise_timestamp_fast(s, m, f.cfg) == 0);
  CHECK(compromise_timestamp_generic(s, apply_mutation(s.env, m), f.sim) == 0);
  const Transition t = meta_dynamics(s, m, f.sim);
  CHECK(t.resume_index == 0);
  CHECK(t.state == meta_dynamics(s, m, f.sim, DynamicsMode::kFull).state);
}

TEST_CASE("the generic timestamp is the first changed observation") {
  // On a wide straight band a speck on the leftmost ray near full range is
  // out of reach of every earlier sensor pose.
  const ScenarioConfig cfg = testing::straight_config(6.0);
  const EnvironmentSpace space{cfg};
  ReferenceController ctrl(cfg);
  Simulator sim(cfg, ctrl);
  const Environment empty = space.make({});
  const MetaState s = make_meta_state(empty, sim.simulate({empty, cfg.initial_state()}));
  int exact = 0;
  for (std::size_t k = 1; k < s.length(); ++k) {
    const Pose2 apex = sensor_pose(s.traj.states[k], cfg);
    const double bearing = column_bearing(kImageColumns - 1, cfg);
    const Vec2 p = apex.to_world(1.9 * unit_from_angle(bearing));
    const Environment next = space.make({{p.x, p.y, 0.01}});
    const std::size_t t = compromise_timestamp_generic(s, next, sim);
    for (std::size_t i = 0; i < std::min(t, s.length()); ++i) {
      CHECK(sim.observe(s.traj.states[i], next) == s.history[i]);
    }
    REQUIRE(t <= k);
    CHECK(sim.observe(s.traj.states[t], next) != s.history[t]);
    exact += t == k ? 1 : 0;
  }
  CHECK(exact > 0);
}

TEST_CASE("sampled meta-states are reproducible and valid") {
  Fixture f;
  Rng a(105);
  Rng b(105);
  for (int i = 0; i < 5; ++i) {
    const SampledMetaState x = sample_meta_state(f.space, f.sim, a);
    const SampledMetaState y = sample_meta_state(f.space, f.sim, b);
    CHECK(x.state == y.state);
    CHECK(x.controller_calls == x.state.length() - 1);
    CHECK(x.state.history.size() == x.state.length());
    CHECK_NOTHROW(verify_meta_state(x.state, f.sim));
  }
}

TEST_CASE("tampered meta-states fail verification") {
  Fixture f;
  Rng rng(106);
  MetaState s = sample_meta_state(f.space, f.sim, rng).state;
  MetaState moved = s;
  moved.traj.states[2].x += 1e-9;
  CHECK_THROWS_AS(verify_meta_state(moved, f.sim), ValidityError);
  MetaState wrong_status = s;
  wrong_status.status.status = 1 - s.status.status;
  CHECK_THROWS_AS(verify_meta_state(wrong_status, f.sim), ValidityError);
}

TEST_CASE("trajectory distance examples") {
  const Trajectory lower = polyline({{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}});
  const Trajectory upper = polyline({{0.0, 0.5}, {3.0, 0.5}});
  CHECK(traj_distance(lower, lower) == 0.0);
  CHECK(traj_distance(lower, upper) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(std::abs(traj_distance(lower, upper, 0.4) - 1.5) <= 0.4 * 0.5);
  CHECK(traj_distance(lower, upper) == traj_distance(upper, lower));
  const Trajectory apart = polyline({{5.0, 0.0}, {6.0, 1.0}});
  CHECK(traj_distance(lower, apart) == 0.0);
  CHECK(traj_distance(lower, Trajectory{}) == 0.0);
}

TEST_CASE("a repeated abscissa keeps the later visit") {
  const Trajectory back = polyline({{0.0, 0.0}, {1.0, 1.0}, {1.0, 0.0}, {2.0, 0.0}});
  const Trajectory flat = polyline({{0.0, 0.0}, {2.0, 0.0}});
  CHECK(traj_distance(back, flat) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("trajectory distance matches a Riemann sum") {
  Fixture f;
  Rng rng(107);
  for (int i = 0; i < 10; ++i) {
    const MetaState a = sample_meta_state(f.space, f.sim, rng).state;
    const MetaState b = sample_meta_state(f.space, f.sim, rng).state;
    double lo = -1e300;
    double hi = 1e300;
    for (const auto* t : {&a.traj, &b.traj}) {
      double mn = 1e300;
      double mx = -1e300;
      for (const auto& s : t->states) {
        mn = std::min(mn, s.x);
        mx = std::max(mx, s.x);
      }
      lo = std::max(lo, mn);
      hi = std::min(hi, mx);
    }
    if (!(hi > lo)) {
      continue;
    }
    const int n = 10000;
    double oracle = 0.0;
    for (int j = 0; j < n; ++j) {
      const double q = lo + (j + 0.5) * (hi - lo) / n;
      oracle += std::abs(curve_at(a.traj, q) - curve_at(b.traj, q)) * (hi - lo) / n;
    }
    const double d = traj_distance(a.traj, b.traj);
    CHECK(std::abs(d - oracle) <= 0.01 * oracle + 1e-6);
  }
}

TEST_CASE("meta-state distance endpoints") {
  Fixture f;
  Rng rng(108);
  const MetaState a = sample_meta_state(f.space, f.sim, rng).state;
  const MetaState b = sample_meta_state(f.space, f.sim, rng).state;
  CHECK(meta_state_distance(a, a, 0.5, rng) == 0.0);
  CHECK(meta_state_distance(a, b, 0.0, rng) == traj_distance(a.traj, b.traj));
  Rng r1(5);
  Rng r2(5);
  CHECK(meta_state_distance(a, b, 1.0, r1) == env_distance(a.env, b.env, r2));
  Rng r3(6);
  Rng r4(6);
  CHECK(meta_state_distance(a, b, 0.3, r3) == meta_state_distance(b, a, 0.3, r4));

  const EnvironmentSpace flat{testing::straight_config()};
  MetaState other = a;
  other.env = flat.make({});
  CHECK_THROWS_AS(meta_state_distance(a, other, 0.5, rng), IncompatibleEnvironments);
}
