#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "metafal/controller.hpp"
#include "metafal/simulator.hpp"
#include "support.hpp"

using namespace metafal;
using testing::FixedController;

namespace {

SimulationResult run_free_track() {
  const ScenarioConfig cfg;
  const EnvironmentSpace space{cfg};
  ReferenceController ctrl(cfg);
  Simulator sim(cfg, ctrl);
  return sim.simulate({space.make({}), cfg.initial_state()});
}

// Brute-force clearance of one state.
double state_clearance(const SystemState& s, const Environment& env, const ScenarioConfig& cfg) {
  const OrientedRect shape = car_shape(s, cfg);
  double best = rect_to_shoulders_distance(shape, env.track());
  for (const Disc& d : env.obstacles()) {
    best = std::min(best, rect_to_disc_distance(shape, d));
  }
  return best;
}

// Distance to failure over the trace with every Euler substep split into
// ten interpolated poses.
double supersampled_dtf(const Trajectory& traj, const Environment& env, const ScenarioConfig& cfg) {
  double best = state_clearance(traj.states[0], env, cfg);
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    SystemState prev = traj.states[k];
    integrate(traj.states[k], traj.controls[k], cfg, [&](const SystemState& s) {
      for (int i = 1; i <= 10; ++i) {
        const double f = i / 10.0;
        SystemState mid = s;
        mid.x = prev.x + f * (s.x - prev.x);
        mid.y = prev.y + f * (s.y - prev.y);
        mid.heading = prev.heading + f * normalize_angle(s.heading - prev.heading);
        best = std::min(best, state_clearance(mid, env, cfg));
      }
      prev = s;
    });
  }
  return std::clamp(best, 0.0, cfg.sensor_range) / cfg.sensor_range;
}

}  // namespace

TEST_CASE("straight step at full speed") {
  const ScenarioConfig cfg;
  const SystemState s{0.0, 0.0, 0.0, 0.0, 0.4};
  const SystemState next = step(s, {0.0, 0.0}, cfg);
  CHECK(next.x == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(next.y == 0.0);
  CHECK(next.heading == 0.0);
}

TEST_CASE("a car at rest only turns its wheels") {
  const ScenarioConfig cfg;
  const SystemState s{1.0, 2.0, 0.3, 0.0, 0.0};
  const SystemState next = step(s, {0.0, deg_to_rad(5.0)}, cfg);
  CHECK(next.x == s.x);
  CHECK(next.y == s.y);
  CHECK(next.heading == s.heading);
  CHECK(next.steer == doctest::Approx(deg_to_rad(5.0)).epsilon(1e-12));
}

TEST_CASE("inputs are clamped and non-finite inputs are ignored") {
  const ScenarioConfig cfg;
  const SystemState s{0.0, 0.0, 0.0, 0.0, 0.0};
  const SystemState fast = step(s, {100.0, 100.0}, cfg);
  CHECK(fast.speed == cfg.max_speed);
  CHECK(fast.steer == doctest::Approx(cfg.max_steer_rate).epsilon(1e-12));
  SystemState turned = s;
  for (int i = 0; i < 10; ++i) {
    turned = step(turned, {0.0, 100.0}, cfg);
  }
  CHECK(turned.steer == cfg.max_steer);
  const SystemState nan = step({0.0, 0.0, 0.0, 0.1, 0.2}, {NAN, INFINITY}, cfg);
  CHECK(nan.speed == 0.2);
  CHECK(nan.steer == 0.1);
  const SystemState braked = step({0.0, 0.0, 0.0, 0.0, 0.2}, {-5.0, 0.0}, cfg);
  CHECK(braked.speed == 0.0);
}

TEST_CASE("constant steering traces the turning circle") {
  const ScenarioConfig cfg;
  ScenarioConfig fine = cfg;
  fine.substeps = 1000;
  const double alpha = deg_to_rad(30.0);
  const double radius = cfg.wheelbase / std::tan(alpha);
  std::vector<Vec2> coarse;
  std::vector<Vec2> oracle;
  SystemState a{0.0, 0.0, 0.0, alpha, 0.4};
  SystemState b = a;
  for (int k = 0; k < 50; ++k) {
    a = step(a, {0.0, 0.0}, cfg);
    b = step(b, {0.0, 0.0}, fine);
    coarse.push_back({a.x, a.y});
    oracle.push_back({b.x, b.y});
  }
  // Circumcentre of three samples.
  auto centre_of = [](const std::vector<Vec2>& p) {
    const Vec2 u = p[1] - p[0];
    const Vec2 v = p[2] - p[0];
    const double d = 2.0 * cross(u, v);
    const double uu = dot(u, u);
    const double vv = dot(v, v);
    return p[0] + Vec2{(v.y * uu - u.y * vv) / d, (u.x * vv - v.x * uu) / d};
  };
  const Vec2 c_coarse = centre_of(coarse);
  const Vec2 c_oracle = centre_of(oracle);
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    CHECK(norm(coarse[k] - c_coarse) == doctest::Approx(radius).epsilon(0.01));
    CHECK(norm(oracle[k] - c_oracle) == doctest::Approx(radius).epsilon(0.01));
  }
}

TEST_CASE("observation of an open straight track is empty") {
  const ScenarioConfig cfg = testing::straight_config(10.0);
  const EnvironmentSpace space{cfg};
  FixedController ctrl({0.0, 0.0});
  const Simulator sim(cfg, ctrl);
  const Observation obs = sim.observe({3.0, 0.0, 0.0, 0.0, 0.0}, space.make({}));
  for (auto row : obs.hit_row) {
    CHECK(row == 49);
  }
}

TEST_CASE("a disc dead ahead shows in the centre columns") {
  const ScenarioConfig cfg = testing::straight_config(10.0);
  const EnvironmentSpace space{cfg};
  FixedController ctrl({0.0, 0.0});
  const Simulator sim(cfg, ctrl);
  const SystemState s{3.0, 0.0, 0.0, 0.25, 0.0};
  const Pose2 apex = sensor_pose(s, cfg);
  const Observation obs = sim.observe(s, space.make({{apex.x() + 1.0, 0.0, 0.1}}));
  CHECK(obs.hit_row[49] == 22);
  CHECK(obs.hit_row[50] == 22);
  CHECK(obs.hit_row[0] == 49);
  CHECK(obs.hit_row[99] == 49);
  CHECK(obs.steer == 0.25);
}

TEST_CASE("a disc on the right shows in the low columns") {
  const ScenarioConfig cfg = testing::straight_config(10.0);
  const EnvironmentSpace space{cfg};
  FixedController ctrl({0.0, 0.0});
  const Simulator sim(cfg, ctrl);
  const SystemState s{3.0, 0.0, 0.0, 0.0, 0.0};
  const Pose2 apex = sensor_pose(s, cfg);
  const Observation obs = sim.observe(s, space.make({{apex.x() + 0.5, -0.5, 0.1}}));
  const auto hit = std::min_element(obs.hit_row.begin(), obs.hit_row.end()) - obs.hit_row.begin();
  CHECK(hit < 50);
  CHECK(obs.hit_row[static_cast<std::size_t>(hit)] < 49);
}

TEST_CASE("observations are stable under tiny state perturbations") {
  const ScenarioConfig cfg;
  const EnvironmentSpace space{cfg};
  FixedController ctrl({0.0, 0.0});
  const Simulator sim(cfg, ctrl);
  Rng rng(21);
  int identical = 0;
  for (int i = 0; i < 1000; ++i) {
    const Environment env = space.sample_env(rng);
    const double x = testing::uniform(rng, 0.5, 13.0);
    const SystemState s{x, 0.8 * std::sin(x) + testing::uniform(rng, -0.5, 0.5),
                        testing::uniform(rng, -1.0, 1.0), 0.0, 0.0};
    SystemState nudged = s;
    nudged.y += 1e-12;
    identical += sim.observe(s, env) == sim.observe(nudged, env) ? 1 : 0;
  }
  CHECK(identical == 1000);
}

TEST_CASE("the reference controller completes the obstacle-free track") {
  const SimulationResult r = run_free_track();
  const ScenarioConfig cfg;
  CHECK(r.status.status == 1);
  CHECK(r.status.kind == FailureKind::kNone);
  CHECK(r.trajectory.size() == 41);
  CHECK(r.status.terminal_step == 40);
  CHECK(rect_in_end_zone(car_shape(r.trajectory.states.back(), cfg),
                         EnvironmentSpace{cfg}.track()));
  CHECK(r.distance_to_failure == doctest::Approx(0.0996).epsilon(0.01));
  CHECK(r.controller_calls == 40);
  CHECK(r.history.size() == r.trajectory.size());
  CHECK(r.trajectory.controls.size() == r.trajectory.size() - 1);
}

TEST_CASE("simulation is deterministic") {
  const ScenarioConfig cfg;
  const EnvironmentSpace space{cfg};
  Rng rng(4);
  for (int i = 0; i < 10; ++i) {
    const Scene scene{space.sample_env(rng), cfg.initial_state()};
    ReferenceController c1(cfg);
    ReferenceController c2(cfg);
    Simulator s1(cfg, c1);
    Simulator s2(cfg, c2);
    const SimulationResult a = s1.simulate(scene);
    const SimulationResult b = s2.simulate(scene);
    CHECK(a.trajectory == b.trajectory);
    CHECK(a.history == b.history);
    CHECK(a.status == b.status);
    CHECK(a.distance_to_failure == b.distance_to_failure);
  }
}

TEST_CASE("a wall across the band causes a collision") {
  const ScenarioConfig cfg;
  const EnvironmentSpace space{cfg};
  const SystemState start = cfg.initial_state();
  const Pose2 apex = sensor_pose(start, cfg);
  const Vec2 ahead = apex.to_world({1.0, 0.0});
  const double x = ahead.x;
  std::vector<Disc> wall;
  for (double off = -0.8; off <= 0.8 + 1e-9; off += 0.1) {
    wall.push_back({x, 0.8 * std::sin(x) + off, 0.1});
  }
  FixedController ctrl({0.4, 0.0});
  Simulator sim(cfg, ctrl);
  const SimulationResult r = sim.simulate({space.make(wall), start});
  CHECK(r.status.status == 0);
  CHECK(r.status.is_collision());
  CHECK(r.status.terminal_step <= 20);
  CHECK(r.distance_to_failure == 0.0);
}

TEST_CASE("status examples") {
  const ScenarioConfig cfg;
  const EnvironmentSpace space{cfg};
  const Environment env = space.make({});

  FixedController off_road({0.4, 0.2});
  Simulator crash(cfg, off_road);
  const SimulationResult c = crash.simulate({env, cfg.initial_state()});
  CHECK(c.status.status == 0);
  CHECK(c.status.kind == FailureKind::kCollisionShoulder);
  CHECK(c.trajectory.size() == c.status.terminal_step + 1);

  ScenarioConfig short_run = cfg;
  short_run.horizon = 5;
  FixedController parked({0.0, 0.0});
  Simulator idle(short_run, parked);
  const SimulationResult t = idle.simulate({env, short_run.initial_state()});
  CHECK(t.status.status == 1);
  CHECK(t.status.kind == FailureKind::kTimeoutNoReach);
  CHECK(t.trajectory.size() == 6);
  CHECK(t.controller_calls == 5);

  short_run.timeout_is_violation = true;
  Simulator strict(short_run, parked);
  CHECK(strict.simulate({env, short_run.initial_state()}).status.status == 0);
}

TEST_CASE("obstacle contact takes precedence over shoulder contact") {
  const ScenarioConfig cfg = testing::straight_config();
  const EnvironmentSpace space{cfg};
  const SystemState s{3.0, 0.75, 0.0, 0.0, 0.0};
  const Environment env = space.make({{3.15, 0.75, 0.1}});
  Trajectory traj;
  traj.states = {s};
  const StatusReport rep = status(traj, env, cfg);
  CHECK(rep.status == 0);
  CHECK(rep.kind == FailureKind::kCollisionObstacle);
  CHECK(rep.terminal_step == 0);
}

TEST_CASE("distance to failure on a straight band") {
  const ScenarioConfig cfg = testing::straight_config();
  const EnvironmentSpace space{cfg};
  Trajectory traj;
  traj.states = {{3.0, 0.0, 0.0, 0.0, 0.0}};
  CHECK(distance_to_failure(traj, space.make({}), cfg) == doctest::Approx(0.35).epsilon(1e-12));
  traj.states = {{3.0, 0.75, 0.0, 0.0, 0.0}};
  CHECK(distance_to_failure(traj, space.make({}), cfg) == 0.0);
}

TEST_CASE("distance to failure matches supersampled brute force") {
  const ScenarioConfig cfg;
  const EnvironmentSpace space{cfg};
  ReferenceController ctrl(cfg);
  Simulator sim(cfg, ctrl);
  Rng rng(31);
  for (int i = 0; i < 8; ++i) {
    const Environment env = space.sample_env(rng);
    const SimulationResult r = sim.simulate({env, cfg.initial_state()});
    const double oracle = supersampled_dtf(r.trajectory, env, cfg);
    CHECK(oracle <= r.distance_to_failure + 1e-12);
    CHECK(r.distance_to_failure - oracle < 1e-3);
    CHECK(distance_to_failure(r.trajectory, env, cfg) == r.distance_to_failure);
    CHECK(status(r.trajectory, env, cfg) == r.status);
    CHECK((r.distance_to_failure == 0.0) == r.status.is_collision());
  }
}

TEST_CASE("status is final once a collision is recorded") {
  const ScenarioConfig cfg;
  const EnvironmentSpace space{cfg};
  FixedController off_road({0.4, 0.2});
  Simulator sim(cfg, off_road);
  const Environment env = space.make({});
  Trajectory traj = sim.simulate({env, cfg.initial_state()}).trajectory;
  const StatusReport before = status(traj, env, cfg);
  for (int i = 0; i < 5; ++i) {
    traj.controls.push_back({0.4, 0.2});
    traj.states.push_back(step(traj.states.back(), traj.controls.back(), cfg));
  }
  CHECK(status(traj, env, cfg) == before);
}

TEST_CASE("the reference controller succeeds on most random scenes") {
  const ScenarioConfig cfg;
  const EnvironmentSpace space{cfg};
  ReferenceController ctrl(cfg);
  Simulator sim(cfg, ctrl);
  Rng rng(7);
  int successes = 0;
  for (int i = 0; i < 200; ++i) {
    successes += sim.simulate({space.sample_env(rng), cfg.initial_state()}).status.status;
  }
  CHECK(successes >= 100);
  CHECK(successes <= 190);
}
