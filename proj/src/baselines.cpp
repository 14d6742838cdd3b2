#include "metafal/baselines.hpp"

#include <algorithm>
#include <chrono>

#include "metafal/errors.hpp"

namespace metafal {

void BaselineConfig::validate() const {
  if (budgets.max_envs == 0 && budgets.max_controller_calls == 0 &&
      budgets.max_wall_seconds <= 0.0) {
    throw ConfigError("at least one budget must be set");
  }
  if (population_size < 2) {
    throw ConfigError("population needs at least two members");
  }
  if (crossover_children > population_size) {
    throw ConfigError("more crossover children than population slots");
  }
  if (!(sigma_x >= 0.0 && sigma_y >= 0.0 && sigma_r >= 0.0)) {
    throw ConfigError("perturbation standard deviations must be non-negative");
  }
}

namespace {

PlannerConfig budget_only(const BaselineConfig& cfg) {
  PlannerConfig pc;
  pc.budgets = cfg.budgets;
  return pc;
}

FalsificationResult finish(SearchContext& ctx, std::optional<MetaState> goal) {
  ctx.stamp_wall();
  FalsificationResult out;
  out.counters = ctx.counters;
  if (goal) {
    if (status(goal->traj, goal->env, ctx.sim.config()).status != 0) {
      throw ValidityError("goal meta-state does not violate the task on re-check");
    }
    out.outcome = Outcome::kFound;
    out.root_env = goal->env;
    out.goal = std::move(goal);
  }
  return out;
}

}  // namespace

FalsificationResult uniform_falsify(const BaselineConfig& cfg, const EnvironmentSpace& space,
                                    Simulator& sim, Rng& rng) {
  cfg.validate();
  const PlannerConfig budgets = budget_only(cfg);
  SearchContext ctx{budgets, space, sim, rng, {}};
  do {
    SampledMetaState s = sample_meta_state(space, sim, rng);
    ++ctx.counters.envs_tested;
    ctx.counters.calls_sampling += s.controller_calls;
    if (s.state.status.status == 0) {
      return finish(ctx, std::move(s.state));
    }
  } while (!ctx.budget_exhausted());
  return finish(ctx, std::nullopt);
}

Environment crossover(const Environment& e1, const Environment& e2, Rng& rng) {
  if (!e1.same_parameters(e2)) {
    throw IncompatibleEnvironments();
  }
  std::vector<Disc> pool = e1.obstacles();
  pool.insert(pool.end(), e2.obstacles().begin(), e2.obstacles().end());
  std::vector<Disc> child;
  child.reserve(e1.obstacles().size());
  std::sample(pool.begin(), pool.end(), std::back_inserter(child), e1.obstacles().size(), rng);
  return e1.with_obstacles(std::move(child));
}

std::size_t pick_parent(const Population& pop, Rng& rng, std::ptrdiff_t exclude) {
  std::vector<double> weights;
  weights.reserve(pop.members.size());
  for (std::size_t i = 0; i < pop.members.size(); ++i) {
    const bool skip = static_cast<std::ptrdiff_t>(i) == exclude;
    weights.push_back(skip ? 0.0 : std::max(0.0, 1.0 - pop.members[i].fitness));
  }
  const bool all_zero = std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; });
  if (all_zero) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      weights[i] = static_cast<std::ptrdiff_t>(i) == exclude ? 0.0 : 1.0;
    }
  }
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  return pick(rng);
}

FalsificationResult genetic_falsify(const BaselineConfig& cfg, const EnvironmentSpace& space,
                                    Simulator& sim, Rng& rng) {
  cfg.validate();
  const PlannerConfig budgets = budget_only(cfg);
  SearchContext ctx{budgets, space, sim, rng, {}};
  const SystemState start = space.config().initial_state();

  Population pop;
  while (pop.members.size() < cfg.population_size) {
    SampledMetaState s = sample_meta_state(space, sim, rng);
    ++ctx.counters.envs_tested;
    ctx.counters.calls_sampling += s.controller_calls;
    if (s.state.status.status == 0) {
      return finish(ctx, std::move(s.state));
    }
    const double fit = s.state.dtf;
    pop.members.push_back(Member{std::move(s.state), fit});
    if (ctx.budget_exhausted()) {
      return finish(ctx, std::nullopt);
    }
  }

  while (true) {
    std::vector<Environment> children;
    for (std::size_t i = 0; i < cfg.crossover_children; ++i) {
      const std::size_t a = pick_parent(pop, rng);
      const std::size_t b = pick_parent(pop, rng, static_cast<std::ptrdiff_t>(a));
      children.push_back(crossover(pop.members[a].state.env, pop.members[b].state.env, rng));
    }
    while (children.size() < cfg.population_size) {
      const MetaState& parent = pop.members[pick_parent(pop, rng)].state;
      WidthPolicy width;
      DepthPolicy depth{true, cfg.sigma_x, cfg.sigma_y, cfg.sigma_r};
      const Mutation m = random_meta_control(parent, width, depth, space, rng);
      children.push_back(apply_mutation(parent.env, m));
    }

    Population next;
    next.generation = pop.generation + 1;
    for (Environment& env : children) {
      SimulationResult r = sim.simulate(Scene{env, start});
      ++ctx.counters.envs_tested;
      ctx.counters.calls_expansion += r.controller_calls;
      MetaState s = make_meta_state(std::move(env), std::move(r));
      if (s.status.status == 0) {
        return finish(ctx, std::move(s));
      }
      const double fit = s.dtf;
      next.members.push_back(Member{std::move(s), fit});
      if (ctx.budget_exhausted()) {
        return finish(ctx, std::nullopt);
      }
    }
    pop = std::move(next);
  }
}

}  // namespace metafal
