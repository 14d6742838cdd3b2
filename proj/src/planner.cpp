#include "metafal/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "metafal/errors.hpp"

namespace metafal {

void PlannerConfig::validate() const {
  if (!(goal_bias >= 0.0 && goal_bias <= 1.0)) {
    throw ConfigError("goal_bias must lie in [0, 1]");
  }
  if (!width.random && width.constant < 1) {
    throw ConfigError("constant mutation width must be at least 1");
  }
  if (depth.perturb && !(depth.sigma_x >= 0.0 && depth.sigma_y >= 0.0 && depth.sigma_r >= 0.0)) {
    throw ConfigError("perturbation standard deviations must be non-negative");
  }
  if (expansion_breadth < 1) {
    throw ConfigError("expansion breadth must be at least 1");
  }
  if (!(distance_weight >= 0.0 && distance_weight <= 1.0)) {
    throw ConfigError("distance weight must lie in [0, 1]");
  }
  if (budgets.max_envs == 0 && budgets.max_controller_calls == 0 &&
      budgets.max_wall_seconds <= 0.0) {
    throw ConfigError("at least one budget must be set");
  }
  if (budgets.max_wall_seconds < 0.0) {
    throw ConfigError("wall-time budget must be non-negative");
  }
}

std::size_t SearchTree::add_root(MetaState s) {
  nodes_.clear();
  nodes_.push_back(TreeNode{std::move(s), std::nullopt, std::nullopt});
  return 0;
}

std::size_t SearchTree::add_child(std::size_t parent, Mutation m, MetaState s) {
  if (parent >= nodes_.size()) {
    throw std::out_of_range("parent node index out of range");
  }
  nodes_.push_back(TreeNode{std::move(s), parent, std::move(m)});
  return nodes_.size() - 1;
}

std::size_t SearchTree::closest_to_failure() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (nodes_[i].state.dtf < nodes_[best].state.dtf) {
      best = i;
    }
  }
  return best;
}

std::vector<Mutation> SearchTree::path_to(std::size_t i) const {
  std::vector<Mutation> path;
  std::optional<std::size_t> at = i;
  while (at && nodes_.at(*at).mutation) {
    path.push_back(*nodes_[*at].mutation);
    at = nodes_[*at].parent;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

bool SearchContext::budget_exhausted() const {
  const Budgets& b = cfg.budgets;
  if (b.max_envs > 0 && counters.envs_tested >= b.max_envs) {
    return true;
  }
  if (b.max_controller_calls > 0 && counters.calls_total() >= b.max_controller_calls) {
    return true;
  }
  if (b.max_wall_seconds > 0.0) {
    const std::chrono::duration<double> spent = std::chrono::steady_clock::now() - started;
    if (spent.count() >= b.max_wall_seconds) {
      return true;
    }
  }
  return false;
}

void SearchContext::stamp_wall() {
  counters.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
          .count();
}

namespace {

template <typename Dist>
std::size_t nearest_node(const SearchTree& tree, Dist&& dist) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const double d = dist(tree.node(i).state);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

Selection select_node(const SearchTree& tree, SearchContext& ctx) {
  if (tree.empty()) {
    throw std::logic_error("node selection on an empty tree");
  }
  Selection sel;
  switch (ctx.cfg.selection) {
    case SelectionMode::kRandom: {
      std::uniform_int_distribution<std::size_t> pick(0, tree.size() - 1);
      sel.node = pick(ctx.rng);
      return sel;
    }
    case SelectionMode::kGreedy:
      sel.node = tree.closest_to_failure();
      sel.goal_biased = true;
      return sel;
    case SelectionMode::kRrtStandard:
    case SelectionMode::kRrtSimplified:
      break;
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(ctx.rng) < ctx.cfg.goal_bias) {
    sel.node = tree.closest_to_failure();
    sel.goal_biased = true;
    return sel;
  }

  if (ctx.cfg.selection == SelectionMode::kRrtSimplified) {
    const Environment target = ctx.space.sample_env(ctx.rng);
    sel.node = nearest_node(
        tree, [&](const MetaState& s) { return env_distance(s.env, target, ctx.rng); });
    return sel;
  }

  if (ctx.budget_exhausted()) {
    return sel;
  }
  SampledMetaState sample = sample_meta_state(ctx.space, ctx.sim, ctx.rng);
  ++ctx.counters.envs_tested;
  ++ctx.counters.envs_sampled;
  ctx.counters.calls_sampling += sample.controller_calls;
  if (sample.state.status.status == 0) {
    sel.goal = std::move(sample.state);
    return sel;
  }
  const double w = ctx.cfg.distance_weight;
  sel.node = nearest_node(tree, [&](const MetaState& s) {
    return meta_state_distance(s, sample.state, w, ctx.rng);
  });
  return sel;
}

Mutation random_meta_control(const MetaState& s, const WidthPolicy& width,
                             const DepthPolicy& depth, const EnvironmentSpace& space, Rng& rng,
                             bool allow_full) {
  const std::vector<Disc>& coll = s.env.obstacles();
  if (coll.empty()) {
    throw InvalidMutation("cannot draw a replacement from an empty collection");
  }
  std::size_t max_n = coll.size();
  if (!allow_full && max_n > 1) {
    --max_n;
  }
  std::size_t n = 0;
  if (width.random) {
    n = std::uniform_int_distribution<std::size_t>(1, max_n)(rng);
  } else {
    n = std::min(width.constant, max_n);
  }

  std::vector<std::size_t> idx(coll.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<std::size_t> chosen;
  std::sample(idx.begin(), idx.end(), std::back_inserter(chosen), n, rng);
  std::vector<Disc> subset;
  subset.reserve(n);
  for (std::size_t i : chosen) {
    subset.push_back(coll[i]);
  }

  if (depth.perturb) {
    return space.perturb_elements(s.env, subset, {depth.sigma_x, depth.sigma_y}, rng,
                                  depth.sigma_r);
  }
  std::vector<Disc> added;
  added.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    added.push_back(space.sample_element(rng));
  }
  return Mutation::replace(std::move(subset), std::move(added));
}

std::optional<std::size_t> expand_node(SearchTree& tree, std::size_t node, SearchContext& ctx,
                                       bool goal_biased) {
  const bool allow_full = !goal_biased || ctx.cfg.full_replacement_when_biased;
  for (std::size_t i = 0; i < ctx.cfg.expansion_breadth; ++i) {
    if (ctx.budget_exhausted()) {
      break;
    }
    const MetaState& parent = tree.node(node).state;
    Mutation m = random_meta_control(parent, ctx.cfg.width, ctx.cfg.depth, ctx.space, ctx.rng,
                                     allow_full);
    Transition t = meta_dynamics(parent, m, ctx.sim, ctx.cfg.dynamics, ctx.cfg.validation);
    ++ctx.counters.envs_tested;
    ctx.counters.calls_expansion += t.controller_calls;
    const bool goal = t.state.status.status == 0;
    const std::size_t child = tree.add_child(node, std::move(m), std::move(t.state));
    if (goal) {
      return child;
    }
  }
  return std::nullopt;
}

namespace {

FalsificationResult found(SearchContext& ctx, MetaState goal, std::vector<Mutation> provenance,
                          Environment root) {
  if (status(goal.traj, goal.env, ctx.sim.config()).status != 0) {
    throw ValidityError("goal meta-state does not violate the task on re-check");
  }
  ctx.stamp_wall();
  FalsificationResult out;
  out.outcome = Outcome::kFound;
  out.goal = std::move(goal);
  out.counters = ctx.counters;
  out.provenance = std::move(provenance);
  out.root_env = std::move(root);
  return out;
}

}  // namespace

FalsificationResult falsify(const PlannerConfig& cfg, const EnvironmentSpace& space,
                            Simulator& sim, Rng& rng) {
  cfg.validate();
  SearchContext ctx{cfg, space, sim, rng, {}};

  SampledMetaState root = sample_meta_state(space, sim, rng);
  ctx.counters.envs_tested = 1;
  ctx.counters.calls_sampling += root.controller_calls;
  Environment root_env = root.state.env;
  if (root.state.status.status == 0) {
    return found(ctx, std::move(root.state), {}, std::move(root_env));
  }
  SearchTree tree;
  tree.add_root(std::move(root.state));

  while (!ctx.budget_exhausted()) {
    Selection sel = select_node(tree, ctx);
    if (sel.goal) {
      return found(ctx, std::move(*sel.goal), {}, std::move(root_env));
    }
    if (!sel.node) {
      break;
    }
    if (auto goal = expand_node(tree, *sel.node, ctx, sel.goal_biased)) {
      return found(ctx, tree.node(*goal).state, tree.path_to(*goal), std::move(root_env));
    }
  }
  ctx.stamp_wall();
  FalsificationResult out;
  out.outcome = Outcome::kExhausted;
  out.counters = ctx.counters;
  out.root_env = std::move(root_env);
  return out;
}

}  // namespace metafal
