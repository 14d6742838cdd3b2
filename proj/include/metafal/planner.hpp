#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "metafal/env_model.hpp"
#include "metafal/meta.hpp"
#include "metafal/simulator.hpp"

namespace metafal {

enum class SelectionMode { kRandom, kGreedy, kRrtStandard, kRrtSimplified };

struct WidthPolicy {
  /// Uniform width on {1..|coll|} when set, otherwise min(constant, |coll|).
  bool random = true;
  std::size_t constant = 1;
};

struct DepthPolicy {
  /// Gaussian displacement of the chosen elements when set, otherwise fresh
  /// samples from the element domain.
  bool perturb = false;
  double sigma_x = 2.0;
  double sigma_y = 2.0;
  double sigma_r = 0.0;
};

/// Zero means unlimited.
struct Budgets {
  std::size_t max_envs = 500;
  std::uint64_t max_controller_calls = 0;
  double max_wall_seconds = 0.0;
};

struct PlannerConfig {
  SelectionMode selection = SelectionMode::kRandom;
  double goal_bias = 0.8;
  WidthPolicy width;
  DepthPolicy depth;
  std::size_t expansion_breadth = 1;
  /// Weight of the environment term in the meta-state distance.
  double distance_weight = 0.5;
  Budgets budgets;
  DynamicsMode dynamics = DynamicsMode::kIncremental;
  PrefixValidation validation = PrefixValidation::kFast;
  /// Whether a goal-biased iteration may replace the whole collection.
  bool full_replacement_when_biased = true;

  /// Throws ConfigError.
  void validate() const;
};

struct EffortCounters {
  std::size_t envs_tested = 0;
  /// Of envs_tested, environments drawn for node selection rather than
  /// added to the tree.
  std::size_t envs_sampled = 0;
  std::uint64_t calls_expansion = 0;
  std::uint64_t calls_sampling = 0;
  double wall_ms = 0.0;

  std::uint64_t calls_total() const { return calls_expansion + calls_sampling; }
};

enum class Outcome { kFound, kExhausted };

struct FalsificationResult {
  Outcome outcome = Outcome::kExhausted;
  std::optional<MetaState> goal;
  EffortCounters counters;
  /// Mutations from the root environment to the goal; empty when the goal
  /// was sampled.
  std::vector<Mutation> provenance;
  std::optional<Environment> root_env;
};

struct TreeNode {
  MetaState state;
  std::optional<std::size_t> parent;
  std::optional<Mutation> mutation;
};

/// Forward search tree; nodes are stored in insertion order.
class SearchTree {
 public:
  std::size_t add_root(MetaState s);
  std::size_t add_child(std::size_t parent, Mutation m, MetaState s);

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const TreeNode& node(std::size_t i) const { return nodes_.at(i); }

  /// Earliest-inserted node with the least distance-to-failure.
  std::size_t closest_to_failure() const;
  std::vector<Mutation> path_to(std::size_t i) const;

 private:
  std::vector<TreeNode> nodes_;
};

/// Shared state of one search: configuration, environment space, simulator,
/// random stream and counters.
struct SearchContext {
  const PlannerConfig& cfg;
  const EnvironmentSpace& space;
  Simulator& sim;
  Rng& rng;
  EffortCounters counters;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  bool budget_exhausted() const;
  void stamp_wall();
};

struct Selection {
  std::optional<std::size_t> node;
  /// A sampled meta-state that already violates the task.
  std::optional<MetaState> goal;
  bool goal_biased = false;
};

Selection select_node(const SearchTree& tree, SearchContext& ctx);

/// Width/depth-policy mutation of `s`'s obstacles. `allow_full` false caps
/// the width below the collection size (when it has more than one element).
Mutation random_meta_control(const MetaState& s, const WidthPolicy& width,
                             const DepthPolicy& depth, const EnvironmentSpace& space, Rng& rng,
                             bool allow_full = true);

/// Adds up to expansion_breadth children of `node`; returns the index of the
/// first child that violates the task.
std::optional<std::size_t> expand_node(SearchTree& tree, std::size_t node, SearchContext& ctx,
                                       bool goal_biased);

FalsificationResult falsify(const PlannerConfig& cfg, const EnvironmentSpace& space,
                            Simulator& sim, Rng& rng);

}  // namespace metafal
