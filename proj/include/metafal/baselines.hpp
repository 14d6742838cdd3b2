#pragma once

#include <cstddef>
#include <vector>

#include "metafal/env_model.hpp"
#include "metafal/meta.hpp"
#include "metafal/planner.hpp"

namespace metafal {

struct BaselineConfig {
  Budgets budgets;
  std::size_t population_size = 4;
  std::size_t crossover_children = 2;
  double sigma_x = 2.0;
  double sigma_y = 2.0;
  double sigma_r = 0.0;

  void validate() const;
};

/// Independent environment samples until one violates the task.
FalsificationResult uniform_falsify(const BaselineConfig& cfg, const EnvironmentSpace& space,
                                    Simulator& sim, Rng& rng);

/// Child with |e1| elements drawn without replacement from the multiset
/// union of both parents' obstacles.
Environment crossover(const Environment& e1, const Environment& e2, Rng& rng);

struct Member {
  MetaState state;
  /// Distance-to-failure of the member's run; lower is fitter.
  double fitness = 1.0;
};

struct Population {
  std::vector<Member> members;
  std::size_t generation = 0;
};

/// Roulette draw with weights (1 - fitness); uniform if every weight is 0.
/// `exclude` removes one index from the draw.
std::size_t pick_parent(const Population& pop, Rng& rng, std::ptrdiff_t exclude = -1);

/// Generational search: each generation breeds crossover and perturbation
/// children from fitness-weighted parents, simulates them in full and
/// replaces the whole population.
FalsificationResult genetic_falsify(const BaselineConfig& cfg, const EnvironmentSpace& space,
                                    Simulator& sim, Rng& rng);

}  // namespace metafal
