#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "metafal/controller.hpp"
#include "metafal/env_model.hpp"
#include "metafal/meta.hpp"
#include "metafal/simulator.hpp"

namespace metafal::testing {

/// Flat band (zero amplitude) of the given width.
inline ScenarioConfig straight_config(double width = 1.6) {
  ScenarioConfig cfg;
  cfg.amplitude = 0.0;
  cfg.width = width;
  return cfg;
}

/// Constant command regardless of what it sees.
class FixedController final : public Controller {
 public:
  explicit FixedController(Control u) : u_(u) {}
  Control act(const Observation&) override { return u_; }

 private:
  Control u_;
};

/// Drives off the track within a few steps.
inline FixedController crash_controller() { return FixedController({0.4, 0.2}); }
/// Never moves, so every run times out.
inline FixedController parked_controller() { return FixedController({0.0, 0.0}); }

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random valid meta-state paired with a random replacement mutation drawn
/// from the sampling domain; about half of the mutations only nudge one
/// element so that long prefixes survive.
struct MutationCase {
  MetaState state;
  Mutation mutation;
};

inline MutationCase random_mutation_case(const EnvironmentSpace& space, Simulator& sim,
                                         Rng& rng) {
  MetaState s = sample_meta_state(space, sim, rng).state;
  const auto& obs = s.env.obstacles();
  std::vector<Disc> subset;
  const auto n = std::uniform_int_distribution<std::size_t>(1, obs.size())(rng);
  std::sample(obs.begin(), obs.end(), std::back_inserter(subset), n, rng);
  Mutation m;
  if (std::bernoulli_distribution(0.5)(rng)) {
    m = space.perturb_elements(s.env, subset, {0.3, 0.3}, rng);
  } else {
    std::vector<Disc> added;
    for (std::size_t i = 0; i < n; ++i) {
      added.push_back(space.sample_element(rng));
    }
    m = Mutation::replace(subset, added);
  }
  return {std::move(s), std::move(m)};
}

}  // namespace metafal::testing
