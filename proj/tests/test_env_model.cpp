#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "metafal/env_model.hpp"
#include "metafal/errors.hpp"
#include "support.hpp"

using namespace metafal;

namespace {

const Disc kA{2.0, 0.5, 0.1};
const Disc kB{5.0, -0.5, 0.1};
const Disc kC{8.0, 0.2, 0.1};

}  // namespace

TEST_CASE("addition then subtraction restores the environment") {
  const EnvironmentSpace space{ScenarioConfig{}};
  const Environment env = space.make({kA, kB});
  const Environment grown = apply_mutation(env, Mutation::add({kC}));
  CHECK(grown.obstacles().size() == 3);
  CHECK(apply_mutation(grown, Mutation::remove({kC})) == env);
}

TEST_CASE("replacement swaps one element") {
  const EnvironmentSpace space{ScenarioConfig{}};
  const Environment env = space.make({kA, kB});
  CHECK(apply_mutation(env, Mutation::replace({kA}, {kC})) == space.make({kC, kB}));
}

TEST_CASE("multiset removal takes one copy") {
  const EnvironmentSpace space{ScenarioConfig{}};
  const Environment env = space.make({kA, kA, kB});
  CHECK(apply_mutation(env, Mutation::remove({kA})) == space.make({kA, kB}));
}

TEST_CASE("mutation errors") {
  const EnvironmentSpace space{ScenarioConfig{}};
  const Environment env = space.make({kA, kB});
  CHECK_THROWS_AS(apply_mutation(env, Mutation::remove({kC})), ElementNotPresent);
  Mutation unknown = Mutation::add({kC});
  unknown.collection = "walls";
  CHECK_THROWS_AS(apply_mutation(env, unknown), UnknownCollection);
  CHECK_THROWS_AS(apply_mutation(env, Mutation::add({})), InvalidMutation);
  CHECK_THROWS_AS(apply_mutation(env, Mutation::add({{1.0, 0.0, -0.1}})), InvalidMutation);
  CHECK_THROWS_AS(apply_mutation(env, Mutation::add({{NAN, 0.0, 0.1}})), InvalidMutation);

  ScenarioConfig tight;
  tight.max_obstacles = 2;
  tight.obstacle_count = 2;
  const EnvironmentSpace small{tight};
  CHECK_THROWS_AS(apply_mutation(small.make({kA, kB}), Mutation::add({kC})),
                  CardinalityViolation);
  CHECK_THROWS_AS(small.make({kA, kB, kC}), CardinalityViolation);
}

TEST_CASE("environment equality ignores order but not parameters") {
  const EnvironmentSpace space{ScenarioConfig{}};
  CHECK(space.make({kA, kB}) == space.make({kB, kA}));
  CHECK_FALSE(space.make({kA, kB}) == space.make({kA, kC}));
  const EnvironmentSpace flat{testing::straight_config()};
  CHECK_FALSE(space.make({kA}) == flat.make({kA}));
}

TEST_CASE("sampling is deterministic and in the domain") {
  const EnvironmentSpace space{ScenarioConfig{}};
  Rng a(5);
  Rng b(5);
  for (int i = 0; i < 50; ++i) {
    const Environment ea = space.sample_env(a);
    CHECK(ea == space.sample_env(b));
    CHECK(ea.obstacles().size() == 3);
    for (const Disc& d : ea.obstacles()) {
      CHECK(space.in_domain(d));
      CHECK(d.r == 0.1);
    }
  }
  ScenarioConfig none;
  none.obstacle_count = 0;
  Rng rng(1);
  CHECK(EnvironmentSpace{none}.sample_env(rng).obstacles().empty());
}

TEST_CASE("sampled elements are uniform over the band") {
  // Away from the start footprint the domain is the band strip, whose
  // vertical thickness is constant, so equal (x, offset) cells carry equal
  // area.
  const EnvironmentSpace space{ScenarioConfig{}};
  constexpr int kXBins = 20;
  constexpr int kOffBins = 4;
  const double x_lo = 1.0;
  const double x_hi = space.params().end_zone_start - 0.1;
  std::array<int, kXBins * kOffBins> counts{};
  Rng rng(2024);
  int kept = 0;
  while (kept < 20000) {
    const Disc d = space.sample_element(rng);
    if (d.cx < x_lo) {
      continue;
    }
    const double off = d.cy - space.track().centerline_sampled(d.cx) + 0.8;
    const int ix = std::min(kXBins - 1, static_cast<int>((d.cx - x_lo) / (x_hi - x_lo) * kXBins));
    const int io = std::clamp(static_cast<int>(off / 1.6 * kOffBins), 0, kOffBins - 1);
    ++counts[static_cast<std::size_t>(ix * kOffBins + io)];
    ++kept;
  }
  const double expected = static_cast<double>(kept) / counts.size();
  double chi2 = 0.0;
  for (int c : counts) {
    chi2 += (c - expected) * (c - expected) / expected;
  }
  const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  const double p = 1.0 - boost::math::cdf(dist, chi2);
  CHECK(p > 0.01);
}

TEST_CASE("perturbation with zero sigma is the identity") {
  const EnvironmentSpace space{ScenarioConfig{}};
  const Environment env = space.make({kA, kB, kC});
  Rng rng(3);
  const std::vector<Disc> subset{kB};
  const Mutation m = space.perturb_elements(env, subset, {0.0, 0.0}, rng);
  CHECK(apply_mutation(env, m) == env);
}

TEST_CASE("perturbation rejects elements outside the collection") {
  const EnvironmentSpace space{ScenarioConfig{}};
  const Environment env = space.make({kA, kB});
  Rng rng(3);
  const std::vector<Disc> subset{kC};
  CHECK_THROWS_AS(space.perturb_elements(env, subset, {1.0, 1.0}, rng), ElementNotPresent);
}

TEST_CASE("perturbation spread matches the truncated Gaussian") {
  const EnvironmentSpace space{ScenarioConfig{}};
  const Disc origin{6.0, 0.8 * std::sin(6.0), 0.1};
  const Environment env = space.make({origin});
  const double sigma = 2.0;

  // Quadrature of the Gaussian restricted to the element domain.
  double w_sum = 0.0;
  double mx = 0.0;
  double mxx = 0.0;
  double my = 0.0;
  double myy = 0.0;
  const double h = 0.01;
  for (double x = 0.0; x < space.params().end_zone_start; x += h) {
    for (double y = -1.7; y < 1.7; y += h) {
      const Disc d{x + 0.5 * h, y + 0.5 * h, 0.1};
      if (!space.in_domain(d)) {
        continue;
      }
      const double dx = d.cx - origin.cx;
      const double dy = d.cy - origin.cy;
      const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      w_sum += w;
      mx += w * dx;
      mxx += w * dx * dx;
      my += w * dy;
      myy += w * dy * dy;
    }
  }
  const double sx = std::sqrt(mxx / w_sum - (mx / w_sum) * (mx / w_sum));
  const double sy = std::sqrt(myy / w_sum - (my / w_sum) * (my / w_sum));

  Rng rng(7);
  std::vector<double> dxs;
  std::vector<double> dys;
  const std::vector<Disc> subset{origin};
  for (int i = 0; i < 10000; ++i) {
    const Mutation m = space.perturb_elements(env, subset, {sigma, sigma}, rng);
    REQUIRE(m.added.size() == 1);
    CHECK(m.added[0].r == origin.r);
    dxs.push_back(m.added[0].cx - origin.cx);
    dys.push_back(m.added[0].cy - origin.cy);
  }
  auto stddev = [](const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double ss = 0.0;
    for (double e : v) {
      ss += (e - mean) * (e - mean);
    }
    return std::sqrt(ss / (v.size() - 1));
  };
  CHECK(stddev(dxs) == doctest::Approx(sx).epsilon(0.05));
  CHECK(stddev(dys) == doctest::Approx(sy).epsilon(0.05));
}

TEST_CASE("environment distance examples") {
  const EnvironmentSpace space{ScenarioConfig{}};
  const Environment e = space.make({kA, kB, kC});
  Rng rng(9);
  CHECK(env_distance(e, e, rng) == 0.0);
  CHECK(env_distance(e, space.make({kC, kA, kB}), rng) == 0.0);

  Rng r1(10);
  Rng r2(10);
  const Environment f = space.make({kA, {3.0, 0.0, 0.1}});
  CHECK(env_distance(e, f, r1) == env_distance(f, e, r2));

  const EnvironmentSpace flat{testing::straight_config()};
  CHECK_THROWS_AS(env_distance(e, flat.make({kA}), rng), IncompatibleEnvironments);
}

TEST_CASE("environment distance of a shifted set tracks the high-sample estimate") {
  const EnvironmentSpace space{ScenarioConfig{}};
  const double shift = 1.5;
  const std::vector<Disc> base{{2.0, 0.0, 0.1}, {6.0, 0.0, 0.1}, {10.0, 0.0, 0.1}};
  std::vector<Disc> moved = base;
  for (Disc& d : moved) {
    d.cx += shift;
  }
  const Environment a = space.make(base);
  const Environment b = space.make(moved);

  const double penalty = space.params().x_end;
  const double oracle = 0.5 * (directed_collection_distance(base, moved, 1, 100000, penalty) +
                               directed_collection_distance(moved, base, 2, 100000, penalty));
  CHECK(oracle == doctest::Approx(shift - 0.1).epsilon(0.01));

  // Per-point distances spread over [shift - 2r, shift], so the standard
  // error of a 32-sample mean is below 0.2 / sqrt(12 * 32).
  Rng rng(11);
  double mean = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double est = env_distance(a, b, rng);
    CHECK(std::abs(est - oracle) < 4.0 * 0.2 / std::sqrt(12.0 * 32.0));
    mean += est / 200.0;
  }
  CHECK(mean == doctest::Approx(oracle).epsilon(0.005));
}
