#include "metafal/env_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "metafal/errors.hpp"

namespace metafal {

void EnvironmentType::validate() const {
  for (std::size_t i = 0; i < collections.size(); ++i) {
    if (collections[i].min_count > collections[i].max_count) {
      throw ConfigError("collection '" + collections[i].name + "' has min > max cardinality");
    }
    for (std::size_t j = i + 1; j < collections.size(); ++j) {
      if (collections[i].name == collections[j].name) {
        throw ConfigError("duplicate collection name '" + collections[i].name + "'");
      }
    }
  }
}

const CollectionSchema& EnvironmentType::collection(const std::string& coll) const {
  for (const auto& c : collections) {
    if (c.name == coll) {
      return c;
    }
  }
  throw UnknownCollection(coll);
}

std::shared_ptr<const EnvironmentType> obstructed_track_type(std::size_t max_obstacles) {
  auto type = std::make_shared<EnvironmentType>();
  type->name = "obstructed_track";
  type->parameters = {{"curve", "function"},
                      {"range", "interval"},
                      {"width", "non-negative scalar"},
                      {"end_zone_start", "scalar"}};
  type->collections = {CollectionSchema{kObstacles, "disc", 0, max_obstacles, false}};
  type->validate();
  return type;
}

TrackParams track_params(const ScenarioConfig& cfg) {
  return TrackParams{cfg.amplitude, cfg.x_start, cfg.x_end, cfg.width, cfg.end_zone_start};
}

std::shared_ptr<const TrackGeometry> make_track_geometry(const TrackParams& p, double sample_step) {
  const double a = p.amplitude;
  Centerline line{[a](double x) { return a * std::sin(x); },
                  [a](double x) { return a * std::cos(x); }};
  return std::make_shared<const TrackGeometry>(std::move(line), p.x_start, p.x_end,
                                               0.5 * p.width, p.end_zone_start, sample_step);
}

Environment::Environment(std::shared_ptr<const EnvironmentType> type, TrackParams params,
                         std::shared_ptr<const TrackGeometry> geometry, std::vector<Disc> obstacles)
    : type_(std::move(type)),
      params_(params),
      geometry_(std::move(geometry)),
      obstacles_(std::move(obstacles)) {
  const auto& schema = type_->collection(kObstacles);
  if (obstacles_.size() < schema.min_count || obstacles_.size() > schema.max_count) {
    throw CardinalityViolation("obstacle count " + std::to_string(obstacles_.size()) +
                               " outside [" + std::to_string(schema.min_count) + ", " +
                               std::to_string(schema.max_count) + "]");
  }
  for (const Disc& d : obstacles_) {
    if (!d.valid()) {
      throw InvalidMutation("obstacle with non-finite field or non-positive radius");
    }
  }
}

bool Environment::same_parameters(const Environment& other) const {
  return type_->name == other.type_->name && params_ == other.params_;
}

Environment Environment::with_obstacles(std::vector<Disc> obstacles) const {
  return Environment(type_, params_, geometry_, std::move(obstacles));
}

bool operator==(const Environment& a, const Environment& b) {
  if (!a.same_parameters(b) || a.obstacles_.size() != b.obstacles_.size()) {
    return false;
  }
  auto lhs = a.obstacles_;
  auto rhs = b.obstacles_;
  std::sort(lhs.begin(), lhs.end());
  std::sort(rhs.begin(), rhs.end());
  return lhs == rhs;
}

Mutation Mutation::add(std::vector<Disc> elements) {
  return Mutation{kObstacles, MutationOp::kAdd, {}, std::move(elements)};
}

Mutation Mutation::remove(std::vector<Disc> elements) {
  return Mutation{kObstacles, MutationOp::kRemove, std::move(elements), {}};
}

Mutation Mutation::replace(std::vector<Disc> old_elements, std::vector<Disc> new_elements) {
  return Mutation{kObstacles, MutationOp::kReplace, std::move(old_elements),
                  std::move(new_elements)};
}

void Mutation::validate() const {
  switch (op) {
    case MutationOp::kAdd:
      if (!removed.empty() || added.empty()) {
        throw InvalidMutation("addition must add elements and remove none");
      }
      break;
    case MutationOp::kRemove:
      if (removed.empty() || !added.empty()) {
        throw InvalidMutation("subtraction must remove elements and add none");
      }
      break;
    case MutationOp::kReplace:
      if (removed.empty() || added.empty()) {
        throw InvalidMutation("replacement must both remove and add elements");
      }
      break;
  }
  for (const Disc& d : added) {
    if (!d.valid()) {
      throw InvalidMutation("added element with non-finite field or non-positive radius");
    }
  }
}

Environment apply_mutation(const Environment& env, const Mutation& m) {
  m.validate();
  const auto& schema = env.type().collection(m.collection);
  std::vector<Disc> coll = env.obstacles();
  for (const Disc& d : m.removed) {
    auto it = std::find(coll.begin(), coll.end(), d);
    if (it == coll.end()) {
      throw ElementNotPresent("element (" + std::to_string(d.cx) + ", " + std::to_string(d.cy) +
                              ", " + std::to_string(d.r) + ") not in '" + m.collection + "'");
    }
    coll.erase(it);
  }
  coll.insert(coll.end(), m.added.begin(), m.added.end());
  if (coll.size() < schema.min_count || coll.size() > schema.max_count) {
    throw CardinalityViolation("mutation leaves " + std::to_string(coll.size()) +
                               " elements in '" + m.collection + "'");
  }
  return env.with_obstacles(std::move(coll));
}

namespace {

ScenarioConfig validated(ScenarioConfig cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

EnvironmentSpace::EnvironmentSpace(ScenarioConfig cfg)
    : cfg_(validated(cfg)),
      params_(track_params(cfg_)),
      type_(obstructed_track_type(cfg_.max_obstacles)),
      geometry_(make_track_geometry(params_, cfg_.boundary_sample_step)),
      start_shape_(car_shape(cfg_.initial_state(), cfg_)) {}

Environment EnvironmentSpace::make(std::vector<Disc> obstacles) const {
  return Environment(type_, params_, geometry_, std::move(obstacles));
}

bool EnvironmentSpace::in_domain(const Disc& d) const {
  if (!d.valid()) {
    return false;
  }
  if (d.cx < params_.x_start || d.cx + d.r >= params_.end_zone_start) {
    return false;
  }
  if (!geometry_->in_band(d.center())) {
    return false;
  }
  return !(cfg_.keep_start_clear && rect_to_disc_distance(start_shape_, d) <= 0.0);
}

Disc EnvironmentSpace::sample_element(Rng& rng) const {
  const double r = cfg_.obstacle_radius;
  const double x_hi = params_.end_zone_start - r;
  if (!(x_hi > params_.x_start)) {
    throw RejectionLimit("no room for an element before the end zone");
  }
  // Uniform abscissa and uniform lateral offset: the band has constant
  // vertical thickness, so this is uniform in area.
  std::uniform_real_distribution<double> ux(params_.x_start, x_hi);
  std::uniform_real_distribution<double> uoff(-0.5 * params_.width, 0.5 * params_.width);
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    const double x = ux(rng);
    const double y = geometry_->centerline_sampled(x) + uoff(rng);
    Disc d{x, y, r};
    if (in_domain(d)) {
      return d;
    }
  }
  throw RejectionLimit("could not place an element after " + std::to_string(kMaxRejections) +
                       " attempts");
}

Environment EnvironmentSpace::sample_env(Rng& rng) const {
  std::vector<Disc> obstacles;
  obstacles.reserve(cfg_.obstacle_count);
  for (std::size_t i = 0; i < cfg_.obstacle_count; ++i) {
    obstacles.push_back(sample_element(rng));
  }
  return make(std::move(obstacles));
}

Mutation EnvironmentSpace::perturb_elements(const Environment& env, std::span<const Disc> subset,
                                            std::pair<double, double> sigma, Rng& rng,
                                            double sigma_r) const {
  // Subset must be a sub-multiset of the collection.
  std::vector<Disc> pool = env.obstacles();
  for (const Disc& d : subset) {
    auto it = std::find(pool.begin(), pool.end(), d);
    if (it == pool.end()) {
      throw ElementNotPresent("perturbation subset element not in the obstacle collection");
    }
    pool.erase(it);
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Disc> added;
  added.reserve(subset.size());
  for (const Disc& d : subset) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxRejections && !placed; ++attempt) {
      Disc moved = d;
      moved.cx = d.cx + sigma.first * gauss(rng);
      moved.cy = d.cy + sigma.second * gauss(rng);
      if (sigma_r > 0.0) {
        moved.r = d.r + sigma_r * gauss(rng);
      }
      if (in_domain(moved)) {
        added.push_back(moved);
        placed = true;
      }
    }
    if (!placed) {
      throw RejectionLimit("perturbation could not land in the element domain");
    }
  }
  return Mutation::replace(std::vector<Disc>(subset.begin(), subset.end()), std::move(added));
}

namespace {

double distance_to_nearest(Vec2 p, std::span<const Disc> to) {
  double best = std::numeric_limits<double>::infinity();
  for (const Disc& d : to) {
    best = std::min(best, std::max(0.0, norm(p - d.center()) - d.r));
  }
  return best;
}

}  // namespace

double directed_collection_distance(std::span<const Disc> from, std::span<const Disc> to,
                                    std::uint64_t seed, int samples, double empty_penalty) {
  if (from.empty()) {
    return 0.0;
  }
  if (to.empty()) {
    return empty_penalty;
  }
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, from.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double total = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Disc& d = from[pick(rng)];
    const double rho = d.r * std::sqrt(unit(rng));
    const double phi = 2.0 * kPi * unit(rng);
    if (std::find(to.begin(), to.end(), d) != to.end()) {
      continue;  // the point lies in an identical disc of the other set
    }
    total += distance_to_nearest(d.center() + rho * unit_from_angle(phi), to);
  }
  return total / static_cast<double>(samples);
}

double env_distance(const Environment& a, const Environment& b, Rng& rng, int samples) {
  if (!a.same_parameters(b)) {
    throw IncompatibleEnvironments();
  }
  const std::uint64_t seed = rng();
  const double penalty = a.params().x_end - a.params().x_start;
  const double ab = directed_collection_distance(a.obstacles(), b.obstacles(), seed, samples, penalty);
  const double ba = directed_collection_distance(b.obstacles(), a.obstacles(), seed, samples, penalty);
  return 0.5 * (ab + ba);
}

}  // namespace metafal
