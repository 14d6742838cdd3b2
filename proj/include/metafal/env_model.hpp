#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "metafal/geometry.hpp"
#include "metafal/scenario.hpp"

namespace metafal {

struct CollectionSchema {
  std::string name;
  std::string element_type;
  std::size_t min_count = 0;
  std::size_t max_count = 0;
  bool ordered = false;
};

/// Declares the parameters (global, immutable) and element collections
/// (local, mutable) an environment of this type carries.
struct EnvironmentType {
  std::string name;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<CollectionSchema> collections;

  void validate() const;
  const CollectionSchema& collection(const std::string& name) const;
};

/// The "obstructed track" type: curve/range/width/end-zone parameters and an
/// unordered "obstacles" collection of discs.
std::shared_ptr<const EnvironmentType> obstructed_track_type(std::size_t max_obstacles = 64);

inline constexpr const char* kObstacles = "obstacles";

struct TrackParams {
  double amplitude = 0.8;
  double x_start = 0.0;
  double x_end = 5.0 * kPi;
  double width = 1.6;
  double end_zone_start = 4.5 * kPi;

  friend bool operator==(const TrackParams&, const TrackParams&) = default;
};

TrackParams track_params(const ScenarioConfig& cfg);
std::shared_ptr<const TrackGeometry> make_track_geometry(const TrackParams& params,
                                                         double sample_step = 0.01);

/// An environment-state: immutable track parameters plus the obstacle
/// multiset. Copies share the sampled track geometry.
class Environment {
 public:
  Environment(std::shared_ptr<const EnvironmentType> type, TrackParams params,
              std::shared_ptr<const TrackGeometry> geometry, std::vector<Disc> obstacles);

  const EnvironmentType& type() const { return *type_; }
  const TrackParams& params() const { return params_; }
  const TrackGeometry& track() const { return *geometry_; }
  const std::vector<Disc>& obstacles() const { return obstacles_; }

  bool same_parameters(const Environment& other) const;
  Environment with_obstacles(std::vector<Disc> obstacles) const;

  /// Parameters equal and obstacle collections equal as multisets.
  friend bool operator==(const Environment& a, const Environment& b);

 private:
  std::shared_ptr<const EnvironmentType> type_;
  TrackParams params_;
  std::shared_ptr<const TrackGeometry> geometry_;
  std::vector<Disc> obstacles_;
};

enum class MutationOp { kAdd, kRemove, kReplace };

/// A meta-control: edit of one element collection.
struct Mutation {
  std::string collection = kObstacles;
  MutationOp op = MutationOp::kReplace;
  std::vector<Disc> removed;
  std::vector<Disc> added;

  static Mutation add(std::vector<Disc> elements);
  static Mutation remove(std::vector<Disc> elements);
  static Mutation replace(std::vector<Disc> old_elements, std::vector<Disc> new_elements);

  /// Checks the operator/element-list shape; throws InvalidMutation.
  void validate() const;

  friend bool operator==(const Mutation&, const Mutation&) = default;
};

/// coll <- (coll \ removed) + added. Removal takes the first equal element;
/// additions are appended. Throws UnknownCollection, ElementNotPresent,
/// CardinalityViolation or InvalidMutation.
Environment apply_mutation(const Environment& env, const Mutation& m);

struct Scene {
  Environment env;
  SystemState initial_state;
};

/// Sampling domain and factory for environments of one scenario: elements
/// are discs of the configured radius with centres in the band, off the end
/// zone and (optionally) clear of the car's starting footprint.
class EnvironmentSpace {
 public:
  static constexpr int kMaxRejections = 10000;

  explicit EnvironmentSpace(ScenarioConfig cfg);

  const ScenarioConfig& config() const { return cfg_; }
  const TrackParams& params() const { return params_; }
  const TrackGeometry& track() const { return *geometry_; }
  std::shared_ptr<const EnvironmentType> type() const { return type_; }

  Environment make(std::vector<Disc> obstacles) const;
  bool in_domain(const Disc& d) const;

  Disc sample_element(Rng& rng) const;
  Environment sample_env(Rng& rng) const;

  /// Replacement of `subset` by Gaussian-displaced copies (std dev
  /// `sigma`), each redrawn until it lands in the domain. The radius is kept
  /// unless `sigma_r` > 0.
  Mutation perturb_elements(const Environment& env, std::span<const Disc> subset,
                            std::pair<double, double> sigma, Rng& rng,
                            double sigma_r = 0.0) const;

 private:
  ScenarioConfig cfg_;
  TrackParams params_;
  std::shared_ptr<const EnvironmentType> type_;
  std::shared_ptr<const TrackGeometry> geometry_;
  OrientedRect start_shape_;
};

/// Monte-Carlo set distance between obstacle collections: the mean distance
/// from a uniform point in a random disc of one set to the nearest disc of
/// the other, averaged over both directions. Both directions draw from one
/// seed taken from `rng`, which makes the result exactly symmetric.
double env_distance(const Environment& a, const Environment& b, Rng& rng, int samples = 32);

/// One direction of env_distance with an explicit seed.
double directed_collection_distance(std::span<const Disc> from, std::span<const Disc> to,
                                    std::uint64_t seed, int samples, double empty_penalty);

}  // namespace metafal
