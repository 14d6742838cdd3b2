#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metafal/baselines.hpp"
#include "metafal/controller.hpp"
#include "metafal/planner.hpp"
#include "metafal/serialization.hpp"

namespace metafal {

inline constexpr int kExitFound = 0;
inline constexpr int kExitExhausted = 2;
inline constexpr int kExitConfig = 64;

/// Algorithm identifiers accepted on the command line, in table order.
const std::vector<std::string>& algorithm_ids();
bool is_algorithm(std::string_view id);

struct ExperimentConfig {
  ScenarioConfig scenario;
  ReferenceControllerParams controller;
  /// When non-empty, runs drive this external controller command instead of
  /// the in-process reference controller.
  std::vector<std::string> controller_command;

  Budgets budgets;
  double goal_bias = 0.8;
  double distance_weight = 0.5;
  std::size_t expansion_breadth = 1;
  double sigma_x = 2.0;
  double sigma_y = 2.0;
  double sigma_r = 0.0;
  PrefixValidation validation = PrefixValidation::kFast;
  bool full_replacement_when_biased = true;
  std::size_t population_size = 4;

  std::uint64_t root_seed = 1;
  std::size_t seeds = 20;
  std::vector<std::string> algorithms = algorithm_ids();
  std::size_t jobs = 1;

  /// Throws ConfigError.
  void validate() const;
};

/// Unknown keys and ill-typed values raise ConfigError.
ExperimentConfig experiment_from_json(const Json& j);
ExperimentConfig load_experiment(const std::filesystem::path& path);
Json experiment_to_json(const ExperimentConfig& cfg);

PlannerConfig planner_config(const ExperimentConfig& cfg, std::string_view algo);
BaselineConfig baseline_config(const ExperimentConfig& cfg);

/// Seed of run `index` derived from `root` by a splitmix64 step; shared by
/// all algorithms so they face the same streams.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

struct RunRecord {
  std::string algo;
  std::uint64_t seed = 0;
  bool success = false;
  EffortCounters counters;
  /// Simulator-side count of controller invocations during the run.
  std::uint64_t simulator_calls = 0;
  std::optional<MetaState> goal;
  std::vector<Mutation> provenance;
};

RunRecord run_single(const ExperimentConfig& cfg, std::string_view algo, std::uint64_t seed);

/// Every configured algorithm on seeds derive_seed(root_seed, 0..seeds-1),
/// spread over `cfg.jobs` worker threads. Records come back ordered by
/// algorithm, then seed index.
std::vector<RunRecord> run_benchmark(const ExperimentConfig& cfg);

std::string csv_header(bool with_wall = true);
std::string csv_row(const RunRecord& r, bool with_wall = true);

struct Stats {
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Linear-interpolation quantiles of a non-empty sample.
Stats describe(std::vector<double> values);

struct AlgoSummary {
  std::string algo;
  std::size_t runs = 0;
  std::size_t successes = 0;
  Stats envs_tested;
  Stats calls_total;
};

std::vector<AlgoSummary> summarize(const std::vector<RunRecord>& records);
std::string summary_csv(const std::vector<AlgoSummary>& rows);
std::string summary_table(const std::vector<AlgoSummary>& rows);

/// JSON form of a run: counters, goal environment and provenance.
Json record_to_json(const RunRecord& r, bool with_wall = true);

}  // namespace metafal
