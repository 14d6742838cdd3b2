#include "metafal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <thread>

#include "metafal/errors.hpp"

namespace metafal {

const std::vector<std::string>& algorithm_ids() {
  static const std::vector<std::string> ids = {"uniform",        "genetic", "random-tree",
                                               "random-tree-perturb", "greedy",  "rrt-simplified",
                                               "rrt"};
  return ids;
}

bool is_algorithm(std::string_view id) {
  const auto& ids = algorithm_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

void ExperimentConfig::validate() const {
  scenario.validate();
  if (seeds == 0) {
    throw ConfigError("run.seeds must be at least 1");
  }
  if (jobs == 0) {
    throw ConfigError("run.jobs must be at least 1");
  }
  if (algorithms.empty()) {
    throw ConfigError("run.algorithms is empty");
  }
  for (const auto& a : algorithms) {
    if (!is_algorithm(a)) {
      throw ConfigError("unknown algorithm '" + a + "'");
    }
  }
  planner_config(*this, "rrt").validate();
  baseline_config(*this).validate();
}

namespace {

// Typed access to one JSON object with unknown-key detection.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      fail(path_, "expected an object");
    }
  }

  void done() const {
    for (const auto& [key, value] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        fail(path_ + "." + key, "unknown key");
      }
    }
  }

  const Json* get(const char* key) {
    seen_.emplace_back(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const char* key, double& out) {
    if (const Json* v = get(key)) {
      if (!v->is_number() || !std::isfinite(v->get<double>())) {
        fail(at(key), "expected a finite number");
      }
      out = v->get<double>();
    }
  }

  template <typename Int>
  void count(const char* key, Int& out) {
    if (const Json* v = get(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
        fail(at(key), "expected a non-negative integer");
      }
      out = static_cast<Int>(v->get<std::uint64_t>());
    }
  }

  void flag(const char* key, bool& out) {
    if (const Json* v = get(key)) {
      if (!v->is_boolean()) {
        fail(at(key), "expected true or false");
      }
      out = v->get<bool>();
    }
  }

  void strings(const char* key, std::vector<std::string>& out) {
    if (const Json* v = get(key)) {
      if (!v->is_array()) {
        fail(at(key), "expected an array of strings");
      }
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_string()) {
          fail(at(key), "expected an array of strings");
        }
        out.push_back(e.get<std::string>());
      }
    }
  }

  std::string at(const char* key) const { return path_ + "." + key; }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config field '" + where + "': " + what);
  }

 private:
  const Json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

}  // namespace

ExperimentConfig experiment_from_json(const Json& j) {
  ExperimentConfig cfg;
  Section root(j, "config");
  if (const Json* s = root.get("scenario")) {
    try {
      cfg.scenario = scenario_from_json(*s, "scenario");
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
  }
  if (const Json* c = root.get("controller")) {
    Section sec(*c, "controller");
    sec.number("steer_gain", cfg.controller.steer_gain);
    sec.number("lookahead", cfg.controller.lookahead);
    sec.number("center_weight", cfg.controller.center_weight);
    sec.number("accel_gain", cfg.controller.accel_gain);
    sec.number("brake_ratio", cfg.controller.brake_ratio);
    sec.strings("command", cfg.controller_command);
    sec.done();
  }
  if (const Json* s = root.get("search")) {
    Section sec(*s, "search");
    sec.number("goal_bias", cfg.goal_bias);
    sec.number("distance_weight", cfg.distance_weight);
    sec.count("expansion_breadth", cfg.expansion_breadth);
    if (const Json* sigma = sec.get("sigma")) {
      if (!sigma->is_array() || sigma->size() != 2 || !(*sigma)[0].is_number() ||
          !(*sigma)[1].is_number()) {
        Section::fail(sec.at("sigma"), "expected [sigma_x, sigma_y]");
      }
      cfg.sigma_x = (*sigma)[0].get<double>();
      cfg.sigma_y = (*sigma)[1].get<double>();
    }
    sec.number("sigma_r", cfg.sigma_r);
    if (const Json* v = sec.get("prefix_validation")) {
      const std::string mode = v->is_string() ? v->get<std::string>() : "";
      if (mode == "fast") {
        cfg.validation = PrefixValidation::kFast;
      } else if (mode == "generic") {
        cfg.validation = PrefixValidation::kGeneric;
      } else {
        Section::fail(sec.at("prefix_validation"), "expected \"fast\" or \"generic\"");
      }
    }
    sec.flag("full_replacement_when_biased", cfg.full_replacement_when_biased);
    sec.count("population_size", cfg.population_size);
    sec.done();
  }
  if (const Json* b = root.get("budgets")) {
    Section sec(*b, "budgets");
    sec.count("max_envs", cfg.budgets.max_envs);
    sec.count("max_controller_calls", cfg.budgets.max_controller_calls);
    sec.number("max_wall_seconds", cfg.budgets.max_wall_seconds);
    sec.done();
  }
  if (const Json* r = root.get("run")) {
    Section sec(*r, "run");
    sec.count("root_seed", cfg.root_seed);
    sec.count("seeds", cfg.seeds);
    sec.strings("algorithms", cfg.algorithms);
    sec.count("jobs", cfg.jobs);
    sec.done();
  }
  root.done();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  Json j;
  try {
    j = read_document(path);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  return experiment_from_json(j);
}

Json experiment_to_json(const ExperimentConfig& cfg) {
  const ReferenceControllerParams& c = cfg.controller;
  Json controller{{"steer_gain", c.steer_gain},
                  {"lookahead", c.lookahead},
                  {"center_weight", c.center_weight},
                  {"accel_gain", c.accel_gain},
                  {"brake_ratio", c.brake_ratio}};
  if (!cfg.controller_command.empty()) {
    controller["command"] = cfg.controller_command;
  }
  return Json{
      {"scenario", scenario_to_json(cfg.scenario)},
      {"controller", std::move(controller)},
      {"search",
       {{"goal_bias", cfg.goal_bias},
        {"distance_weight", cfg.distance_weight},
        {"expansion_breadth", cfg.expansion_breadth},
        {"sigma", {cfg.sigma_x, cfg.sigma_y}},
        {"sigma_r", cfg.sigma_r},
        {"prefix_validation", cfg.validation == PrefixValidation::kFast ? "fast" : "generic"},
        {"full_replacement_when_biased", cfg.full_replacement_when_biased},
        {"population_size", cfg.population_size}}},
      {"budgets",
       {{"max_envs", cfg.budgets.max_envs},
        {"max_controller_calls", cfg.budgets.max_controller_calls},
        {"max_wall_seconds", cfg.budgets.max_wall_seconds}}},
      {"run",
       {{"root_seed", cfg.root_seed},
        {"seeds", cfg.seeds},
        {"algorithms", cfg.algorithms},
        {"jobs", cfg.jobs}}}};
}

PlannerConfig planner_config(const ExperimentConfig& cfg, std::string_view algo) {
  PlannerConfig pc;
  pc.goal_bias = cfg.goal_bias;
  pc.distance_weight = cfg.distance_weight;
  pc.expansion_breadth = cfg.expansion_breadth;
  pc.budgets = cfg.budgets;
  pc.validation = cfg.validation;
  pc.full_replacement_when_biased = cfg.full_replacement_when_biased;
  pc.width.random = true;
  pc.depth = DepthPolicy{true, cfg.sigma_x, cfg.sigma_y, cfg.sigma_r};
  if (algo == "random-tree") {
    pc.selection = SelectionMode::kRandom;
    pc.depth.perturb = false;
  } else if (algo == "random-tree-perturb") {
    pc.selection = SelectionMode::kRandom;
  } else if (algo == "greedy") {
    pc.selection = SelectionMode::kGreedy;
  } else if (algo == "rrt-simplified") {
    pc.selection = SelectionMode::kRrtSimplified;
  } else if (algo == "rrt") {
    pc.selection = SelectionMode::kRrtStandard;
  } else {
    throw ConfigError("'" + std::string(algo) + "' is not a tree-search algorithm");
  }
  return pc;
}

BaselineConfig baseline_config(const ExperimentConfig& cfg) {
  BaselineConfig bc;
  bc.budgets = cfg.budgets;
  bc.population_size = cfg.population_size;
  bc.crossover_children = cfg.population_size / 2;
  bc.sigma_x = cfg.sigma_x;
  bc.sigma_y = cfg.sigma_y;
  bc.sigma_r = cfg.sigma_r;
  return bc;
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t z = root + (index + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RunRecord run_single(const ExperimentConfig& cfg, std::string_view algo, std::uint64_t seed) {
  if (!is_algorithm(algo)) {
    throw ConfigError("unknown algorithm '" + std::string(algo) + "'");
  }
  const EnvironmentSpace space(cfg.scenario);
  std::unique_ptr<Controller> controller;
  if (cfg.controller_command.empty()) {
    controller = std::make_unique<ReferenceController>(cfg.scenario, cfg.controller);
  } else {
    controller = std::make_unique<ExternalController>(cfg.controller_command);
  }
  Simulator sim(cfg.scenario, *controller);
  Rng rng(seed);

  FalsificationResult res;
  if (algo == "uniform") {
    res = uniform_falsify(baseline_config(cfg), space, sim, rng);
  } else if (algo == "genetic") {
    res = genetic_falsify(baseline_config(cfg), space, sim, rng);
  } else {
    res = falsify(planner_config(cfg, algo), space, sim, rng);
  }

  RunRecord r;
  r.algo = std::string(algo);
  r.seed = seed;
  r.success = res.outcome == Outcome::kFound;
  r.counters = res.counters;
  r.simulator_calls = sim.controller_calls();
  r.goal = std::move(res.goal);
  r.provenance = std::move(res.provenance);
  return r;
}

std::vector<RunRecord> run_benchmark(const ExperimentConfig& cfg) {
  cfg.validate();
  struct Job {
    std::string algo;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& algo : cfg.algorithms) {
    for (std::size_t i = 0; i < cfg.seeds; ++i) {
      jobs.push_back(Job{algo, derive_seed(cfg.root_seed, i)});
    }
  }
  std::vector<RunRecord> records(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        records[i] = run_single(cfg, jobs[i].algo, jobs[i].seed);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::min(cfg.jobs, jobs.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n; ++t) {
      pool.emplace_back(worker);
    }
    worker();
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return records;
}

std::string csv_header(bool with_wall) {
  std::string h = "algo,seed,success,envs_tested,calls_expansion,calls_sampling,calls_total";
  return with_wall ? h + ",wall_ms" : h;
}

std::string csv_row(const RunRecord& r, bool with_wall) {
  std::ostringstream out;
  out << r.algo << ',' << r.seed << ',' << (r.success ? 1 : 0) << ',' << r.counters.envs_tested
      << ',' << r.counters.calls_expansion << ',' << r.counters.calls_sampling << ','
      << r.counters.calls_total();
  if (with_wall) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", r.counters.wall_ms);
    out << ',' << buf;
  }
  return out.str();
}

Stats describe(std::vector<double> values) {
  if (values.empty()) {
    throw std::invalid_argument("describe() needs at least one value");
  }
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  Stats s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.median = quantile(0.5);
  s.q1 = quantile(0.25);
  s.q3 = quantile(0.75);
  s.min = values.front();
  s.max = values.back();
  return s;
}

std::vector<AlgoSummary> summarize(const std::vector<RunRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const RunRecord*>> by_algo;
  for (const auto& r : records) {
    if (!by_algo.contains(r.algo)) {
      order.push_back(r.algo);
    }
    by_algo[r.algo].push_back(&r);
  }
  std::vector<AlgoSummary> out;
  for (const auto& algo : order) {
    AlgoSummary s;
    s.algo = algo;
    std::vector<double> envs;
    std::vector<double> calls;
    for (const RunRecord* r : by_algo[algo]) {
      ++s.runs;
      s.successes += r->success ? 1 : 0;
      envs.push_back(static_cast<double>(r->counters.envs_tested));
      calls.push_back(static_cast<double>(r->counters.calls_total()));
    }
    s.envs_tested = describe(envs);
    s.calls_total = describe(calls);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string stats_cells(const Stats& s) {
  return fmt(s.mean) + ',' + fmt(s.median) + ',' + fmt(s.q1) + ',' + fmt(s.q3) + ',' +
         fmt(s.min) + ',' + fmt(s.max);
}

}  // namespace

std::string summary_csv(const std::vector<AlgoSummary>& rows) {
  std::string out =
      "algo,runs,successes,"
      "envs_mean,envs_median,envs_q1,envs_q3,envs_min,envs_max,"
      "calls_mean,calls_median,calls_q1,calls_q3,calls_min,calls_max\n";
  for (const auto& r : rows) {
    out += r.algo + ',' + std::to_string(r.runs) + ',' + std::to_string(r.successes) + ',' +
           stats_cells(r.envs_tested) + ',' + stats_cells(r.calls_total) + '\n';
  }
  return out;
}

std::string summary_table(const std::vector<AlgoSummary>& rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %7s %10s %10s %12s %12s %12s\n", "algorithm", "found",
                "envs mean", "envs med", "calls mean", "calls med", "calls IQR");
  out += line;
  for (const auto& r : rows) {
    const std::string found = std::to_string(r.successes) + "/" + std::to_string(r.runs);
    std::snprintf(line, sizeof line, "%-20s %7s %10.2f %10.1f %12.1f %12.1f %12.1f\n",
                  r.algo.c_str(), found.c_str(), r.envs_tested.mean, r.envs_tested.median,
                  r.calls_total.mean, r.calls_total.median, r.calls_total.q3 - r.calls_total.q1);
    out += line;
  }
  return out;
}

Json record_to_json(const RunRecord& r, bool with_wall) {
  Json provenance = Json::array();
  for (const Mutation& m : r.provenance) {
    Json removed = Json::array();
    Json added = Json::array();
    for (const Disc& d : m.removed) {
      removed.push_back({{"x", d.cx}, {"y", d.cy}, {"r", d.r}});
    }
    for (const Disc& d : m.added) {
      added.push_back({{"x", d.cx}, {"y", d.cy}, {"r", d.r}});
    }
    provenance.push_back({{"collection", m.collection}, {"removed", removed}, {"added", added}});
  }
  Json j{{"algo", r.algo},
         {"seed", r.seed},
         {"success", r.success},
         {"envs_tested", r.counters.envs_tested},
         {"envs_sampled", r.counters.envs_sampled},
         {"calls_expansion", r.counters.calls_expansion},
         {"calls_sampling", r.counters.calls_sampling},
         {"calls_total", r.counters.calls_total()},
         {"provenance", std::move(provenance)}};
  if (with_wall) {
    j["wall_ms"] = r.counters.wall_ms;
  }
  if (r.goal) {
    j["goal_environment"] = environment_to_json(r.goal->env);
    j["goal_status"] = status_to_json(r.goal->status);
  }
  return j;
}

}  // namespace metafal
