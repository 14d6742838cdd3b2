#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "metafal/errors.hpp"
#include "metafal/harness.hpp"
#include "metafal/render_svg.hpp"

namespace fs = std::filesystem;
using namespace metafal;

namespace {

void print_status(const StatusReport& st, double dtf) {
  std::cout << "status " << st.status << "  kind " << to_string(st.kind) << "  terminal_step "
            << st.terminal_step << "  distance_to_failure " << dtf << '\n';
}

int cmd_falsify(const std::string& config, const std::string& algo, std::uint64_t seed,
                const std::string& out_dir) {
  const ExperimentConfig cfg = load_experiment(config);
  if (!is_algorithm(algo)) {
    throw ConfigError("unknown algorithm '" + algo + "'");
  }
  const RunRecord r = run_single(cfg, algo, seed);
  std::cout << csv_header() << '\n' << csv_row(r) << '\n';
  if (r.goal) {
    print_status(r.goal->status, r.goal->dtf);
  }
  if (!out_dir.empty()) {
    const fs::path dir(out_dir);
    write_text(dir / "record.json", record_to_json(r).dump(2) + "\n");
    if (r.goal) {
      write_text(dir / "goal.json", meta_state_to_json(*r.goal, cfg.scenario).dump(1) + "\n");
      write_text(dir / "goal_environment.json",
                 Json{{"scenario", scenario_to_json(cfg.scenario)},
                      {"environment", environment_to_json(r.goal->env)}}
                         .dump(2) +
                     "\n");
    }
  }
  return r.success ? kExitFound : kExitExhausted;
}

int cmd_bench(const std::string& config, std::size_t seeds, const std::string& out_dir,
              std::size_t jobs) {
  ExperimentConfig cfg = load_experiment(config);
  if (seeds > 0) {
    cfg.seeds = seeds;
  }
  if (jobs > 0) {
    cfg.jobs = jobs;
  }
  cfg.validate();
  const auto records = run_benchmark(cfg);
  const auto summary = summarize(records);
  std::cout << summary_table(summary);
  if (!out_dir.empty()) {
    const fs::path dir(out_dir);
    std::string csv = csv_header() + "\n";
    for (const auto& r : records) {
      csv += csv_row(r) + "\n";
    }
    write_text(dir / "runs.csv", csv);
    write_text(dir / "summary.csv", summary_csv(summary));
    write_text(dir / "config.json", experiment_to_json(cfg).dump(2) + "\n");
  }
  return kExitFound;
}

int cmd_replay(const std::string& in, const std::string& out, long step) {
  const Json doc = read_document(in);
  ScenarioConfig scenario;
  if (doc.contains("scenario")) {
    scenario = scenario_from_json(doc["scenario"]);
  }
  std::optional<LoadedMetaState> recorded;
  std::optional<Environment> env;
  if (doc.contains("trajectory")) {
    recorded = meta_state_from_json(doc);
    scenario = recorded->scenario;
    env = recorded->state.env;
  } else if (doc.contains("environment")) {
    env = environment_from_json(doc["environment"], scenario);
  } else {
    env = environment_from_json(doc, scenario);
  }

  ReferenceController controller(scenario);
  Simulator sim(scenario, controller);
  SystemState start = scenario.initial_state();
  if (recorded) {
    verify_meta_state(recorded->state, sim);
    start = recorded->state.traj.states.front();
  }
  const SimulationResult run = sim.simulate(Scene{*env, start});
  RenderOptions opts;
  if (step >= 0) {
    opts.fov_step = static_cast<std::size_t>(step);
  }
  write_text(out, render_svg(*env, run.trajectory, run.status, scenario, opts));
  print_status(run.status, run.distance_to_failure);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-planning falsification of a car on an obstructed track"};
  app.require_subcommand(1);

  std::string config;
  std::string algo;
  std::uint64_t seed = 0;
  std::string out_dir;
  auto* falsify_cmd = app.add_subcommand("falsify", "Run one search and report its effort");
  falsify_cmd->add_option("--config", config, "Experiment config (JSON)")->required();
  falsify_cmd->add_option("--algo", algo, "Search algorithm")
      ->required()
      ->check(CLI::IsMember(algorithm_ids()));
  falsify_cmd->add_option("--seed", seed, "Random seed")->required();
  falsify_cmd->add_option("--out", out_dir, "Directory for the run record and goal files");

  std::size_t seeds = 0;
  std::size_t jobs = 0;
  auto* bench_cmd = app.add_subcommand("bench", "Run every configured algorithm over many seeds");
  bench_cmd->add_option("--config", config, "Experiment config (JSON)")->required();
  bench_cmd->add_option("--seeds", seeds, "Seeds per algorithm (overrides the config)");
  bench_cmd->add_option("--out", out_dir, "Directory for runs.csv and summary.csv");
  bench_cmd->add_option("--jobs", jobs, "Worker threads (overrides the config)");

  std::string in;
  std::string image;
  long step = -1;
  auto* replay_cmd = app.add_subcommand("replay", "Re-simulate a scene or meta-state and draw it");
  replay_cmd->add_option("--in", in, "Scene or meta-state file")->required();
  replay_cmd->add_option("--out", image, "Output SVG")->required();
  replay_cmd->add_option("--step", step, "Step whose sensor wedge is drawn");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*falsify_cmd) {
      return cmd_falsify(config, algo, seed, out_dir);
    }
    if (*bench_cmd) {
      return cmd_bench(config, seeds, out_dir, jobs);
    }
    return cmd_replay(in, image, step);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidityError& e) {
    std::cerr << "validity error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
