// cinn: run the built-in experiments or a YAML-described one.
//
//   cinn list
//   cinn show <experiment> [--config path]
//   cinn run <experiment> [--config path] [--reps N] [--seed S] [--out dir]
//                         [--solver cinn|pinn|nn] [--iterations N] [--workers W]
//
// Exit status: 0 when every replication finished, 1 when any aborted, 2 on a
// usage or configuration error.

#include "cinn/config.hpp"
#include "cinn/experiment.hpp"
#include "cinn/outputs.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

cinn::ExperimentPlan resolve(const std::string& name, const std::string& config) {
  if (!config.empty()) return cinn::load_plan(config, name);
  return cinn::builtin_experiment(name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Characteristics-informed and physics-informed networks for linear transport"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List built-in experiments");

  std::string show_name, show_config;
  auto* show = app.add_subcommand("show", "Print the fully resolved configuration as YAML");
  show->add_option("experiment", show_name, "Experiment name")->required();
  show->add_option("--config", show_config, "YAML configuration file");

  std::string name, config, out_dir, solver;
  std::optional<int> reps, iterations, workers;
  std::optional<std::uint64_t> seed;
  bool no_timing = false;
  auto* run = app.add_subcommand("run", "Run every replication of an experiment");
  run->add_option("experiment", name, "Experiment name")->required();
  run->add_option("--config", config, "YAML configuration file");
  run->add_option("--reps", reps, "Replications per arm")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Master seed; replication k uses seed + k");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--solver", solver, "Keep only arms of this solver")->check(CLI::IsMember({"cinn", "pinn", "nn"}));
  run->add_option("--iterations", iterations, "ADAM iterations for every arm")->check(CLI::NonNegativeNumber);
  run->add_option("--workers", workers, "Concurrent replications (0: all cores)")->check(CLI::NonNegativeNumber);
  run->add_flag("--no-timing", no_timing, "Leave wall-clock values out so outputs are reproducible byte for byte");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const cinn::ExperimentPlan& p : cinn::builtin_experiments()) {
        std::cout << fmt::format("{:<20} {}\n", p.name, p.description);
        for (const cinn::ExperimentConfig& a : p.arms) {
          std::cout << fmt::format("    {:<16} {} x {} iterations\n", a.label, a.replications, a.train.iterations);
        }
      }
      return 0;
    }
    if (*show) {
      std::cout << cinn::plan_to_yaml(resolve(show_name, show_config));
      return 0;
    }

    cinn::ExperimentPlan plan = resolve(name, config);
    cinn::PlanOverrides o;
    o.replications = reps;
    o.seed = seed;
    o.iterations = iterations;
    o.workers = workers;
    if (!out_dir.empty()) o.output_dir = out_dir;
    if (!solver.empty()) o.solver = cinn::parse_solver(solver);
    cinn::apply_overrides(plan, o);
    if (plan.output_dir.empty()) plan.output_dir = "out/" + plan.name;

    const cinn::ExperimentResult result = cinn::run_experiment(plan);
    cinn::emit_outputs(result, plan.output_dir, !no_timing);
    std::cout << cinn::format_summary(result);
    std::cout << fmt::format("wrote {} runs to {}\n", result.runs.size(), plan.output_dir);
    for (const cinn::RunResult& r : result.runs) {
      if (!r.ok) std::cerr << fmt::format("run {} replication {} aborted: {}\n", r.arm, r.replication, r.diagnostic);
    }
    return result.any_aborted() ? 1 : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
