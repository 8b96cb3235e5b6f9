#pragma once

// YAML experiment files.
//
//   experiment: forward-advection   # built-in base, optional
//   workers: 4
//   output_dir: out/forward
//   replications: 10                # top-level arm fields apply to every arm
//   seed: 1
//   problem: {coefficients: {v: 1}}
//   arms:                           # optional; replaces the arm list
//     - label: cinn
//       solver: cinn
//       model: {hidden_layers: 8, width: 20}
//
// An arm whose label matches a built-in arm starts from it, any other arm
// starts from the first base arm. Setting problem.kind resets the problem to
// that kind's defaults before the remaining problem fields apply.

#include "cinn/experiment.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace cinn {

/// Throws std::invalid_argument on malformed input or unknown keys.
ExperimentPlan plan_from_yaml(const std::string& text, std::string_view experiment_name = {});
ExperimentPlan load_plan(const std::filesystem::path& path, std::string_view experiment_name = {});

/// Every arm spelled out in full; plan_from_yaml(plan_to_yaml(p)) reproduces p.
std::string plan_to_yaml(const ExperimentPlan& plan);

struct PlanOverrides {
  std::optional<int> replications;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<Solver> solver;  // keeps only arms of this solver
  std::optional<int> iterations;
  std::optional<int> workers;
};

/// Throws std::invalid_argument if the solver filter leaves no arms.
void apply_overrides(ExperimentPlan& plan, const PlanOverrides& overrides);

}  // namespace cinn
