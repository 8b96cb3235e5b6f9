#pragma once

// Result files.
//
// summary.json    one entry per arm (mean/std of every metric over completed
//                 runs) and one per run; wall-clock values live only under
//                 "timing" keys
// run_<k>.csv     training history of run k
// field_<k>.csv   x,t,<f>_pred,<f>_exact on the test grid for each field f
//
// k numbers runs arm by arm in replication order.

#include "cinn/experiment.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <ostream>
#include <string>

namespace cinn {

nlohmann::json config_json(const ExperimentConfig& config);
/// Without timing the document depends only on the plan.
nlohmann::json summary_json(const ExperimentResult& result, bool include_timing = true);

void write_field_csv(const RunResult& run, std::ostream& out);

/// Throws std::invalid_argument for a result without runs (nothing is
/// written) and std::runtime_error when a file cannot be written. Without
/// timing every file is a pure function of the plan.
void emit_outputs(const ExperimentResult& result, const std::filesystem::path& dir, bool include_timing = true);

/// Plain-text table: one row per arm, mean +- std per metric.
std::string format_summary(const ExperimentResult& result);

}  // namespace cinn
