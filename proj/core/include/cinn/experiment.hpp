#pragma once

// Experiment assembly and batch execution.
//
// An ExperimentPlan is a named list of arms; every arm is a complete
// ExperimentConfig (problem, solver, architecture, optimizer, replication
// count, master seed). run_experiment trains every replication of every arm on
// a worker pool and collects per-run metrics, histories and field dumps.

#include "cinn/field_model.hpp"
#include "cinn/problems.hpp"
#include "cinn/training.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cinn {

enum class Solver { cinn, pinn, nn };

std::string to_string(Solver solver);
Solver parse_solver(std::string_view name);

struct ModelSpec {
  int hidden_layers = 8;
  int width = 20;
  /// Range of the uniform initial velocity guess on inverse problems.
  double velocity_init_min = 0.0;
  double velocity_init_max = 2.0;
};

struct ExperimentConfig {
  std::string label;
  ProblemSpec problem;
  Solver solver = Solver::cinn;
  ModelSpec model;
  TrainConfig train;
  int replications = 10;
  std::uint64_t seed = 1;  // master seed; replication k uses seed + k
  /// Target number of network evaluations per tape; point sets are split
  /// into chunks of about this many columns.
  int batch_columns = 512;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct ExperimentPlan {
  std::string name;
  std::string description;
  std::vector<ExperimentConfig> arms;
  int workers = 0;  // 0: hardware concurrency
  std::string output_dir;

  void validate() const;
};

/// forward-advection, inverse-advection, periodic-advection, acoustics.
std::vector<ExperimentPlan> builtin_experiments();
/// Throws std::invalid_argument for an unknown name.
ExperimentPlan builtin_experiment(std::string_view name);

// ---- Objectives -------------------------------------------------------------

struct DataTerm {
  Points points;
  Eigen::MatrixXd targets;   // one row per observed field
  std::vector<int> outputs;  // model output row for each target row
};

struct PenaltyTerm {
  Eigen::RowVectorXd times;
  double x_left = 0.0;
  double x_right = 0.0;
};

struct ResidualTerm {
  enum class Kind { advection, acoustics };
  Kind kind = Kind::advection;
  Points points;
  double velocity = 1.0;  // initial value when trainable
  bool trainable_velocity = false;
  double K0 = 1.0;
  double c0 = 1.0;
};

/// Data misfit + periodic penalty + PDE residual, each optional, summed with
/// unit weights. Parts are named "data", "penalty" and "residual".
class FieldObjective final : public Objective {
 public:
  FieldObjective(std::unique_ptr<FieldModel> model, std::optional<DataTerm> data, std::optional<PenaltyTerm> penalty,
                 std::optional<ResidualTerm> residual, int batch_columns = 512, bool report_model_velocity = false);

  std::vector<ParamBlock> parameters() override;
  std::vector<std::string> part_names() const override;
  std::size_t chunks() const override { return chunks_; }
  std::vector<ad::Mat> build(ad::MatrixTape& tape, std::span<const ad::Mat> params, std::size_t chunk) const override;
  std::optional<double> velocity() const override;

  FieldModel& model() { return *model_; }
  const FieldModel& model() const { return *model_; }

 private:
  std::unique_ptr<FieldModel> model_;
  std::optional<DataTerm> data_;
  std::optional<PenaltyTerm> penalty_;
  std::optional<ResidualTerm> residual_;
  double velocity_ = 0.0;  // trainable residual velocity
  bool report_model_velocity_ = false;
  std::size_t chunks_ = 1;
};

/// Builds the model and objective for one replication, sampling every data
/// set from the replication's seed streams.
std::unique_ptr<FieldObjective> make_objective(const ExperimentConfig& config, std::uint64_t replication_seed);

// ---- Execution --------------------------------------------------------------

struct RunResult {
  std::string arm;
  Solver solver = Solver::cinn;
  int replication = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string diagnostic;
  /// l1_<field>, l2_<field>, velocity, max_residual, final_loss. Undefined
  /// metrics are stored as nullopt.
  std::map<std::string, std::optional<double>> metrics;
  double runtime_sec = 0.0;
  TrainHistory history;
  std::vector<std::string> field_names;
  Points field_points;
  Eigen::MatrixXd field_predicted;
  Eigen::MatrixXd field_exact;
};

struct Stat {
  double mean = 0.0;
  std::optional<double> std;  // n - 1 divisor; undefined for n < 2
  int n = 0;
};

/// mean and sample std; n = 0 gives mean 0.
Stat describe(std::span<const double> values);

struct ArmSummary {
  std::string label;
  Solver solver = Solver::cinn;
  int completed = 0;
  int aborted = 0;
  std::map<std::string, Stat> metrics;  // over completed runs
  Stat runtime_sec;
};

struct ExperimentResult {
  std::string name;
  std::vector<ExperimentConfig> arms;
  std::vector<RunResult> runs;  // arm-major, replication order
  std::vector<ArmSummary> summary;

  bool any_aborted() const;
};

/// One replication; never throws, failures land in RunResult::ok.
RunResult run_replication(const ExperimentConfig& config, int replication);

std::vector<ArmSummary> summarize(const std::vector<ExperimentConfig>& arms, const std::vector<RunResult>& runs);

/// Validates the whole plan first, then runs every replication.
ExperimentResult run_experiment(const ExperimentPlan& plan);

}  // namespace cinn
