#pragma once

// ADAM, the full-batch training loop and Lp error metrics.

#include "cinn/field_model.hpp"
#include "cinn/matrix_tape.hpp"
#include "cinn/network.hpp"
#include "cinn/problems.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace cinn {

struct TrainConfig {
  double learning_rate = 1e-3;
  int iterations = 1000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;  // recorded only: training is deterministic given its initial state
  int log_every = 100;  // <= 0: log only the first and last iteration

  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// Bias-corrected ADAM update in place. Throws std::invalid_argument when
/// params, grads and state sizes disagree.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const TrainConfig& config);

/// A scalar loss assembled from named parts over the parameters it exposes.
///
/// Every part is a sum over points, so an objective may split its point sets
/// into chunks: build(k) returns the contribution of chunk k to each part and
/// the contributions add up to the full parts.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::vector<ParamBlock> parameters() = 0;
  virtual std::vector<std::string> part_names() const = 0;
  virtual std::size_t chunks() const { return 1; }
  /// One node per part; `params` has one node per parameter block.
  virtual std::vector<ad::Mat> build(ad::MatrixTape& tape, std::span<const ad::Mat> params, std::size_t chunk) const = 0;
  /// Current advection velocity estimate, when the objective carries one.
  virtual std::optional<double> velocity() const { return std::nullopt; }
};

struct ObjectiveValue {
  std::vector<double> parts;
  double total = 0.0;
  std::vector<double> gradient;  // flattened over blocks, column-major within each
};

/// Loss parts, total and (optionally) gradient at the current parameters.
ObjectiveValue evaluate_objective(Objective& objective, ad::MatrixTape& tape, bool with_gradient = true);

struct HistoryRecord {
  int iteration = 0;
  std::vector<double> parts;
  double total = 0.0;
  std::optional<double> velocity;
  double elapsed_sec = 0.0;
};

struct TrainHistory {
  std::vector<std::string> part_names;
  std::vector<HistoryRecord> records;

  /// iteration,<part...>,total,velocity,elapsed_sec
  std::string csv_header() const;
  /// Without timing the elapsed_sec column is left empty.
  void write_csv(std::ostream& out, bool include_timing = true) const;
};

struct TrainResult {
  TrainHistory history;
  bool ok = true;
  std::string diagnostic;
  int iterations_completed = 0;
  double wall_time_sec = 0.0;
  double final_loss = 0.0;
};

/// Called at every logged iteration with the parameters of that iteration.
using TrainObserver = std::function<void(const HistoryRecord&)>;

/// Runs `config.iterations` full-batch ADAM steps on the objective's
/// parameters in place. A non-finite loss or gradient stops the run with
/// ok = false; parameters then hold the last finite state.
TrainResult train(Objective& objective, const TrainConfig& config, const TrainObserver& observer = {});

/// (sum |a - b|^p)^(1/p) / (sum |b|^p)^(1/p). Returns nullopt when the
/// denominator vanishes. Throws for p not in {1, 2} or empty/mismatched input.
std::optional<double> lp_error(std::span<const double> predicted, std::span<const double> exact, int p);

/// Per-field Lp errors of a model against an oracle on a point set.
std::vector<std::optional<double>> lp_error(const FieldModel& model, const ExactOracle& oracle, const Points& points,
                                            int p);

}  // namespace cinn
