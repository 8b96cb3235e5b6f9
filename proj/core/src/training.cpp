#include "cinn/training.hpp"

#include "cinn/baselines.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace cinn {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning_rate must be positive");
  if (iterations < 0) throw std::invalid_argument("train: iterations must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("train: betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("train: epsilon must be positive");
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const TrainConfig& config) {
  if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("adam_step: size mismatch (params " + std::to_string(params.size()) + ", grads " +
                                std::to_string(grads.size()) + ", state " + std::to_string(state.m.size()) + ")");
  }
  ++state.step;
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
  }
}

namespace {

std::size_t total_size(std::span<const ParamBlock> blocks) {
  std::size_t n = 0;
  for (const ParamBlock& b : blocks) n += static_cast<std::size_t>(b.size());
  return n;
}

void gather(std::span<const ParamBlock> blocks, std::vector<double>& flat) {
  flat.clear();
  for (const ParamBlock& b : blocks) flat.insert(flat.end(), b.data, b.data + b.size());
}

void scatter(std::span<const ParamBlock> blocks, std::span<const double> flat) {
  std::size_t k = 0;
  for (const ParamBlock& b : blocks) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(k), flat.begin() + static_cast<std::ptrdiff_t>(k + b.size()),
              b.data);
    k += static_cast<std::size_t>(b.size());
  }
}

bool all_finite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

ObjectiveValue evaluate_objective(Objective& objective, ad::MatrixTape& tape, bool with_gradient) {
  const std::vector<ParamBlock> blocks = objective.parameters();
  const std::size_t nparts = objective.part_names().size();
  const std::size_t chunks = std::max<std::size_t>(1, objective.chunks());
  ObjectiveValue out;
  out.parts.assign(nparts, 0.0);
  if (with_gradient) out.gradient.assign(total_size(blocks), 0.0);
  std::vector<double> chunk_grad(with_gradient ? out.gradient.size() : 0);
  for (std::size_t k = 0; k < chunks; ++k) {
    tape.reset();
    std::vector<ad::Mat> nodes = record_blocks(tape, blocks, with_gradient);
    std::vector<ad::Mat> parts = objective.build(tape, nodes, k);
    if (parts.size() != nparts) throw std::logic_error("objective returned the wrong number of loss parts");
    for (std::size_t i = 0; i < nparts; ++i) out.parts[i] += parts[i].value()(0, 0);
    if (with_gradient) {
      tape.backward(total_loss(parts));
      gather_gradient(tape, nodes, chunk_grad);
      for (std::size_t i = 0; i < chunk_grad.size(); ++i) out.gradient[i] += chunk_grad[i];
    }
  }
  for (double p : out.parts) out.total += p;
  return out;
}

std::string TrainHistory::csv_header() const {
  std::string h = "iteration";
  for (const std::string& p : part_names) h += "," + p;
  h += ",total,velocity,elapsed_sec";
  return h;
}

void TrainHistory::write_csv(std::ostream& out, bool include_timing) const {
  out << csv_header() << '\n';
  for (const HistoryRecord& r : records) {
    std::string line = fmt::format("{}", r.iteration);
    for (double p : r.parts) line += fmt::format(",{:.17g}", p);
    line += fmt::format(",{:.17g},", r.total);
    if (r.velocity) line += fmt::format("{:.17g}", *r.velocity);
    line += include_timing ? fmt::format(",{:.17g}\n", r.elapsed_sec) : std::string(",\n");
    out << line;
  }
}

TrainResult train(Objective& objective, const TrainConfig& config, const TrainObserver& observer) {
  config.validate();
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  TrainResult result;
  result.history.part_names = objective.part_names();
  const std::vector<ParamBlock> blocks = objective.parameters();
  AdamState state(total_size(blocks));
  ad::MatrixTape tape;
  std::vector<double> flat;

  auto log = [&](int iteration, const ObjectiveValue& value) {
    HistoryRecord rec{iteration, value.parts, value.total, objective.velocity(), elapsed()};
    if (observer) observer(rec);
    result.history.records.push_back(std::move(rec));
  };

  for (int it = 0; it < config.iterations; ++it) {
    ObjectiveValue value = evaluate_objective(objective, tape, true);
    const bool finite = std::isfinite(value.total) && all_finite(value.gradient);
    const bool logged = it == 0 || (config.log_every > 0 && it % config.log_every == 0);
    if (logged || !finite) log(it, value);
    if (!finite) {
      result.ok = false;
      result.diagnostic = fmt::format("non-finite {} at iteration {}", std::isfinite(value.total) ? "gradient" : "loss", it);
      result.final_loss = value.total;
      result.wall_time_sec = elapsed();
      return result;
    }
    gather(blocks, flat);
    adam_step(flat, value.gradient, state, config);
    scatter(blocks, flat);
    result.iterations_completed = it + 1;
  }

  ObjectiveValue last = evaluate_objective(objective, tape, false);
  log(config.iterations, last);
  result.final_loss = last.total;
  if (!std::isfinite(last.total)) {
    result.ok = false;
    result.diagnostic = fmt::format("non-finite loss at iteration {}", config.iterations);
  }
  result.wall_time_sec = elapsed();
  return result;
}

std::optional<double> lp_error(std::span<const double> predicted, std::span<const double> exact, int p) {
  if (p != 1 && p != 2) throw std::invalid_argument("lp_error: p must be 1 or 2");
  if (exact.empty()) throw std::invalid_argument("lp_error: no test points");
  if (predicted.size() != exact.size()) throw std::invalid_argument("lp_error: length mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double d = std::abs(predicted[i] - exact[i]);
    const double e = std::abs(exact[i]);
    num += p == 1 ? d : d * d;
    den += p == 1 ? e : e * e;
  }
  if (!(den > 0.0)) return std::nullopt;
  return p == 1 ? num / den : std::sqrt(num) / std::sqrt(den);
}

std::vector<std::optional<double>> lp_error(const FieldModel& model, const ExactOracle& oracle, const Points& points,
                                            int p) {
  if (model.outputs() != oracle.fields()) throw std::invalid_argument("lp_error: model/oracle field count mismatch");
  const Eigen::MatrixXd pred = model.predict(points);
  const Eigen::MatrixXd exact = oracle(points);
  std::vector<std::optional<double>> out;
  for (Eigen::Index f = 0; f < exact.rows(); ++f) {
    const Eigen::RowVectorXd a = pred.row(f);
    const Eigen::RowVectorXd b = exact.row(f);
    out.push_back(lp_error(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                           std::span<const double>(b.data(), static_cast<std::size_t>(b.size())), p));
  }
  return out;
}

}  // namespace cinn
