#include "cinn/experiment.hpp"

#include "cinn/baselines.hpp"
#include "cinn/characteristics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

namespace cinn {

std::string to_string(Solver solver) {
  switch (solver) {
    case Solver::cinn: return "cinn";
    case Solver::pinn: return "pinn";
    case Solver::nn: return "nn";
  }
  return "?";
}

Solver parse_solver(std::string_view name) {
  if (name == "cinn") return Solver::cinn;
  if (name == "pinn") return Solver::pinn;
  if (name == "nn") return Solver::nn;
  throw std::invalid_argument("unknown solver '" + std::string(name) + "' (expected cinn, pinn or nn)");
}

void ExperimentConfig::validate() const {
  auto fail = [&](const std::string& msg) { throw std::invalid_argument("arm '" + label + "': " + msg); };
  if (label.empty()) throw std::invalid_argument("arm label must not be empty");
  if (replications < 1) fail("replications must be >= 1");
  if (model.hidden_layers < 0) fail("hidden_layers must be >= 0");
  if (model.width < 1) fail("width must be >= 1");
  if (batch_columns < 1) fail("batch_columns must be >= 1");
  try {
    problem.validate();
    train.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (problem.kind == ProblemKind::inverse_advection) {
    if (solver == Solver::nn) fail("the nn solver has no velocity to estimate");
    if (!(model.velocity_init_max >= model.velocity_init_min)) fail("velocity_init range is empty");
  }
  if (solver == Solver::pinn && problem.sampling.collocation < 1) fail("pinn needs collocation >= 1");
}

void ExperimentPlan::validate() const {
  if (arms.empty()) throw std::invalid_argument("experiment '" + name + "' has no arms");
  std::set<std::string> labels;
  for (const ExperimentConfig& arm : arms) {
    arm.validate();
    if (!labels.insert(arm.label).second) throw std::invalid_argument("duplicate arm label '" + arm.label + "'");
  }
  if (workers < 0) throw std::invalid_argument("workers must be >= 0");
}

// ---- built-in experiments ----

namespace {

ExperimentConfig arm(std::string label, ProblemKind kind, Solver solver, int layers, int width, int iterations,
                     int replications) {
  ExperimentConfig c;
  c.label = std::move(label);
  c.problem = default_problem(kind);
  c.solver = solver;
  c.model.hidden_layers = layers;
  c.model.width = width;
  c.train.iterations = iterations;
  c.replications = replications;
  return c;
}

constexpr int kInverseIterations = 5000;

}  // namespace

std::vector<ExperimentPlan> builtin_experiments() {
  std::vector<ExperimentPlan> plans;

  ExperimentPlan forward{"forward-advection", "Riemann step transported at v = 1: NN vs PINN vs CINN", {}, 0, ""};
  for (Solver s : {Solver::nn, Solver::pinn, Solver::cinn}) {
    forward.arms.push_back(arm(to_string(s), ProblemKind::riemann_advection, s, 8, 20, 1000, 10));
  }
  plans.push_back(std::move(forward));

  ExperimentPlan inverse{"inverse-advection", "velocity estimated from noisy interior samples", {}, 0, ""};
  for (Solver s : {Solver::cinn, Solver::pinn}) {
    for (auto [tag, sigma] : {std::pair{"low-noise", 0.01}, std::pair{"high-noise", 0.05}}) {
      ExperimentConfig c =
          arm(to_string(s) + "-" + tag, ProblemKind::inverse_advection, s, 8, 20, kInverseIterations, 100);
      c.problem.coefficients.noise_sigma = sigma;
      inverse.arms.push_back(std::move(c));
    }
  }
  plans.push_back(std::move(inverse));

  ExperimentPlan periodic{"periodic-advection", "sin(x) transported with periodic penalty, v in {20, 30, 40, 50}", {},
                          0, ""};
  for (Solver s : {Solver::cinn, Solver::pinn}) {
    for (int v : {20, 30, 40, 50}) {
      ExperimentConfig c =
          arm(to_string(s) + "-v" + std::to_string(v), ProblemKind::periodic_advection, s, 4, 50, 20000, 10);
      c.problem.coefficients.v = v;
      c.train.log_every = 500;
      periodic.arms.push_back(std::move(c));
    }
  }
  plans.push_back(std::move(periodic));

  ExperimentPlan acoustics{"acoustics", "pressure recovered from velocity samples only", {}, 0, ""};
  acoustics.arms.push_back(arm("cinn-1000", ProblemKind::acoustics, Solver::cinn, 8, 20, 1000, 10));
  for (int its : {1000, 3000, 5000}) {
    acoustics.arms.push_back(
        arm("pinn-" + std::to_string(its), ProblemKind::acoustics, Solver::pinn, 8, 40, its, 10));
  }
  plans.push_back(std::move(acoustics));

  return plans;
}

ExperimentPlan builtin_experiment(std::string_view name) {
  for (ExperimentPlan& p : builtin_experiments()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

// ---- objective ----

FieldObjective::FieldObjective(std::unique_ptr<FieldModel> model, std::optional<DataTerm> data,
                               std::optional<PenaltyTerm> penalty, std::optional<ResidualTerm> residual,
                               int batch_columns, bool report_model_velocity)
    : model_(std::move(model)),
      data_(std::move(data)),
      penalty_(std::move(penalty)),
      residual_(std::move(residual)),
      report_model_velocity_(report_model_velocity) {
  if (!model_) throw std::invalid_argument("FieldObjective: no model");
  if (!data_ && !penalty_ && !residual_) throw std::invalid_argument("FieldObjective: no loss terms");
  if (batch_columns < 1) throw std::invalid_argument("FieldObjective: batch_columns must be >= 1");
  Eigen::Index cost = 0;
  if (data_) {
    if (data_->points.empty()) throw std::invalid_argument("FieldObjective: empty data set");
    if (data_->targets.cols() != data_->points.size() ||
        data_->targets.rows() != static_cast<Eigen::Index>(data_->outputs.size())) {
      throw std::invalid_argument("FieldObjective: data targets do not match points/outputs");
    }
    for (int r : data_->outputs) {
      if (r < 0 || r >= model_->outputs()) throw std::invalid_argument("FieldObjective: data output row out of range");
    }
    cost += data_->points.size();
  }
  if (penalty_) {
    if (penalty_->times.size() == 0) throw std::invalid_argument("periodic_penalty: empty time set");
    cost += 2 * penalty_->times.size();
  }
  if (residual_) {
    if (residual_->points.empty()) throw std::invalid_argument("residual_loss: empty collocation set");
    const bool acoustics = residual_->kind == ResidualTerm::Kind::acoustics;
    if (model_->outputs() != (acoustics ? 2 : 1)) throw std::invalid_argument("FieldObjective: residual/model mismatch");
    cost += (acoustics ? 4 : 2) * residual_->points.size();
    velocity_ = residual_->velocity;
  }
  chunks_ = static_cast<std::size_t>(std::max<Eigen::Index>(1, (cost + batch_columns - 1) / batch_columns));
}

std::vector<ParamBlock> FieldObjective::parameters() {
  std::vector<ParamBlock> blocks;
  model_->append_blocks(blocks);
  if (residual_ && residual_->trainable_velocity) blocks.push_back(ParamBlock{&velocity_, 1, 1});
  return blocks;
}

std::vector<std::string> FieldObjective::part_names() const {
  std::vector<std::string> names;
  if (data_) names.emplace_back("data");
  if (penalty_) names.emplace_back("penalty");
  if (residual_) names.emplace_back("residual");
  return names;
}

std::optional<double> FieldObjective::velocity() const {
  if (residual_ && residual_->trainable_velocity) return velocity_;
  if (report_model_velocity_) return model_->velocity();
  return std::nullopt;
}

std::vector<ad::Mat> FieldObjective::build(ad::MatrixTape& tape, std::span<const ad::Mat> params,
                                           std::size_t chunk) const {
  if (chunk >= chunks_) throw std::out_of_range("FieldObjective: chunk index out of range");
  const std::span<const ad::Mat> model_params = params.first(model_->block_count());
  std::vector<ad::Mat> parts;

  if (data_) {
    const Eigen::Index n = data_->points.size();
    const ChunkRange r = chunk_range(n, chunk, chunks_);
    if (r.count == 0) {
      parts.push_back(tape.constant(0.0));
    } else {
      ad::Mat u = model_->evaluate(tape, model_params, data_->points.slice(r.begin, r.count));
      const bool identity = static_cast<int>(data_->outputs.size()) == model_->outputs() &&
                            std::is_sorted(data_->outputs.begin(), data_->outputs.end());
      if (!identity) {
        ad::Mat sel = tape.row(u, data_->outputs[0]);
        for (std::size_t i = 1; i < data_->outputs.size(); ++i) sel = concat_rows(sel, tape.row(u, data_->outputs[i]));
        u = sel;
      }
      parts.push_back(mse_loss(u, data_->targets.middleCols(r.begin, r.count), std::nullopt, n));
    }
  }

  if (penalty_) {
    const Eigen::Index n = penalty_->times.size();
    const ChunkRange r = chunk_range(n, chunk, chunks_);
    parts.push_back(r.count == 0 ? tape.constant(0.0)
                                 : periodic_penalty(*model_, tape, model_params, penalty_->times.segment(r.begin, r.count),
                                                    penalty_->x_left, penalty_->x_right, n));
  }

  if (residual_) {
    const Eigen::Index n = residual_->points.size();
    const ChunkRange r = chunk_range(n, chunk, chunks_);
    if (r.count == 0) {
      parts.push_back(tape.constant(0.0));
    } else {
      const Points pts = residual_->points.slice(r.begin, r.count);
      if (residual_->kind == ResidualTerm::Kind::advection) {
        ad::Mat v = residual_->trainable_velocity ? params[model_->block_count()] : tape.constant(residual_->velocity);
        const ad::Mat res[1] = {advection_residual(*model_, tape, model_params, pts, v)};
        parts.push_back(residual_loss(res, n));
      } else {
        auto [r1, r2] = acoustics_residuals(*model_, tape, model_params, pts, residual_->K0, residual_->c0);
        const ad::Mat res[2] = {r1, r2};
        parts.push_back(residual_loss(res, n));
      }
    }
  }
  return parts;
}

std::unique_ptr<FieldObjective> make_objective(const ExperimentConfig& config, std::uint64_t replication_seed) {
  const ProblemSpec& P = config.problem;
  const Coefficients& c = P.coefficients;
  const SeedStreams seeds = split_seed(replication_seed);
  const int fields = P.fields();
  const bool inverse = P.kind == ProblemKind::inverse_advection;

  double velocity_guess = c.v;
  if (inverse) {
    std::mt19937_64 rng(seeds.velocity);
    const double lo = config.model.velocity_init_min;
    const double hi = config.model.velocity_init_max;
    velocity_guess = hi > lo ? std::uniform_real_distribution<double>(lo, hi)(rng) : lo;
  }

  std::unique_ptr<FieldModel> model;
  const int L = config.model.hidden_layers;
  const int W = config.model.width;
  if (config.solver == Solver::cinn) {
    if (P.kind == ProblemKind::acoustics) {
      const AcousticsDecomposition d = acoustics_decomposition(c.K0, c.c0);
      const std::vector<int> dims = mlp_dims(1, L, W, 1);
      std::vector<ParamSet> branches;
      for (std::uint64_t i = 0; i < 2; ++i) branches.push_back(glorot_init(dims, derive_seed(seeds.init, i)));
      model = std::make_unique<SystemCinn>(SystemHead(d.eigenvalues, d.recombiner, std::move(branches)));
    } else {
      model = std::make_unique<AdvectionCinn>(AdvectionHead({velocity_guess}, inverse),
                                              glorot_init(mlp_dims(1, L, W, 1), seeds.init));
    }
  } else {
    model = std::make_unique<PlainNetwork>(glorot_init(mlp_dims(2, L, W, fields), seeds.init));
  }

  std::optional<DataTerm> data;
  auto take = [](const Dataset& d, std::vector<int> outputs) {
    return DataTerm{points_of(d), d.targets, std::move(outputs)};
  };
  switch (P.kind) {
    case ProblemKind::riemann_advection:
      data = take(concat(sample_initial_boundary(P), sample_lateral_boundaries(P)), {0});
      break;
    case ProblemKind::periodic_advection:
      data = take(sample_initial_boundary(P), {0});
      break;
    case ProblemKind::inverse_advection:
    case ProblemKind::acoustics: {
      Dataset d = add_noise(sample_interior_data(P, derive_seed(seeds.sampling, 1)), c.noise_sigma, seeds.noise);
      data = take(d, P.observed_fields());
      break;
    }
  }

  std::optional<PenaltyTerm> penalty;
  if (P.kind == ProblemKind::periodic_advection) {
    penalty = PenaltyTerm{sample_penalty_times(P, derive_seed(seeds.sampling, 2)), P.domain.x_min, P.domain.x_max};
  }

  std::optional<ResidualTerm> residual;
  if (config.solver == Solver::pinn) {
    ResidualTerm r;
    r.kind = P.kind == ProblemKind::acoustics ? ResidualTerm::Kind::acoustics : ResidualTerm::Kind::advection;
    r.points = sample_collocation(P, derive_seed(seeds.sampling, 3));
    r.velocity = velocity_guess;
    r.trainable_velocity = inverse;
    r.K0 = c.K0;
    r.c0 = c.c0;
    residual = std::move(r);
  }

  const bool report = inverse && config.solver == Solver::cinn;
  return std::make_unique<FieldObjective>(std::move(model), std::move(data), std::move(penalty), std::move(residual),
                                          config.batch_columns, report);
}

// ---- execution ----

Stat describe(std::span<const double> values) {
  Stat s;
  s.n = static_cast<int>(values.size());
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

bool ExperimentResult::any_aborted() const {
  return std::any_of(runs.begin(), runs.end(), [](const RunResult& r) { return !r.ok; });
}

RunResult run_replication(const ExperimentConfig& config, int replication) {
  RunResult r;
  r.arm = config.label;
  r.solver = config.solver;
  r.replication = replication;
  r.seed = replication_seed(config.seed, static_cast<std::uint64_t>(replication));
  try {
    std::unique_ptr<FieldObjective> objective = make_objective(config, r.seed);
    TrainResult tr = train(*objective, config.train);
    r.ok = tr.ok;
    r.diagnostic = tr.diagnostic;
    r.runtime_sec = tr.wall_time_sec;
    r.history = std::move(tr.history);
    r.metrics["final_loss"] = tr.final_loss;

    const ProblemSpec& P = config.problem;
    FieldModel& model = objective->model();
    const ExactOracle oracle(P);
    r.field_names = P.fields() == 2 ? std::vector<std::string>{"p", "v"} : std::vector<std::string>{"u"};
    r.field_points = test_grid(P);
    r.field_predicted = model.predict(r.field_points);
    r.field_exact = oracle(r.field_points);
    for (int p : {1, 2}) {
      const auto errs = lp_error(model, oracle, r.field_points, p);
      for (std::size_t f = 0; f < errs.size(); ++f) r.metrics["l" + std::to_string(p) + "_" + r.field_names[f]] = errs[f];
    }
    const std::optional<double> v = objective->velocity();
    if (v) r.metrics["velocity"] = *v;

    const Points probe = random_interior(P, 1000, derive_seed(split_seed(r.seed).sampling, 4));
    const Eigen::MatrixXd res = P.kind == ProblemKind::acoustics
                                    ? acoustics_residual_values(model, probe, P.coefficients.K0, P.coefficients.c0)
                                    : advection_residual_values(model, probe, v.value_or(P.coefficients.v));
    r.metrics["max_residual"] = res.cwiseAbs().maxCoeff();
  } catch (const std::exception& e) {
    r.ok = false;
    r.diagnostic = e.what();
  }
  return r;
}

std::vector<ArmSummary> summarize(const std::vector<ExperimentConfig>& arms, const std::vector<RunResult>& runs) {
  std::vector<ArmSummary> out;
  for (const ExperimentConfig& a : arms) {
    ArmSummary s;
    s.label = a.label;
    s.solver = a.solver;
    std::map<std::string, std::vector<double>> values;
    std::vector<double> times;
    for (const RunResult& r : runs) {
      if (r.arm != a.label) continue;
      if (!r.ok) {
        ++s.aborted;
        continue;
      }
      ++s.completed;
      times.push_back(r.runtime_sec);
      for (const auto& [name, value] : r.metrics) {
        auto& bucket = values[name];
        if (value && std::isfinite(*value)) bucket.push_back(*value);
      }
    }
    for (const auto& [name, vs] : values) s.metrics[name] = describe(vs);
    s.runtime_sec = describe(times);
    out.push_back(std::move(s));
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  ExperimentResult result;
  result.name = plan.name;
  result.arms = plan.arms;

  std::vector<std::pair<std::size_t, int>> jobs;
  for (std::size_t a = 0; a < plan.arms.size(); ++a) {
    for (int k = 0; k < plan.arms[a].replications; ++k) jobs.emplace_back(a, k);
  }
  result.runs.resize(jobs.size());

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(plan.workers > 0 ? static_cast<std::size_t>(plan.workers) : hw, jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      result.runs[j] = run_replication(plan.arms[jobs[j].first], jobs[j].second);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  result.summary = summarize(result.arms, result.runs);
  return result;
}

}  // namespace cinn
