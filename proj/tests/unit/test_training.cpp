#include "cinn/baselines.hpp"
#include "cinn/characteristics.hpp"
#include "cinn/experiment.hpp"
#include "cinn/training.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace cinn;

namespace {

// (theta - target)^2 with theta a 1x1 block.
class Quadratic final : public Objective {
 public:
  explicit Quadratic(double start, double target = 3.0) : theta_(start), target_(target) {}

  std::vector<ParamBlock> parameters() override { return {ParamBlock{&theta_, 1, 1}}; }
  std::vector<std::string> part_names() const override { return {"quadratic"}; }
  std::vector<ad::Mat> build(ad::MatrixTape& tape, std::span<const ad::Mat> params, std::size_t) const override {
    return {square(params[0] - tape.constant(target_))};
  }

  double theta() const { return theta_; }

 private:
  double theta_;
  double target_;
};

}  // namespace

TEST_CASE("adam_step") {
  TrainConfig cfg;
  {
    std::vector<double> p = {0.5, -2.0};
    const std::vector<double> g = {0.0, 0.0};
    AdamState s(2);
    adam_step(p, g, s, cfg);
    CHECK(p == std::vector<double>{0.5, -2.0});
    CHECK(s.step == 1);
  }
  {
    std::vector<double> p = {0.0};
    const std::vector<double> g = {1.0};
    AdamState s(1);
    adam_step(p, g, s, cfg);
    // mpmath: -0.001 / (1 + 1e-8).
    CHECK(std::abs(p[0] - -0.0009999999900000001) < 1e-15 * 1e-3);
  }
  {
    std::vector<double> p = {1.0, 1.0};
    const std::vector<double> g = {0.3, 0.3};
    AdamState s(2);
    for (int i = 0; i < 5; ++i) adam_step(p, g, s, cfg);
    CHECK(p[0] == p[1]);
  }
  std::vector<double> p = {0.0, 1.0};
  const std::vector<double> g = {1.0};
  AdamState s(2);
  CHECK_THROWS_AS(adam_step(p, g, s, cfg), std::invalid_argument);
  AdamState wrong(3);
  const std::vector<double> g2 = {1.0, 1.0};
  CHECK_THROWS_AS(adam_step(p, g2, wrong, cfg), std::invalid_argument);
}

TEST_CASE("TrainConfig::validate") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.iterations = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("quadratic toy converges") {
  Quadratic q(0.0);
  TrainConfig cfg;
  cfg.iterations = 10000;
  cfg.log_every = 1000;
  const TrainResult r = train(q, cfg);
  CHECK(r.ok);
  CHECK(std::abs(q.theta() - 3.0) < 1e-3);
  CHECK(r.iterations_completed == 10000);
  CHECK(r.history.records.front().iteration == 0);
  CHECK(r.history.records.back().iteration == 10000);
  CHECK(r.history.records.size() == 11);
  for (std::size_t i = 1; i < r.history.records.size(); ++i) {
    CHECK(r.history.records[i].iteration > r.history.records[i - 1].iteration);
  }
  CHECK(r.history.records.front().total == 9.0);
}

TEST_CASE("zero iterations leave the parameters untouched") {
  Quadratic q(1.25);
  TrainConfig cfg;
  cfg.iterations = 0;
  const TrainResult r = train(q, cfg);
  CHECK(r.ok);
  CHECK(q.theta() == 1.25);
  CHECK(r.history.records.size() == 1);
  CHECK(r.final_loss == 1.75 * 1.75);
}

TEST_CASE("training is deterministic") {
  ExperimentConfig cfg = builtin_experiment("forward-advection").arms[1];
  cfg.train.iterations = 30;
  cfg.train.log_every = 10;
  auto history = [&] {
    auto obj = make_objective(cfg, 5);
    const TrainResult r = train(*obj, cfg.train);
    std::ostringstream csv;
    for (const HistoryRecord& rec : r.history.records) {
      csv << rec.iteration;
      for (double p : rec.parts) csv << ',' << std::hexfloat << p;
      csv << '\n';
    }
    return csv.str();
  };
  CHECK(history() == history());
}

TEST_CASE("non-finite loss aborts with a diagnostic") {
  const Points pts(Eigen::RowVectorXd::LinSpaced(4, 0.0, 1.0), Eigen::RowVectorXd::Zero(4));
  Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(1, 4);
  targets(0, 2) = std::numeric_limits<double>::quiet_NaN();
  FieldObjective obj(std::make_unique<PlainNetwork>(glorot_init(mlp_dims(2, 2, 5, 1), 1)),
                     DataTerm{pts, targets, {0}}, std::nullopt, std::nullopt);
  TrainConfig cfg;
  cfg.iterations = 10;
  const TrainResult r = train(obj, cfg);
  CHECK_FALSE(r.ok);
  CHECK_FALSE(r.diagnostic.empty());
  CHECK(r.iterations_completed == 0);

  Quadratic q(1e200);
  const TrainResult big = train(q, cfg);
  CHECK_FALSE(big.ok);
  CHECK(q.theta() == 1e200);
}

TEST_CASE("history CSV") {
  Quadratic q(0.0);
  TrainConfig cfg;
  cfg.iterations = 4;
  cfg.log_every = 2;
  const TrainResult r = train(q, cfg);
  CHECK(r.history.csv_header() == "iteration,quadratic,total,velocity,elapsed_sec");
  std::ostringstream out;
  r.history.write_csv(out);
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 4);
  CHECK(out.str().rfind("iteration,", 0) == 0);
  CHECK(out.str().find("\n0,9,9,,") != std::string::npos);
}

TEST_CASE("lp_error") {
  const std::vector<double> exact = {1.0, -2.0, 0.5, 3.0};
  std::vector<double> scaled;
  for (double e : exact) scaled.push_back(1.1 * e);
  const std::vector<double> zero(4, 0.0);
  for (int p : {1, 2}) {
    CHECK(lp_error(exact, exact, p).value() == 0.0);
    CHECK(lp_error(zero, exact, p).value() == 1.0);
    CHECK(std::abs(lp_error(scaled, exact, p).value() - 0.1) < 1e-15);
    CHECK_FALSE(lp_error(exact, zero, p).has_value());
    // Scaling model and oracle together leaves the ratio unchanged.
    for (double c : {-3.0, 0.25, 1e5}) {
      std::vector<double> a, b;
      for (std::size_t i = 0; i < exact.size(); ++i) {
        a.push_back(c * scaled[i]);
        b.push_back(c * exact[i]);
      }
      CHECK(std::abs(lp_error(a, b, p).value() - lp_error(scaled, exact, p).value()) < 1e-14);
    }
  }
  CHECK(lp_error(std::vector<double>{2.0, 0.0}, std::vector<double>{1.0, 1.0}, 1).value() == 1.0);
  CHECK(std::abs(lp_error(std::vector<double>{2.0, 0.0}, std::vector<double>{1.0, 1.0}, 2).value() - 1.0) < 1e-15);
  CHECK_THROWS_AS(lp_error(exact, exact, 3), std::invalid_argument);
  CHECK_THROWS_AS(lp_error(std::vector<double>{}, std::vector<double>{}, 2), std::invalid_argument);
  CHECK_THROWS_AS(lp_error(exact, std::vector<double>{1.0, 2.0}, 2), std::invalid_argument);
}

TEST_CASE("lp_error of a model against an oracle") {
  const ProblemSpec acoustics = default_problem(ProblemKind::acoustics);
  const AcousticsDecomposition d = acoustics_decomposition(1.0, 1.0);
  const std::vector<int> dims = {1, 3, 1};
  SystemCinn zero(SystemHead(d.eigenvalues, d.recombiner, {zero_init(dims), zero_init(dims)}));
  const auto errors = lp_error(zero, ExactOracle(acoustics), test_grid(acoustics), 2);
  REQUIRE(errors.size() == 2);
  CHECK(errors[0].value() == 1.0);
  CHECK(errors[1].value() == 1.0);

  ProblemSpec periodic = default_problem(ProblemKind::periodic_advection);
  const Points grid = test_grid(periodic);
  AdvectionCinn z(AdvectionHead({20.0}), zero_init(dims));
  CHECK(lp_error(z, ExactOracle(periodic), grid, 1)[0].value() == 1.0);
}

TEST_CASE("advection CINN residual stays zero at every logged iteration") {
  ExperimentConfig cfg = builtin_experiment("forward-advection").arms[2];
  REQUIRE(cfg.solver == Solver::cinn);
  cfg.train.iterations = 200;
  cfg.train.log_every = 20;
  auto obj = make_objective(cfg, 3);
  const Points probe = random_interior(cfg.problem, 1000, 99);
  int checks = 0;
  const TrainResult r = train(*obj, cfg.train, [&](const HistoryRecord&) {
    const double v = obj->model().velocity().value();
    CHECK(advection_residual_values(obj->model(), probe, v).cwiseAbs().maxCoeff() < 1e-7);
    ++checks;
  });
  CHECK(r.ok);
  CHECK(checks == 11);
}
