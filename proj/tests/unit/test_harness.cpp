#include "cinn/config.hpp"
#include "cinn/experiment.hpp"
#include "cinn/outputs.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cinn;
namespace fs = std::filesystem;

namespace {

ExperimentPlan tiny(const std::string& name, int iterations, int reps = 1) {
  ExperimentPlan plan = builtin_experiment(name);
  PlanOverrides o;
  o.iterations = iterations;
  o.replications = reps;
  o.workers = 1;
  apply_overrides(plan, o);
  return plan;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cinn_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::size_t file_count(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(dir)) n += entry.is_regular_file() ? 1 : 0;
  return n;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("built-in experiments") {
  const auto all = builtin_experiments();
  REQUIRE(all.size() == 4);
  CHECK(all[0].name == "forward-advection");
  CHECK(all[1].name == "inverse-advection");
  CHECK(all[2].name == "periodic-advection");
  CHECK(all[3].name == "acoustics");
  for (const ExperimentPlan& p : all) CHECK_NOTHROW(p.validate());
  CHECK_THROWS_AS(builtin_experiment("heat"), std::invalid_argument);

  const ExperimentPlan fwd = builtin_experiment("forward-advection");
  REQUIRE(fwd.arms.size() == 3);
  for (const ExperimentConfig& arm : fwd.arms) {
    CHECK(arm.problem.coefficients.v == 1.0);
    CHECK(arm.problem.domain.horizon() == 0.8);
    CHECK(arm.problem.domain.length() == 2.0);
    CHECK(arm.replications == 10);
    CHECK(arm.train.iterations == 1000);
    CHECK(arm.model.hidden_layers == 8);
    CHECK(arm.model.width == 20);
  }

  const ExperimentPlan inv = builtin_experiment("inverse-advection");
  for (const ExperimentConfig& arm : inv.arms) {
    CHECK(arm.replications == 100);
    CHECK(arm.problem.sampling.interior_data == 300);
    CHECK(arm.model.velocity_init_min == 0.0);
    CHECK(arm.model.velocity_init_max == 2.0);
  }

  const ExperimentPlan per = builtin_experiment("periodic-advection");
  for (const ExperimentConfig& arm : per.arms) {
    CHECK(arm.model.hidden_layers == 4);
    CHECK(arm.model.width == 50);
    CHECK(arm.train.iterations == 20000);
    CHECK(arm.problem.sampling.initial == 200);
    CHECK(arm.problem.sampling.penalty_times == 1000);
    CHECK(arm.problem.sampling.collocation == 10000);
  }

  const ExperimentPlan ac = builtin_experiment("acoustics");
  for (const ExperimentConfig& arm : ac.arms) {
    CHECK(arm.problem.observed_fields() == std::vector<int>{1});
    CHECK(arm.problem.sampling.interior_data == 200);
    CHECK(arm.model.width == (arm.solver == Solver::cinn ? 20 : 40));
  }
  // Velocity-only targets reach the objective.
  auto obj = make_objective(ac.arms[0], 1);
  CHECK(obj->part_names() == std::vector<std::string>{"data"});
}

TEST_CASE("config validation") {
  ExperimentConfig cfg = builtin_experiment("forward-advection").arms[0];
  cfg.replications = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = builtin_experiment("inverse-advection").arms[0];
  cfg.solver = Solver::nn;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  ExperimentPlan plan = builtin_experiment("forward-advection");
  plan.arms[1].label = plan.arms[0].label;
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
  CHECK_THROWS_AS(run_experiment(plan), std::invalid_argument);
  CHECK(parse_solver("pinn") == Solver::pinn);
  CHECK_THROWS_AS(parse_solver("fem"), std::invalid_argument);
}

TEST_CASE("YAML plans") {
  for (const ExperimentPlan& p : builtin_experiments()) {
    const std::string text = plan_to_yaml(p);
    CHECK(plan_to_yaml(plan_from_yaml(text)) == text);
  }
  const ExperimentPlan p = plan_from_yaml(R"(
experiment: forward-advection
workers: 2
replications: 3
problem: {coefficients: {v: 0.5}}
train: {iterations: 7}
)");
  CHECK(p.workers == 2);
  for (const ExperimentConfig& arm : p.arms) {
    CHECK(arm.replications == 3);
    CHECK(arm.problem.coefficients.v == 0.5);
    CHECK(arm.train.iterations == 7);
  }
  const ExperimentPlan arms = plan_from_yaml(R"(
experiment: acoustics
arms:
  - label: pinn-1000
  - label: extra
    solver: cinn
    model: {width: 10}
)");
  REQUIRE(arms.arms.size() == 2);
  CHECK(arms.arms[0].model.width == 40);
  CHECK(arms.arms[1].model.width == 10);
  CHECK(arms.arms[1].problem.kind == ProblemKind::acoustics);

  const ExperimentPlan kind = plan_from_yaml("experiment: forward-advection\nproblem: {kind: periodic_advection}\n");
  CHECK(kind.arms[0].problem.domain.x_max == default_problem(ProblemKind::periodic_advection).domain.x_max);

  CHECK_THROWS_AS(plan_from_yaml("experiment: forward-advection\nbogus: 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(plan_from_yaml("experiment: forward-advection\ntrain: {learning_rat: 1}\n"), std::invalid_argument);
  CHECK_THROWS_AS(plan_from_yaml("experiment: nope\n"), std::invalid_argument);
  CHECK_THROWS_AS(plan_from_yaml("experiment: forward-advection\nreplications: -2\n"), std::invalid_argument);
  CHECK_THROWS_AS(plan_from_yaml("[unbalanced"), std::invalid_argument);
}

TEST_CASE("overrides") {
  ExperimentPlan plan = builtin_experiment("periodic-advection");
  PlanOverrides o;
  o.solver = Solver::pinn;
  o.seed = 42;
  o.output_dir = "somewhere";
  apply_overrides(plan, o);
  CHECK(plan.arms.size() == 4);
  for (const ExperimentConfig& arm : plan.arms) {
    CHECK(arm.solver == Solver::pinn);
    CHECK(arm.seed == 42);
  }
  CHECK(plan.output_dir == "somewhere");
  ExperimentPlan inv = builtin_experiment("inverse-advection");
  PlanOverrides nn;
  nn.solver = Solver::nn;
  CHECK_THROWS_AS(apply_overrides(inv, nn), std::invalid_argument);
}

TEST_CASE("describe") {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const Stat s = describe(v);
  CHECK(s.mean == 2.5);
  CHECK(std::abs(s.std.value() - std::sqrt(5.0 / 3.0)) < 1e-15);
  CHECK(s.n == 4);
  CHECK_FALSE(describe(std::vector<double>{1.0}).std.has_value());
  CHECK(describe(std::vector<double>{}).n == 0);
}

TEST_CASE("untrained CINN run") {
  ExperimentPlan plan = tiny("forward-advection", 0);
  PlanOverrides o;
  o.solver = Solver::cinn;
  apply_overrides(plan, o);
  const ExperimentResult r = run_experiment(plan);
  REQUIRE(r.runs.size() == 1);
  const RunResult& run = r.runs[0];
  CHECK(run.ok);
  CHECK(std::isfinite(run.metrics.at("l2_u").value()));
  CHECK(run.metrics.at("max_residual").value() < 1e-7);
  CHECK_FALSE(run.metrics.contains("velocity"));
  CHECK(run.field_points.size() == 25600);
  CHECK_FALSE(r.any_aborted());
}

TEST_CASE("emit_outputs") {
  const fs::path none = scratch("empty");
  ExperimentResult empty;
  empty.name = "x";
  CHECK_THROWS_AS(emit_outputs(empty, none), std::invalid_argument);
  CHECK_FALSE(fs::exists(none));

  ExperimentPlan plan = tiny("acoustics", 2);
  plan.arms.resize(1);
  const ExperimentResult r = run_experiment(plan);
  const fs::path dir = scratch("one");
  emit_outputs(r, dir);
  CHECK(file_count(dir) == 3);
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "run_0.csv"));
  CHECK(fs::exists(dir / "field_0.csv"));

  const std::string field = slurp(dir / "field_0.csv");
  CHECK(field.rfind("x,t,p_pred,p_exact,v_pred,v_exact\n", 0) == 0);
  CHECK(slurp(dir / "run_0.csv").rfind("iteration,data,total,velocity,elapsed_sec\n", 0) == 0);

  const nlohmann::json j = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(j.at("schema") == "cinn-summary");
  CHECK(j.at("version") == 1);
  CHECK(j.at("experiment") == "acoustics");
  REQUIRE(j.at("arms").size() == 1);
  const auto& arm = j.at("arms")[0];
  CHECK(arm.at("label") == "cinn-1000");
  CHECK(arm.at("metrics").contains("l2_p"));
  CHECK(arm.at("metrics").at("l2_v").at("n") == 1);
  CHECK(arm.at("timing").contains("runtime_sec"));
  REQUIRE(j.at("runs").size() == 1);
  const auto& run = j.at("runs")[0];
  CHECK(run.at("status") == "ok");
  CHECK(run.at("history_file") == "run_0.csv");
  CHECK(run.at("field_file") == "field_0.csv");
  CHECK(run.at("metrics").at("l2_p").get<double>() == r.runs[0].metrics.at("l2_p").value());
  fs::remove_all(dir);
}

TEST_CASE("summaries are deterministic and runs independent") {
  ExperimentPlan plan = tiny("forward-advection", 5, 2);
  const nlohmann::json a = summary_json(run_experiment(plan), false);
  const nlohmann::json b = summary_json(run_experiment(plan), false);
  CHECK(a.dump() == b.dump());
  CHECK(a.dump().find("timing") == std::string::npos);

  // Running only replication 1 (seed + 1) reproduces that run's numbers.
  ExperimentPlan shifted = tiny("forward-advection", 5, 1);
  for (ExperimentConfig& arm : shifted.arms) arm.seed += 1;
  const nlohmann::json c = summary_json(run_experiment(shifted), false);
  for (std::size_t arm = 0; arm < 3; ++arm) {
    CHECK(c.at("runs")[arm].at("metrics") == a.at("runs")[2 * arm + 1].at("metrics"));
    CHECK(c.at("runs")[arm].at("seed") == a.at("runs")[2 * arm + 1].at("seed"));
  }
}

TEST_CASE("aborted runs are recorded, not fatal") {
  ExperimentPlan plan = tiny("forward-advection", 3);
  plan.arms.resize(1);
  plan.arms[0].train.learning_rate = 1e300;
  const ExperimentResult r = run_experiment(plan);
  REQUIRE(r.runs.size() == 1);
  CHECK_FALSE(r.runs[0].ok);
  CHECK(r.any_aborted());
  CHECK(r.summary[0].aborted == 1);
  const nlohmann::json j = summary_json(r, false);
  CHECK(j.at("runs")[0].at("status") == "aborted");
  CHECK_FALSE(j.at("runs")[0].at("diagnostic").get<std::string>().empty());
  CHECK_FALSE(format_summary(r).empty());
}

TEST_CASE("output files without timing are byte-identical across runs") {
  const ExperimentPlan plan = tiny("inverse-advection", 4, 2);
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  emit_outputs(run_experiment(plan), a, false);
  emit_outputs(run_experiment(plan), b, false);
  CHECK(file_count(a) == 1 + 2 * 8);
  for (const auto& entry : fs::directory_iterator(a)) {
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
  CHECK(slurp(a / "run_0.csv").find(",\n") != std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}
