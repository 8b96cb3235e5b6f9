#include "cinn/outputs.hpp"

#include <fmt/format.h>

#include <fstream>
#include <stdexcept>

namespace cinn {

namespace {

nlohmann::json stat_json(const Stat& s) {
  nlohmann::json j;
  j["mean"] = s.n > 0 ? nlohmann::json(s.mean) : nlohmann::json(nullptr);
  j["std"] = s.std ? nlohmann::json(*s.std) : nlohmann::json(nullptr);
  j["n"] = s.n;
  return j;
}

std::string file_name(const char* stem, std::size_t k) { return fmt::format("{}_{}.csv", stem, k); }

std::ofstream open(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

nlohmann::json config_json(const ExperimentConfig& c) {
  const ProblemSpec& p = c.problem;
  nlohmann::json j;
  j["label"] = c.label;
  j["solver"] = to_string(c.solver);
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["batch_columns"] = c.batch_columns;
  j["problem"] = {
      {"kind", to_string(p.kind)},
      {"domain", {{"x", {p.domain.x_min, p.domain.x_max}}, {"t", {p.domain.t_min, p.domain.t_max}}}},
      {"coefficients",
       {{"v", p.coefficients.v},
        {"u_left", p.coefficients.u_left},
        {"u_right", p.coefficients.u_right},
        {"K0", p.coefficients.K0},
        {"c0", p.coefficients.c0},
        {"noise_sigma", p.coefficients.noise_sigma}}},
      {"sampling",
       {{"initial", p.sampling.initial},
        {"lateral", p.sampling.lateral},
        {"collocation", p.sampling.collocation},
        {"interior_data", p.sampling.interior_data},
        {"penalty_times", p.sampling.penalty_times},
        {"penalty_random", p.sampling.penalty_random},
        {"test_nx", p.sampling.test_nx},
        {"test_nt", p.sampling.test_nt}}}};
  j["model"] = {{"hidden_layers", c.model.hidden_layers},
                {"width", c.model.width},
                {"velocity_init", {c.model.velocity_init_min, c.model.velocity_init_max}}};
  j["train"] = {{"learning_rate", c.train.learning_rate}, {"iterations", c.train.iterations},
                {"beta1", c.train.beta1},                 {"beta2", c.train.beta2},
                {"epsilon", c.train.epsilon},             {"log_every", c.train.log_every}};
  return j;
}

nlohmann::json summary_json(const ExperimentResult& result, bool include_timing) {
  nlohmann::json j;
  j["schema"] = "cinn-summary";
  j["version"] = 1;
  j["experiment"] = result.name;
  j["arms"] = nlohmann::json::array();
  for (std::size_t a = 0; a < result.summary.size(); ++a) {
    const ArmSummary& s = result.summary[a];
    nlohmann::json arm;
    arm["label"] = s.label;
    arm["solver"] = to_string(s.solver);
    arm["completed"] = s.completed;
    arm["aborted"] = s.aborted;
    arm["metrics"] = nlohmann::json::object();
    for (const auto& [name, stat] : s.metrics) arm["metrics"][name] = stat_json(stat);
    if (include_timing) arm["timing"] = {{"runtime_sec", stat_json(s.runtime_sec)}};
    if (a < result.arms.size()) arm["config"] = config_json(result.arms[a]);
    j["arms"].push_back(std::move(arm));
  }
  j["runs"] = nlohmann::json::array();
  for (std::size_t k = 0; k < result.runs.size(); ++k) {
    const RunResult& r = result.runs[k];
    nlohmann::json run;
    run["index"] = k;
    run["arm"] = r.arm;
    run["solver"] = to_string(r.solver);
    run["replication"] = r.replication;
    run["seed"] = r.seed;
    run["status"] = r.ok ? "ok" : "aborted";
    run["diagnostic"] = r.diagnostic;
    run["metrics"] = nlohmann::json::object();
    for (const auto& [name, value] : r.metrics) run["metrics"][name] = value ? nlohmann::json(*value) : nlohmann::json(nullptr);
    run["history_file"] = file_name("run", k);
    run["field_file"] = file_name("field", k);
    if (include_timing) run["timing"] = {{"runtime_sec", r.runtime_sec}};
    j["runs"].push_back(std::move(run));
  }
  return j;
}

void write_field_csv(const RunResult& run, std::ostream& out) {
  std::string header = "x,t";
  for (const std::string& f : run.field_names) header += fmt::format(",{0}_pred,{0}_exact", f);
  out << header << '\n';
  const Eigen::Index fields = static_cast<Eigen::Index>(run.field_names.size());
  const bool have_values = run.field_predicted.rows() == fields && run.field_exact.rows() == fields;
  if (!have_values) return;
  std::string line;
  for (Eigen::Index j = 0; j < run.field_points.size(); ++j) {
    line = fmt::format("{:.17g},{:.17g}", run.field_points.x(j), run.field_points.t(j));
    for (Eigen::Index f = 0; f < fields; ++f) {
      line += fmt::format(",{:.17g},{:.17g}", run.field_predicted(f, j), run.field_exact(f, j));
    }
    line += '\n';
    out << line;
  }
}

void emit_outputs(const ExperimentResult& result, const std::filesystem::path& dir, bool include_timing) {
  if (result.runs.empty()) throw std::invalid_argument("emit_outputs: no replications to write");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  {
    std::ofstream out = open(dir / "summary.json");
    out << summary_json(result, include_timing).dump(2) << '\n';
  }
  for (std::size_t k = 0; k < result.runs.size(); ++k) {
    std::ofstream hist = open(dir / file_name("run", k));
    result.runs[k].history.write_csv(hist, include_timing);
    std::ofstream field = open(dir / file_name("field", k));
    write_field_csv(result.runs[k], field);
  }
}

std::string format_summary(const ExperimentResult& result) {
  std::string out = fmt::format("experiment {}\n", result.name);
  for (const ArmSummary& s : result.summary) {
    out += fmt::format("  {:<16} completed {:>3}  aborted {:>3}  runtime {:.4f}", s.label, s.completed, s.aborted,
                       s.runtime_sec.mean);
    if (s.runtime_sec.std) out += fmt::format(" +- {:.4f}", *s.runtime_sec.std);
    out += " s\n";
    for (const auto& [name, stat] : s.metrics) {
      if (name == "final_loss") continue;
      out += fmt::format("      {:<14} {:.6g}", name, stat.mean);
      if (stat.std) out += fmt::format(" +- {:.6g}", *stat.std);
      out += '\n';
    }
  }
  return out;
}

}  // namespace cinn
