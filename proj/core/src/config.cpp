#include "cinn/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cinn {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& msg) {
  throw std::invalid_argument("config " + where + ": " + msg);
}

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) bad(where, "expected a mapping");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!ok.count(key)) bad(where, "unknown key '" + key + "'");
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    bad(where + "." + key, "wrong type");
  }
}

void read_range(const YAML::Node& node, const char* key, double& lo, double& hi, const std::string& where) {
  if (!node[key]) return;
  const YAML::Node r = node[key];
  if (!r.IsSequence() || r.size() != 2) bad(where + "." + key, "expected [lo, hi]");
  try {
    lo = r[0].as<double>();
    hi = r[1].as<double>();
  } catch (const YAML::Exception&) {
    bad(where + "." + key, "expected numbers");
  }
}

void apply_problem(ProblemSpec& p, const YAML::Node& n) {
  check_keys(n, "problem", {"kind", "domain", "coefficients", "sampling"});
  if (n["kind"]) {
    ProblemKind kind = parse_problem_kind(n["kind"].as<std::string>());
    if (kind != p.kind) p = default_problem(kind);
  }
  if (const YAML::Node d = n["domain"]) {
    check_keys(d, "problem.domain", {"x", "t"});
    read_range(d, "x", p.domain.x_min, p.domain.x_max, "problem.domain");
    read_range(d, "t", p.domain.t_min, p.domain.t_max, "problem.domain");
  }
  if (const YAML::Node c = n["coefficients"]) {
    const std::string w = "problem.coefficients";
    check_keys(c, w, {"v", "u_left", "u_right", "K0", "c0", "noise_sigma"});
    read(c, "v", p.coefficients.v, w);
    read(c, "u_left", p.coefficients.u_left, w);
    read(c, "u_right", p.coefficients.u_right, w);
    read(c, "K0", p.coefficients.K0, w);
    read(c, "c0", p.coefficients.c0, w);
    read(c, "noise_sigma", p.coefficients.noise_sigma, w);
  }
  if (const YAML::Node s = n["sampling"]) {
    const std::string w = "problem.sampling";
    check_keys(s, w, {"initial", "lateral", "collocation", "interior_data", "penalty_times", "penalty_random",
                      "test_nx", "test_nt"});
    read(s, "initial", p.sampling.initial, w);
    read(s, "lateral", p.sampling.lateral, w);
    read(s, "collocation", p.sampling.collocation, w);
    read(s, "interior_data", p.sampling.interior_data, w);
    read(s, "penalty_times", p.sampling.penalty_times, w);
    read(s, "penalty_random", p.sampling.penalty_random, w);
    read(s, "test_nx", p.sampling.test_nx, w);
    read(s, "test_nt", p.sampling.test_nt, w);
  }
}

void apply_arm(ExperimentConfig& c, const YAML::Node& n, const std::string& where, bool top_level) {
  if (!top_level) {
    read(n, "label", c.label, where);
    if (n["solver"]) c.solver = parse_solver(n["solver"].as<std::string>());
  }
  read(n, "replications", c.replications, where);
  read(n, "seed", c.seed, where);
  read(n, "batch_columns", c.batch_columns, where);
  if (n["problem"]) apply_problem(c.problem, n["problem"]);
  if (const YAML::Node m = n["model"]) {
    check_keys(m, where + ".model", {"hidden_layers", "width", "velocity_init"});
    read(m, "hidden_layers", c.model.hidden_layers, where + ".model");
    read(m, "width", c.model.width, where + ".model");
    read_range(m, "velocity_init", c.model.velocity_init_min, c.model.velocity_init_max, where + ".model");
  }
  if (const YAML::Node t = n["train"]) {
    const std::string w = where + ".train";
    check_keys(t, w, {"learning_rate", "iterations", "beta1", "beta2", "epsilon", "log_every"});
    read(t, "learning_rate", c.train.learning_rate, w);
    read(t, "iterations", c.train.iterations, w);
    read(t, "beta1", c.train.beta1, w);
    read(t, "beta2", c.train.beta2, w);
    read(t, "epsilon", c.train.epsilon, w);
    read(t, "log_every", c.train.log_every, w);
  }
}

}  // namespace

ExperimentPlan plan_from_yaml(const std::string& text, std::string_view experiment_name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  check_keys(root, "root", {"experiment", "description", "workers", "output_dir", "replications", "seed",
                            "batch_columns", "problem", "model", "train", "arms"});

  std::string name(experiment_name);
  if (root["experiment"]) {
    const std::string file_name = root["experiment"].as<std::string>();
    if (!name.empty() && name != file_name) {
      bad("experiment", "file names '" + file_name + "' but '" + name + "' was requested");
    }
    name = file_name;
  }
  if (name.empty()) bad("experiment", "no experiment name given");

  ExperimentPlan base;
  bool builtin = false;
  for (ExperimentPlan& p : builtin_experiments()) {
    if (p.name == name) {
      base = std::move(p);
      builtin = true;
    }
  }
  ExperimentPlan plan = base;
  plan.name = name;
  read(root, "description", plan.description, "root");
  read(root, "workers", plan.workers, "root");
  read(root, "output_dir", plan.output_dir, "root");

  if (const YAML::Node arms = root["arms"]) {
    if (!arms.IsSequence() || arms.size() == 0) bad("arms", "expected a non-empty list");
    plan.arms.clear();
    for (std::size_t i = 0; i < arms.size(); ++i) {
      const YAML::Node a = arms[i];
      const std::string where = "arms[" + std::to_string(i) + "]";
      check_keys(a, where, {"label", "solver", "replications", "seed", "batch_columns", "problem", "model", "train"});
      ExperimentConfig c;
      const std::string label = a["label"] ? a["label"].as<std::string>() : "";
      auto match = std::find_if(base.arms.begin(), base.arms.end(), [&](const auto& b) { return b.label == label; });
      if (match != base.arms.end()) {
        c = *match;
      } else if (!base.arms.empty()) {
        c = base.arms.front();
      }
      apply_arm(c, root, "root", true);
      apply_arm(c, a, where, false);
      plan.arms.push_back(std::move(c));
    }
  } else {
    if (!builtin) bad("arms", "experiment '" + name + "' is not built in, so arms are required");
    for (ExperimentConfig& c : plan.arms) apply_arm(c, root, "root", true);
  }
  plan.validate();
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path, std::string_view experiment_name) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return plan_from_yaml(ss.str(), experiment_name);
}

std::string plan_to_yaml(const ExperimentPlan& plan) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "experiment" << YAML::Value << plan.name;
  out << YAML::Key << "description" << YAML::Value << plan.description;
  out << YAML::Key << "workers" << YAML::Value << plan.workers;
  out << YAML::Key << "output_dir" << YAML::Value << plan.output_dir;
  out << YAML::Key << "arms" << YAML::Value << YAML::BeginSeq;
  for (const ExperimentConfig& c : plan.arms) {
    const ProblemSpec& p = c.problem;
    out << YAML::BeginMap;
    out << YAML::Key << "label" << YAML::Value << c.label;
    out << YAML::Key << "solver" << YAML::Value << to_string(c.solver);
    out << YAML::Key << "replications" << YAML::Value << c.replications;
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    out << YAML::Key << "batch_columns" << YAML::Value << c.batch_columns;
    out << YAML::Key << "problem" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << to_string(p.kind);
    out << YAML::Key << "domain" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "x" << YAML::Value << YAML::Flow << YAML::BeginSeq << p.domain.x_min << p.domain.x_max << YAML::EndSeq;
    out << YAML::Key << "t" << YAML::Value << YAML::Flow << YAML::BeginSeq << p.domain.t_min << p.domain.t_max << YAML::EndSeq;
    out << YAML::EndMap;
    out << YAML::Key << "coefficients" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "v" << YAML::Value << p.coefficients.v;
    out << YAML::Key << "u_left" << YAML::Value << p.coefficients.u_left;
    out << YAML::Key << "u_right" << YAML::Value << p.coefficients.u_right;
    out << YAML::Key << "K0" << YAML::Value << p.coefficients.K0;
    out << YAML::Key << "c0" << YAML::Value << p.coefficients.c0;
    out << YAML::Key << "noise_sigma" << YAML::Value << p.coefficients.noise_sigma;
    out << YAML::EndMap;
    out << YAML::Key << "sampling" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "initial" << YAML::Value << p.sampling.initial;
    out << YAML::Key << "lateral" << YAML::Value << p.sampling.lateral;
    out << YAML::Key << "collocation" << YAML::Value << p.sampling.collocation;
    out << YAML::Key << "interior_data" << YAML::Value << p.sampling.interior_data;
    out << YAML::Key << "penalty_times" << YAML::Value << p.sampling.penalty_times;
    out << YAML::Key << "penalty_random" << YAML::Value << p.sampling.penalty_random;
    out << YAML::Key << "test_nx" << YAML::Value << p.sampling.test_nx;
    out << YAML::Key << "test_nt" << YAML::Value << p.sampling.test_nt;
    out << YAML::EndMap;
    out << YAML::EndMap;
    out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "hidden_layers" << YAML::Value << c.model.hidden_layers;
    out << YAML::Key << "width" << YAML::Value << c.model.width;
    out << YAML::Key << "velocity_init" << YAML::Value << YAML::Flow << YAML::BeginSeq << c.model.velocity_init_min
        << c.model.velocity_init_max << YAML::EndSeq;
    out << YAML::EndMap;
    out << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "learning_rate" << YAML::Value << c.train.learning_rate;
    out << YAML::Key << "iterations" << YAML::Value << c.train.iterations;
    out << YAML::Key << "beta1" << YAML::Value << c.train.beta1;
    out << YAML::Key << "beta2" << YAML::Value << c.train.beta2;
    out << YAML::Key << "epsilon" << YAML::Value << c.train.epsilon;
    out << YAML::Key << "log_every" << YAML::Value << c.train.log_every;
    out << YAML::EndMap;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void apply_overrides(ExperimentPlan& plan, const PlanOverrides& o) {
  if (o.solver) {
    std::erase_if(plan.arms, [&](const ExperimentConfig& c) { return c.solver != *o.solver; });
    if (plan.arms.empty()) {
      throw std::invalid_argument("experiment '" + plan.name + "' has no " + to_string(*o.solver) + " arms");
    }
  }
  for (ExperimentConfig& c : plan.arms) {
    if (o.replications) c.replications = *o.replications;
    if (o.seed) c.seed = *o.seed;
    if (o.iterations) c.train.iterations = *o.iterations;
  }
  if (o.output_dir) plan.output_dir = *o.output_dir;
  if (o.workers) plan.workers = *o.workers;
  plan.validate();
}

}  // namespace cinn
