#include "cinn/problems.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cinn {

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::riemann_advection: return "riemann_advection";
    case ProblemKind::periodic_advection: return "periodic_advection";
    case ProblemKind::acoustics: return "acoustics";
    case ProblemKind::inverse_advection: return "inverse_advection";
  }
  return "?";
}

ProblemKind parse_problem_kind(std::string_view name) {
  for (ProblemKind k : {ProblemKind::riemann_advection, ProblemKind::periodic_advection, ProblemKind::acoustics,
                        ProblemKind::inverse_advection}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown problem kind '" + std::string(name) + "'");
}

std::vector<int> ProblemSpec::observed_fields() const {
  if (kind == ProblemKind::acoustics) return {1};
  return {0};
}

void ProblemSpec::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("problem: " + msg); };
  if (!(domain.x_max > domain.x_min)) fail("x_max must exceed x_min");
  if (!(domain.horizon() > 0.0)) fail("T must be positive");
  const Coefficients& c = coefficients;
  if (c.noise_sigma < 0.0) fail("noise sigma must be non-negative");
  if (sampling.test_nx < 2 || sampling.test_nt < 2) fail("test grid needs at least 2 points per axis");
  switch (kind) {
    case ProblemKind::riemann_advection:
    case ProblemKind::inverse_advection:
      if (!(std::abs(c.v) * domain.horizon() < domain.length() / 2.0)) {
        fail("the step leaves the domain: need |v| T < L/2");
      }
      if (kind == ProblemKind::riemann_advection && (sampling.initial < 1 || sampling.lateral < 1)) {
        fail("initial and lateral counts must be >= 1");
      }
      if (kind == ProblemKind::inverse_advection && sampling.interior_data < 1) fail("interior_data must be >= 1");
      break;
    case ProblemKind::periodic_advection:
      if (sampling.initial < 1) fail("initial count must be >= 1");
      if (sampling.penalty_times < 1) fail("penalty_times must be >= 1");
      break;
    case ProblemKind::acoustics:
      if (!(c.K0 > 0.0) || !(c.c0 > 0.0)) fail("K0 and c0 must be positive");
      if (sampling.interior_data < 1) fail("interior_data must be >= 1");
      break;
  }
}

ProblemSpec default_problem(ProblemKind kind) {
  ProblemSpec spec;
  spec.kind = kind;
  switch (kind) {
    case ProblemKind::riemann_advection:
      spec.domain = {0.0, 2.0, 0.0, 0.8};
      spec.sampling.initial = 50;
      spec.sampling.lateral = 5;
      spec.sampling.collocation = 300;
      break;
    case ProblemKind::inverse_advection:
      spec.domain = {0.0, 2.0, 0.0, 0.8};
      spec.sampling.interior_data = 300;
      spec.sampling.collocation = 300;
      spec.coefficients.noise_sigma = 0.01;
      break;
    case ProblemKind::periodic_advection:
      spec.domain = {0.0, 2.0 * std::numbers::pi, 0.0, 1.0};
      spec.coefficients.v = 20.0;
      spec.sampling.initial = 200;
      spec.sampling.penalty_times = 1000;
      spec.sampling.collocation = 10000;
      break;
    case ProblemKind::acoustics:
      spec.domain = {-1.0, 1.0, 0.0, 0.4};
      spec.sampling.interior_data = 200;
      spec.sampling.collocation = 300;
      break;
  }
  return spec;
}

// ---- exact solutions ----

double riemann_exact(double x, double t, double v, double L, double u_left, double u_right, double x_min) {
  return x - v * t <= x_min + L / 2.0 ? u_left : u_right;
}

double periodic_exact(double x, double t, double v) { return std::sin(x - v * t); }

std::array<double, 2> acoustics_exact(double x, double t, double c0, double Z0) {
  const double right = std::exp(-100.0 * (x - c0 * t) * (x - c0 * t));
  const double left = std::exp(-100.0 * (x + c0 * t) * (x + c0 * t));
  return {0.5 * (right + left), (0.5 / Z0) * (right - left)};
}

std::array<double, 2> ExactOracle::at(double x, double t) const {
  const Coefficients& c = spec_.coefficients;
  switch (spec_.kind) {
    case ProblemKind::riemann_advection:
    case ProblemKind::inverse_advection:
      return {riemann_exact(x, t, c.v, spec_.domain.length(), c.u_left, c.u_right, spec_.domain.x_min), 0.0};
    case ProblemKind::periodic_advection:
      return {periodic_exact(x, t, c.v), 0.0};
    case ProblemKind::acoustics:
      return acoustics_exact(x, t, c.c0, c.K0 / c.c0);
  }
  return {0.0, 0.0};
}

Eigen::MatrixXd ExactOracle::operator()(const Points& points) const {
  Eigen::MatrixXd out(fields(), points.size());
  for (Eigen::Index j = 0; j < points.size(); ++j) {
    const auto u = at(points.x(j), points.t(j));
    for (int f = 0; f < fields(); ++f) out(f, j) = u[static_cast<std::size_t>(f)];
  }
  return out;
}

// ---- seeds ----

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index) { return master + index; }

SeedStreams split_seed(std::uint64_t seed) {
  return {derive_seed(seed, 1), derive_seed(seed, 2), derive_seed(seed, 3), derive_seed(seed, 4)};
}

// ---- samplers ----

namespace {

Eigen::RowVectorXd even(double lo, double hi, int n) {
  if (n == 1) return Eigen::RowVectorXd::Constant(1, lo);
  return Eigen::RowVectorXd::LinSpaced(n, lo, hi);
}

Dataset with_targets(const ProblemSpec& spec, Points pts, std::span<const int> fields) {
  const Eigen::MatrixXd exact = ExactOracle(spec)(pts);
  Dataset d;
  d.inputs = pts.stacked();
  d.targets.resize(static_cast<Eigen::Index>(fields.size()), pts.size());
  for (std::size_t k = 0; k < fields.size(); ++k) d.targets.row(static_cast<Eigen::Index>(k)) = exact.row(fields[k]);
  return d;
}

std::vector<int> all_fields(const ProblemSpec& spec) {
  std::vector<int> f(static_cast<std::size_t>(spec.fields()));
  std::iota(f.begin(), f.end(), 0);
  return f;
}

}  // namespace

Eigen::MatrixXd latin_hypercube(int n, std::span<const Bounds> bounds, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("latin_hypercube: n must be >= 1");
  for (const Bounds& b : bounds) {
    if (!(b.hi > b.lo)) throw std::invalid_argument("latin_hypercube: degenerate bounds");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(bounds.size()), n);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < bounds.size(); ++k) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int j = 0; j < n; ++j) {
      // Clamp keeps rounding of (k + u) / n from spilling into the next stratum.
      const double lo = static_cast<double>(perm[static_cast<std::size_t>(j)]);
      const double u = std::min((lo + unit(rng)) / n, std::nextafter((lo + 1.0) / n, 0.0));
      out(static_cast<Eigen::Index>(k), j) = bounds[k].lo + (bounds[k].hi - bounds[k].lo) * u;
    }
  }
  return out;
}

Dataset sample_initial_boundary(const ProblemSpec& spec) {
  const int n = spec.sampling.initial;
  if (n < 1) throw std::invalid_argument("sample_initial_boundary: count must be >= 1");
  Points pts(even(spec.domain.x_min, spec.domain.x_max, n), Eigen::RowVectorXd::Constant(n, spec.domain.t_min));
  return with_targets(spec, std::move(pts), all_fields(spec));
}

Dataset sample_lateral_boundaries(const ProblemSpec& spec) {
  const int n = spec.sampling.lateral;
  if (n < 1) throw std::invalid_argument("sample_lateral_boundaries: count must be >= 1");
  Eigen::RowVectorXd t = even(spec.domain.t_min, spec.domain.t_max, n);
  Eigen::RowVectorXd x(2 * n);
  x << Eigen::RowVectorXd::Constant(n, spec.domain.x_min), Eigen::RowVectorXd::Constant(n, spec.domain.x_max);
  Eigen::RowVectorXd tt(2 * n);
  tt << t, t;
  return with_targets(spec, Points(std::move(x), std::move(tt)), all_fields(spec));
}

namespace {

Points lhs_points(const ProblemSpec& spec, int n, std::uint64_t seed) {
  const Bounds b[2] = {{spec.domain.x_min, spec.domain.x_max}, {spec.domain.t_min, spec.domain.t_max}};
  Eigen::MatrixXd m = latin_hypercube(n, b, seed);
  return Points(m.row(0), m.row(1));
}

}  // namespace

Dataset sample_interior_data(const ProblemSpec& spec, std::uint64_t seed) {
  return with_targets(spec, lhs_points(spec, spec.sampling.interior_data, seed), spec.observed_fields());
}

Points sample_collocation(const ProblemSpec& spec, std::uint64_t seed) {
  return lhs_points(spec, spec.sampling.collocation, seed);
}

Eigen::RowVectorXd sample_penalty_times(const ProblemSpec& spec, std::uint64_t seed) {
  const int n = spec.sampling.penalty_times;
  if (n < 1) throw std::invalid_argument("sample_penalty_times: count must be >= 1");
  if (!spec.sampling.penalty_random) return even(spec.domain.t_min, spec.domain.t_max, n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(spec.domain.t_min, spec.domain.t_max);
  Eigen::RowVectorXd t(n);
  for (int i = 0; i < n; ++i) t(i) = dist(rng);
  return t;
}

Points test_grid(const ProblemSpec& spec) {
  const int nx = spec.sampling.test_nx;
  const int nt = spec.sampling.test_nt;
  const Eigen::RowVectorXd xs = even(spec.domain.x_min, spec.domain.x_max, nx);
  const Eigen::RowVectorXd ts = even(spec.domain.t_min, spec.domain.t_max, nt);
  Eigen::RowVectorXd x(nx * nt), t(nx * nt);
  for (int j = 0; j < nt; ++j) {
    x.segment(j * nx, nx) = xs;
    t.segment(j * nx, nx).setConstant(ts(j));
  }
  return Points(std::move(x), std::move(t));
}

Points random_interior(const ProblemSpec& spec, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dx(spec.domain.x_min, spec.domain.x_max);
  std::uniform_real_distribution<double> dt(spec.domain.t_min, spec.domain.t_max);
  Eigen::RowVectorXd x(n), t(n);
  for (int i = 0; i < n; ++i) {
    x(i) = dx(rng);
    t(i) = dt(rng);
  }
  return Points(std::move(x), std::move(t));
}

Dataset add_noise(Dataset data, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("add_noise: sigma must be non-negative");
  if (sigma == 0.0) return data;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (Eigen::Index j = 0; j < data.targets.cols(); ++j) {
    for (Eigen::Index i = 0; i < data.targets.rows(); ++i) data.targets(i, j) += noise(rng);
  }
  return data;
}

Points points_of(const Dataset& data) {
  if (data.inputs.rows() != 2) throw std::invalid_argument("points_of: dataset inputs must be (x, t)");
  return Points(data.inputs.row(0), data.inputs.row(1));
}

Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.inputs.rows() != b.inputs.rows() || a.targets.rows() != b.targets.rows()) {
    throw std::invalid_argument("concat: dataset shapes differ");
  }
  Dataset d;
  d.inputs.resize(a.inputs.rows(), a.size() + b.size());
  d.inputs << a.inputs, b.inputs;
  d.targets.resize(a.targets.rows(), a.size() + b.size());
  d.targets << a.targets, b.targets;
  return d;
}

}  // namespace cinn
