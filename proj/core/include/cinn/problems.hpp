#pragma once

// Problem definitions, exact solutions and deterministic samplers.

#include "cinn/autodiff.hpp"
#include "cinn/network.hpp"
#include "cinn/points.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cinn {

enum class ProblemKind { riemann_advection, periodic_advection, acoustics, inverse_advection };

std::string to_string(ProblemKind kind);
/// Throws std::invalid_argument for unknown names.
ProblemKind parse_problem_kind(std::string_view name);

struct Domain {
  double x_min = 0.0;
  double x_max = 2.0;
  double t_min = 0.0;
  double t_max = 0.8;

  double length() const { return x_max - x_min; }
  double horizon() const { return t_max - t_min; }
};

struct Coefficients {
  double v = 1.0;
  double u_left = 1.0;
  double u_right = 0.0;
  double K0 = 1.0;
  double c0 = 1.0;
  double noise_sigma = 0.0;
};

struct SamplingPlan {
  int initial = 50;
  int lateral = 5;
  int collocation = 300;
  int interior_data = 300;
  int penalty_times = 1000;
  bool penalty_random = false;  // random-uniform instead of an even grid
  int test_nx = 256;
  int test_nt = 100;
};

struct ProblemSpec {
  ProblemKind kind = ProblemKind::riemann_advection;
  Domain domain;
  Coefficients coefficients;
  SamplingPlan sampling;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
  /// Number of solution components: 2 for acoustics (p, v), else 1.
  int fields() const { return kind == ProblemKind::acoustics ? 2 : 1; }
  /// Components observed by interior data: velocity only for acoustics.
  std::vector<int> observed_fields() const;
};

/// Defaults for each kind, before any config overrides.
ProblemSpec default_problem(ProblemKind kind);

// ---- Exact solutions --------------------------------------------------------

/// u_l left of the midpoint x_min + L/2 after transport, u_r right of it; the
/// midpoint itself belongs to the left state.
double riemann_exact(double x, double t, double v, double L, double u_left, double u_right, double x_min = 0.0);
double periodic_exact(double x, double t, double v);
std::array<double, 2> acoustics_exact(double x, double t, double c0, double Z0);

namespace detail {
inline double primal(const ad::Var& a) { return a.value(); }
inline double primal(const ad::Dual& a) { return a.primal.value(); }
}  // namespace detail

/// Exact solutions recorded on the scalar tape (E = Var or Dual).
template <class E>
E taped_riemann_exact(const E& x, const E& t, double v, double L, double u_left, double u_right, double x_min = 0.0) {
  const E xi = x - t * v;
  return xi.constant(detail::primal(xi) <= x_min + L / 2.0 ? u_left : u_right);
}

template <class E>
E taped_periodic_exact(const E& x, const E& t, double v) {
  return sin(x - t * v);
}

template <class E>
std::array<E, 2> taped_acoustics_exact(const E& x, const E& t, double c0, double Z0) {
  const E right = exp(-100.0 * square(x - t * c0));
  const E left = exp(-100.0 * square(x + t * c0));
  return {0.5 * (right + left), (0.5 / Z0) * (right - left)};
}

class ExactOracle {
 public:
  explicit ExactOracle(const ProblemSpec& spec) : spec_(spec) {}

  int fields() const { return spec_.fields(); }
  std::array<double, 2> at(double x, double t) const;
  /// fields x n.
  Eigen::MatrixXd operator()(const Points& points) const;

 private:
  ProblemSpec spec_;
};

// ---- Seeds ------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x);
/// Independent sub-seed for a labelled stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
/// master + index: replication k of a batch.
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index);

struct SeedStreams {
  std::uint64_t init = 0;      // network weights
  std::uint64_t sampling = 0;  // LHS sets
  std::uint64_t noise = 0;     // measurement noise
  std::uint64_t velocity = 0;  // inverse-problem initial guess
};

SeedStreams split_seed(std::uint64_t seed);

// ---- Samplers ---------------------------------------------------------------

struct Bounds {
  double lo = 0.0;
  double hi = 1.0;
};

/// d x n; coordinate k of point j lies in stratum perm_k(j) of n equal strata.
/// Throws std::invalid_argument for n < 1 or lo >= hi.
Eigen::MatrixXd latin_hypercube(int n, std::span<const Bounds> bounds, std::uint64_t seed);

/// `initial` evenly spaced points on t = t_min, endpoints included.
Dataset sample_initial_boundary(const ProblemSpec& spec);
/// `lateral` evenly spaced times on x = x_min, then the same on x = x_max.
Dataset sample_lateral_boundaries(const ProblemSpec& spec);
/// LHS interior samples with targets for the observed fields.
Dataset sample_interior_data(const ProblemSpec& spec, std::uint64_t seed);
Points sample_collocation(const ProblemSpec& spec, std::uint64_t seed);
Eigen::RowVectorXd sample_penalty_times(const ProblemSpec& spec, std::uint64_t seed);
/// Uniform test_nx x test_nt grid with endpoints; x varies fastest.
Points test_grid(const ProblemSpec& spec);
/// Uniform random interior points.
Points random_interior(const ProblemSpec& spec, int n, std::uint64_t seed);

/// Adds N(0, sigma^2) to every target. Throws for sigma < 0.
Dataset add_noise(Dataset data, double sigma, std::uint64_t seed);

Points points_of(const Dataset& data);
Dataset concat(const Dataset& a, const Dataset& b);

}  // namespace cinn
