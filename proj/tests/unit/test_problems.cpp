#include "cinn/baselines.hpp"
#include "cinn/problems.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace cinn;
using ad::Dual;
using ad::Tape;

namespace {

constexpr double kPi = std::numbers::pi;

// mpmath, 30 digits: (1 +- exp(-4)) / 2.
constexpr double kPressure = 0.50915781944436709015;
constexpr double kVelocity = 0.49084218055563290985;

}  // namespace

TEST_CASE("problem kind names round-trip") {
  for (ProblemKind k : {ProblemKind::riemann_advection, ProblemKind::periodic_advection, ProblemKind::acoustics,
                        ProblemKind::inverse_advection}) {
    CHECK(parse_problem_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_problem_kind("burgers"), std::invalid_argument);
}

TEST_CASE("riemann_exact") {
  CHECK(riemann_exact(0.2, 0.0, 1.0, 2.0, 1.0, 0.0) == 1.0);
  CHECK(riemann_exact(1.5, 0.8, 1.0, 2.0, 1.0, 0.0) == 1.0);
  CHECK(riemann_exact(1.9, 0.1, 1.0, 2.0, 1.0, 0.0) == 0.0);
  CHECK(riemann_exact(1.0, 0.0, 1.0, 2.0, 3.0, -1.0) == 3.0);
  CHECK(riemann_exact(1.5, 0.5, 1.0, 2.0, 3.0, -1.0) == 3.0);
  CHECK(riemann_exact(-0.4, 0.0, 1.0, 2.0, 1.0, 0.0, -1.0) == 1.0);
  CHECK(riemann_exact(0.4, 0.0, 1.0, 2.0, 1.0, 0.0, -1.0) == 0.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> x(0.0, 2.0), t(0.0, 0.8), d(0.0, 0.8);
  for (int i = 0; i < 1000; ++i) {
    const double xi = x(rng), ti = t(rng), di = std::min(d(rng), ti);
    CHECK(riemann_exact(xi, ti, 1.0, 2.0, 1.0, 0.0) == riemann_exact(xi - di, ti - di, 1.0, 2.0, 1.0, 0.0));
  }
}

TEST_CASE("periodic_exact") {
  CHECK(periodic_exact(0.3, 0.0, 20.0) == std::sin(0.3));
  CHECK(periodic_exact(kPi / 2.0, 0.0, 37.0) == 1.0);
  for (double t : {0.0, 0.1, 0.7}) {
    CHECK(std::abs(periodic_exact(0.0, t, 30.0) - periodic_exact(2.0 * kPi, t, 30.0)) < 1e-13);
  }
}

TEST_CASE("acoustics_exact") {
  const auto origin = acoustics_exact(0.0, 0.0, 1.0, 1.0);
  CHECK(origin[0] == 1.0);
  CHECK(origin[1] == 0.0);
  const auto a = acoustics_exact(0.1, 0.1, 1.0, 1.0);
  CHECK(std::abs(a[0] - kPressure) < 1e-16);
  CHECK(std::abs(a[1] - kVelocity) < 1e-16);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> x(-1.0, 1.0), t(0.0, 0.4);
  for (int i = 0; i < 1000; ++i) {
    const double xi = x(rng), ti = t(rng);
    const auto plus = acoustics_exact(xi, ti, 1.3, 0.7);
    const auto minus = acoustics_exact(-xi, ti, 1.3, 0.7);
    CHECK(plus[0] == minus[0]);
    CHECK(plus[1] == -minus[1]);
  }
}

TEST_CASE("taped oracles satisfy their equations") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tape tape;
  for (int i = 0; i < 200; ++i) {
    const double x = 2.0 * u(rng), t = 0.8 * u(rng);
    auto riemann = [](const Dual& a, const Dual& b) { return taped_riemann_exact(a, b, 1.0, 2.0, 1.0, 0.0); };
    CHECK(std::abs(advection_residual(riemann, tape, x, t, 1.0).value()) < 1e-7);
    CHECK(taped_riemann_exact(ad::Var::leaf(tape, x), ad::Var::leaf(tape, t), 1.0, 2.0, 1.0, 0.0).value() ==
          riemann_exact(x, t, 1.0, 2.0, 1.0, 0.0));

    const double xp = 2.0 * kPi * u(rng), tp = u(rng);
    for (double v : {20.0, 50.0}) {
      auto periodic = [v](const Dual& a, const Dual& b) { return taped_periodic_exact(a, b, v); };
      CHECK(std::abs(advection_residual(periodic, tape, xp, tp, v).value()) < 1e-7);
    }

    const double xa = 2.0 * u(rng) - 1.0, ta = 0.4 * u(rng);
    for (auto [K0, c0] : {std::pair{1.0, 1.0}, std::pair{2.0, 0.5}}) {
      const double Z0 = K0 / c0;
      auto acoustics = [&](const Dual& a, const Dual& b) { return taped_acoustics_exact(a, b, c0, Z0); };
      auto [r1, r2] = acoustics_residuals(acoustics, tape, xa, ta, K0, c0);
      CHECK(std::abs(r1.value()) < 1e-7);
      CHECK(std::abs(r2.value()) < 1e-7);
      const auto plain = acoustics_exact(xa, ta, c0, Z0);
      const auto taped = taped_acoustics_exact(ad::Var::leaf(tape, xa), ad::Var::leaf(tape, ta), c0, Z0);
      CHECK(std::abs(taped[0].value() - plain[0]) < 1e-15);
      CHECK(std::abs(taped[1].value() - plain[1]) < 1e-15);
    }
    tape.reset();
  }
}

TEST_CASE("ExactOracle dispatches on the problem kind") {
  const ProblemSpec acoustics = default_problem(ProblemKind::acoustics);
  const ExactOracle oracle(acoustics);
  CHECK(oracle.fields() == 2);
  const Eigen::MatrixXd values = oracle(Points(Eigen::RowVectorXd::Constant(1, 0.1), Eigen::RowVectorXd::Constant(1, 0.1)));
  CHECK(std::abs(values(0, 0) - kPressure) < 1e-16);
  CHECK(std::abs(values(1, 0) - kVelocity) < 1e-16);
  const ExactOracle riemann(default_problem(ProblemKind::riemann_advection));
  CHECK(riemann.at(1.9, 0.1)[0] == 0.0);
  const ExactOracle periodic(default_problem(ProblemKind::periodic_advection));
  CHECK(periodic.at(0.3, 0.01)[0] == std::sin(0.3 - 20.0 * 0.01));
}

TEST_CASE("default problems") {
  const ProblemSpec r = default_problem(ProblemKind::riemann_advection);
  CHECK(r.domain.length() == 2.0);
  CHECK(r.domain.horizon() == 0.8);
  CHECK(r.coefficients.v == 1.0);
  CHECK(r.coefficients.u_left == 1.0);
  CHECK(r.coefficients.u_right == 0.0);
  CHECK(default_problem(ProblemKind::inverse_advection).coefficients.noise_sigma == 0.01);
  const ProblemSpec p = default_problem(ProblemKind::periodic_advection);
  CHECK(p.domain.x_max == 2.0 * kPi);
  CHECK(p.domain.horizon() == 1.0);
  const ProblemSpec a = default_problem(ProblemKind::acoustics);
  CHECK(a.fields() == 2);
  CHECK(a.observed_fields() == std::vector<int>{1});
  CHECK(r.observed_fields() == std::vector<int>{0});
  for (ProblemKind k : {ProblemKind::riemann_advection, ProblemKind::periodic_advection, ProblemKind::acoustics,
                        ProblemKind::inverse_advection}) {
    CHECK_NOTHROW(default_problem(k).validate());
  }
}

TEST_CASE("ProblemSpec::validate") {
  ProblemSpec s = default_problem(ProblemKind::riemann_advection);
  s.coefficients.v = 1.25;  // 1.25 * 0.8 = L/2 exactly
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = default_problem(ProblemKind::riemann_advection);
  s.domain.t_max = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = default_problem(ProblemKind::inverse_advection);
  s.coefficients.noise_sigma = -0.1;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = default_problem(ProblemKind::acoustics);
  s.coefficients.K0 = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = default_problem(ProblemKind::periodic_advection);
  s.sampling.initial = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("boundary samplers") {
  const ProblemSpec r = default_problem(ProblemKind::riemann_advection);
  const Dataset init = sample_initial_boundary(r);
  CHECK(init.size() == 50);
  CHECK(init.inputs(0, 0) == 0.0);
  CHECK(init.inputs(0, 49) == 2.0);
  CHECK((init.inputs.row(1).array() == 0.0).all());
  for (Eigen::Index j = 0; j < init.size(); ++j) CHECK(init.targets(0, j) == riemann_exact(init.inputs(0, j), 0.0, 1.0, 2.0, 1.0, 0.0));

  const Dataset lat = sample_lateral_boundaries(r);
  CHECK(lat.size() == 10);
  CHECK((lat.inputs.row(0).head(5).array() == 0.0).all());
  CHECK((lat.inputs.row(0).tail(5).array() == 2.0).all());
  CHECK(lat.inputs(1, 0) == 0.0);
  CHECK(lat.inputs(1, 4) == 0.8);
  CHECK((lat.targets.row(0).head(5).array() == 1.0).all());
  CHECK((lat.targets.row(0).tail(5).array() == 0.0).all());

  const ProblemSpec p = default_problem(ProblemKind::periodic_advection);
  const Dataset pi = sample_initial_boundary(p);
  CHECK(pi.size() == 200);
  CHECK(pi.inputs(0, 199) == 2.0 * kPi);
  for (Eigen::Index j = 0; j < pi.size(); ++j) CHECK(pi.targets(0, j) == std::sin(pi.inputs(0, j)));

  const ProblemSpec a = default_problem(ProblemKind::acoustics);
  CHECK(sample_initial_boundary(a).targets.rows() == 2);
  const Dataset interior = sample_interior_data(a, 3);
  CHECK(interior.size() == 200);
  CHECK(interior.targets.rows() == 1);
  CHECK(interior.targets(0, 7) == acoustics_exact(interior.inputs(0, 7), interior.inputs(1, 7), 1.0, 1.0)[1]);
}

TEST_CASE("latin_hypercube") {
  auto strata = [](const Eigen::MatrixXd& m, int n, const Bounds& b, Eigen::Index axis) {
    std::vector<int> count(static_cast<std::size_t>(n), 0);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const int k = static_cast<int>(std::floor((m(axis, j) - b.lo) / (b.hi - b.lo) * n));
      count[static_cast<std::size_t>(std::clamp(k, 0, n - 1))]++;
    }
    return count;
  };
  const Bounds unit[2] = {{0.0, 1.0}, {0.0, 1.0}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd m = latin_hypercube(4, unit, seed);
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 4);
    CHECK(strata(m, 4, unit[0], 0) == std::vector<int>(4, 1));
    CHECK(strata(m, 4, unit[1], 1) == std::vector<int>(4, 1));
  }
  const Bounds box[2] = {{-1.0, 3.0}, {0.5, 0.75}};
  const Eigen::MatrixXd one = latin_hypercube(1, box, 5);
  CHECK(one(0, 0) >= -1.0);
  CHECK(one(0, 0) < 3.0);
  CHECK(one(1, 0) >= 0.5);
  CHECK(one(1, 0) < 0.75);

  const Eigen::MatrixXd big = latin_hypercube(1000, box, 6);
  CHECK(strata(big, 1000, box[0], 0) == std::vector<int>(1000, 1));
  CHECK(strata(big, 1000, box[1], 1) == std::vector<int>(1000, 1));

  CHECK(latin_hypercube(50, box, 9) == latin_hypercube(50, box, 9));
  CHECK(latin_hypercube(50, box, 9) != latin_hypercube(50, box, 10));

  const Bounds flat[1] = {{1.0, 1.0}};
  CHECK_THROWS_AS(latin_hypercube(3, flat, 1), std::invalid_argument);
  CHECK_THROWS_AS(latin_hypercube(0, unit, 1), std::invalid_argument);
}

TEST_CASE("add_noise") {
  Dataset clean;
  clean.inputs = Eigen::MatrixXd::Zero(2, 10000);
  clean.targets = Eigen::MatrixXd::Random(1, 10000);
  const Dataset same = add_noise(clean, 0.0, 3);
  CHECK(same.targets == clean.targets);

  const Dataset noisy = add_noise(clean, 0.05, 3);
  const Eigen::ArrayXd diff = (noisy.targets - clean.targets).row(0).transpose().array();
  const double mean = diff.mean();
  const double sd = std::sqrt((diff - mean).square().sum() / (diff.size() - 1));
  CHECK(std::abs(sd - 0.05) < 0.05 * 0.05);
  CHECK(noisy.targets == add_noise(clean, 0.05, 3).targets);
  CHECK(noisy.targets != add_noise(clean, 0.05, 4).targets);
  CHECK(noisy.inputs == clean.inputs);
  CHECK_THROWS_AS(add_noise(clean, -1.0, 3), std::invalid_argument);
}

TEST_CASE("samplers are pure functions of problem and seed") {
  ProblemSpec s = default_problem(ProblemKind::periodic_advection);
  CHECK(sample_collocation(s, 4).stacked() == sample_collocation(s, 4).stacked());
  CHECK(sample_collocation(s, 4).size() == s.sampling.collocation);
  const Eigen::RowVectorXd even = sample_penalty_times(s, 1);
  CHECK(even.size() == 1000);
  CHECK(even(0) == 0.0);
  CHECK(even(999) == 1.0);
  CHECK(sample_penalty_times(s, 2) == even);
  s.sampling.penalty_random = true;
  CHECK(sample_penalty_times(s, 2) == sample_penalty_times(s, 2));
  CHECK(sample_penalty_times(s, 2) != sample_penalty_times(s, 3));
  const Eigen::RowVectorXd random = sample_penalty_times(s, 2);
  CHECK((random.array() >= 0.0).all());
  CHECK((random.array() <= 1.0).all());
  CHECK(random_interior(s, 100, 8).stacked() == random_interior(s, 100, 8).stacked());
}

TEST_CASE("test grid") {
  const ProblemSpec s = default_problem(ProblemKind::riemann_advection);
  const Points g = test_grid(s);
  CHECK(g.size() == 25600);
  CHECK(g.x(0) == 0.0);
  CHECK(g.x(255) == 2.0);
  CHECK(g.t(255) == 0.0);
  CHECK(g.t(256) == g.t(256 + 17));
  CHECK(g.t(25599) == 0.8);
}

TEST_CASE("seed streams") {
  CHECK(replication_seed(7, 3) == 10);
  const SeedStreams a = split_seed(1), b = split_seed(2);
  CHECK(a.init != a.sampling);
  CHECK(a.noise != a.velocity);
  CHECK(a.init != b.init);
  CHECK(split_seed(1).noise == a.noise);
  CHECK(derive_seed(5, 1) != derive_seed(5, 2));
  CHECK(derive_seed(5, 1) == derive_seed(5, 1));
}

TEST_CASE("concat and points_of") {
  const ProblemSpec r = default_problem(ProblemKind::riemann_advection);
  const Dataset both = concat(sample_initial_boundary(r), sample_lateral_boundaries(r));
  CHECK(both.size() == 60);
  CHECK(both.targets(0, 50) == 1.0);
  const Points p = points_of(both);
  CHECK(p.x(59) == 2.0);
  CHECK(p.t(59) == 0.8);
  Dataset bad;
  bad.inputs = Eigen::MatrixXd::Zero(3, 2);
  bad.targets = Eigen::MatrixXd::Zero(1, 2);
  CHECK_THROWS_AS(points_of(bad), std::invalid_argument);
  CHECK_THROWS_AS(concat(both, bad), std::invalid_argument);
}
