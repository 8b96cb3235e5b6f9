#pragma once

// PDE residuals, the periodic boundary penalty and loss composition.
//
// Scalar overloads take a model callable on the scalar tape:
//   advection:  (Dual x, Dual t) -> Dual
//   acoustics:  (Dual x, Dual t) -> std::array<Dual, 2>   (p, v)
//   penalty:    (Var x, Var t)   -> Var
// Batched overloads take a FieldModel and its bound parameter nodes.

#include "cinn/autodiff.hpp"
#include "cinn/field_model.hpp"
#include "cinn/matrix_tape.hpp"
#include "cinn/points.hpp"

#include <array>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cinn {

// ---- Scalar tape ------------------------------------------------------------

template <class Model>
ad::Var advection_residual(Model&& model, ad::Tape& tape, double x, double t, double v) {
  const double in[2] = {x, t};
  std::vector<ad::Dual> dx = ad::dual_lift(tape, in, 0);
  ad::Var u_x = model(dx[0], dx[1]).tangent;
  std::vector<ad::Dual> dt = ad::dual_lift(tape, in, 1);
  ad::Var u_t = model(dt[0], dt[1]).tangent;
  return u_t + v * u_x;
}

template <class Model>
std::pair<ad::Var, ad::Var> acoustics_residuals(Model&& model, ad::Tape& tape, double x, double t, double K0,
                                                double c0) {
  const double in[2] = {x, t};
  std::vector<ad::Dual> dx = ad::dual_lift(tape, in, 0);
  const std::array<ad::Dual, 2> ux = model(dx[0], dx[1]);
  std::vector<ad::Dual> dt = ad::dual_lift(tape, in, 1);
  const std::array<ad::Dual, 2> ut = model(dt[0], dt[1]);
  ad::Var r1 = ut[0].tangent + K0 * ux[1].tangent;
  ad::Var r2 = ut[1].tangent + (c0 * c0 / K0) * ux[0].tangent;
  return {r1, r2};
}

/// (1/n) sum r_i^2. Throws std::invalid_argument when empty.
ad::Var residual_loss(std::span<const ad::Var> residuals);
/// Sum of per-equation residual mean squares.
ad::Var residual_loss(std::span<const ad::Var> r1, std::span<const ad::Var> r2);

template <class Model>
ad::Var periodic_penalty(Model&& model, ad::Tape& tape, std::span<const double> times, double x_left, double x_right) {
  if (times.empty()) throw std::invalid_argument("periodic_penalty: empty time set");
  ad::Var acc = ad::Var::constant(tape, 0.0);
  for (double tb : times) {
    ad::Var t = ad::Var::constant(tape, tb);
    ad::Var gap = model(ad::Var::constant(tape, x_left), t) - model(ad::Var::constant(tape, x_right), t);
    acc = acc + square(gap);
  }
  return acc * (1.0 / static_cast<double>(times.size()));
}

/// sum_i w_i * part_i; weights default to 1. Throws on no parts or a weight
/// count mismatch.
ad::Var total_loss(std::span<const ad::Var> parts, std::span<const double> weights = {});

// ---- Batched ----------------------------------------------------------------

/// u_t + v u_x at every point, as one directional derivative along (v, 1).
/// `velocity` is a 1x1 node so a trainable estimate receives gradient.
ad::Mat advection_residual(const FieldModel& model, ad::MatrixTape& tape, std::span<const ad::Mat> params,
                           const Points& points, ad::Mat velocity);

/// (p_t + K0 v_x, v_t + (c0^2/K0) p_x), each 1 x n.
std::pair<ad::Mat, ad::Mat> acoustics_residuals(const FieldModel& model, ad::MatrixTape& tape,
                                                std::span<const ad::Mat> params, const Points& points, double K0,
                                                double c0);

/// Sum of squares of every residual node divided by `count` (0: column count
/// of the first node). Throws on an empty set.
ad::Mat residual_loss(std::span<const ad::Mat> residuals, Eigen::Index count = 0);

/// (1/count) sum |u(x_left, t_b) - u(x_right, t_b)|^2; count 0 means times.size().
ad::Mat periodic_penalty(const FieldModel& model, ad::MatrixTape& tape, std::span<const ad::Mat> params,
                         const Eigen::RowVectorXd& times, double x_left, double x_right, Eigen::Index count = 0);

ad::Mat total_loss(std::span<const ad::Mat> parts, std::span<const double> weights = {});

/// Residual values of a trained model, tape-free for the caller. Rows: one per
/// equation (1 for advection, 2 for acoustics).
Eigen::MatrixXd advection_residual_values(FieldModel& model, const Points& points, double velocity);
Eigen::MatrixXd acoustics_residual_values(FieldModel& model, const Points& points, double K0, double c0);

}  // namespace cinn
