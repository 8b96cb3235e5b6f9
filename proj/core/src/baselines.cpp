#include "cinn/baselines.hpp"

namespace cinn {

ad::Var residual_loss(std::span<const ad::Var> residuals) {
  if (residuals.empty()) throw std::invalid_argument("residual_loss: empty collocation set");
  ad::Var acc = square(residuals[0]);
  for (std::size_t i = 1; i < residuals.size(); ++i) acc = acc + square(residuals[i]);
  return acc * (1.0 / static_cast<double>(residuals.size()));
}

ad::Var residual_loss(std::span<const ad::Var> r1, std::span<const ad::Var> r2) {
  return residual_loss(r1) + residual_loss(r2);
}

ad::Var total_loss(std::span<const ad::Var> parts, std::span<const double> weights) {
  if (parts.empty()) throw std::invalid_argument("total_loss: no parts");
  if (!weights.empty() && weights.size() != parts.size()) throw std::invalid_argument("total_loss: weight count mismatch");
  auto term = [&](std::size_t i) { return weights.empty() ? parts[i] : parts[i] * weights[i]; };
  ad::Var acc = term(0);
  for (std::size_t i = 1; i < parts.size(); ++i) acc = acc + term(i);
  return acc;
}

ad::Mat advection_residual(const FieldModel& model, ad::MatrixTape& tape, std::span<const ad::Mat> params,
                           const Points& points, ad::Mat velocity) {
  if (model.outputs() != 1) throw std::invalid_argument("advection_residual: scalar model required");
  return model.evaluate_directional(tape, params, points, velocity, tape.constant(1.0)).tangent;
}

std::pair<ad::Mat, ad::Mat> acoustics_residuals(const FieldModel& model, ad::MatrixTape& tape,
                                                std::span<const ad::Mat> params, const Points& points, double K0,
                                                double c0) {
  if (model.outputs() != 2) throw std::invalid_argument("acoustics_residuals: (p, v) model required");
  ad::Mat ux = model.evaluate_directional(tape, params, points, tape.constant(1.0), tape.constant(0.0)).tangent;
  ad::Mat ut = model.evaluate_directional(tape, params, points, tape.constant(0.0), tape.constant(1.0)).tangent;
  ad::Mat r1 = tape.row(ut, 0) + K0 * tape.row(ux, 1);
  ad::Mat r2 = tape.row(ut, 1) + (c0 * c0 / K0) * tape.row(ux, 0);
  return {r1, r2};
}

ad::Mat residual_loss(std::span<const ad::Mat> residuals, Eigen::Index count) {
  if (residuals.empty() || residuals.front().cols() == 0) throw std::invalid_argument("residual_loss: empty collocation set");
  const double scale = 1.0 / static_cast<double>(count > 0 ? count : residuals.front().cols());
  ad::Mat acc = sum(square(residuals[0]));
  for (std::size_t i = 1; i < residuals.size(); ++i) acc = acc + sum(square(residuals[i]));
  return scale * acc;
}

ad::Mat periodic_penalty(const FieldModel& model, ad::MatrixTape& tape, std::span<const ad::Mat> params,
                         const Eigen::RowVectorXd& times, double x_left, double x_right, Eigen::Index count) {
  if (times.size() == 0) throw std::invalid_argument("periodic_penalty: empty time set");
  const Eigen::Index n = times.size();
  ad::Mat left = model.evaluate(tape, params, Points(Eigen::RowVectorXd::Constant(n, x_left), times));
  ad::Mat right = model.evaluate(tape, params, Points(Eigen::RowVectorXd::Constant(n, x_right), times));
  return (1.0 / static_cast<double>(count > 0 ? count : n)) * sum(square(left - right));
}

ad::Mat total_loss(std::span<const ad::Mat> parts, std::span<const double> weights) {
  if (parts.empty()) throw std::invalid_argument("total_loss: no parts");
  if (!weights.empty() && weights.size() != parts.size()) throw std::invalid_argument("total_loss: weight count mismatch");
  auto term = [&](std::size_t i) { return weights.empty() ? parts[i] : weights[i] * parts[i]; };
  ad::Mat acc = term(0);
  for (std::size_t i = 1; i < parts.size(); ++i) acc = acc + term(i);
  return acc;
}

namespace {

std::vector<ad::Mat> constants_for(FieldModel& model, ad::MatrixTape& tape) {
  std::vector<ParamBlock> blocks;
  model.append_blocks(blocks);
  return record_blocks(tape, blocks, false);
}

}  // namespace

Eigen::MatrixXd advection_residual_values(FieldModel& model, const Points& points, double velocity) {
  ad::MatrixTape tape;
  std::vector<ad::Mat> params = constants_for(model, tape);
  return advection_residual(model, tape, params, points, tape.constant(velocity)).value();
}

Eigen::MatrixXd acoustics_residual_values(FieldModel& model, const Points& points, double K0, double c0) {
  ad::MatrixTape tape;
  std::vector<ad::Mat> params = constants_for(model, tape);
  auto [r1, r2] = acoustics_residuals(model, tape, params, points, K0, c0);
  Eigen::MatrixXd out(2, points.size());
  out.row(0) = r1.value();
  out.row(1) = r2.value();
  return out;
}

}  // namespace cinn
