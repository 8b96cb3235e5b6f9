#pragma once

// Characteristic-coordinate heads.
//
// A head maps (x, t) to characteristic labels before the body network sees
// them, so any body yields an exact solution of the target transport
// equation. AdvectionHead: xi = x - v t. SystemHead: one branch per
// eigenvalue of a diagonalised linear system, recombined by its eigenvector
// matrix. RecursiveHead: an unrolled fixed point for u_t + u u_x = 0.

#include "cinn/autodiff.hpp"
#include "cinn/field_model.hpp"
#include "cinn/network.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace cinn {

class AdvectionHead {
 public:
  explicit AdvectionHead(std::vector<double> velocity, bool trainable = false);

  std::size_t dim() const { return time_weight_.size(); }
  bool trainable() const { return trainable_; }
  std::vector<double> velocity() const;
  void set_velocity(std::span<const double> velocity);

  /// The characteristic layer stores -v as the weight on t.
  std::span<double> time_weights() { return time_weight_; }
  std::span<const double> time_weights() const { return time_weight_; }

 private:
  std::vector<double> time_weight_;
  bool trainable_ = false;
};

struct TapedAdvectionHead {
  std::vector<ad::Var> time_weight;
};

/// Time weights become leaves when the head is trainable, constants otherwise.
TapedAdvectionHead bind(ad::Tape& tape, const AdvectionHead& head);

/// xi_i = x_i + w_i t with w = -v.
template <class E>
std::vector<E> advection_transform(const TapedAdvectionHead& head, std::span<const E> x, const E& t) {
  if (x.size() != head.time_weight.size()) {
    throw std::invalid_argument("advection_transform: x has " + std::to_string(x.size()) + " components, head has " +
                                std::to_string(head.time_weight.size()));
  }
  std::vector<E> xi;
  xi.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) xi.push_back(x[i] + head.time_weight[i] * t);
  return xi;
}

template <class E>
E cinn_forward(const TapedAdvectionHead& head, const TapedParams& body, std::span<const E> x, const E& t) {
  std::vector<E> xi = advection_transform<E>(head, x, t);
  return forward<E>(body, xi).at(0);
}

struct AcousticsDecomposition {
  Eigen::Vector2d eigenvalues;  // (-c0, c0)
  Eigen::Matrix2d recombiner;   // R, columns are eigenvectors
  Eigen::Matrix2d inverse;      // R^-1
  double impedance = 0.0;       // Z0 = K0 / c0
};

/// Throws std::invalid_argument unless K0 > 0 and c0 > 0.
AcousticsDecomposition acoustics_decomposition(double K0, double c0);

class SystemHead {
 public:
  /// Branch i maps one characteristic coordinate to one scalar. Throws
  /// std::invalid_argument on shape mismatch or a near-singular recombiner.
  SystemHead(Eigen::VectorXd eigenvalues, Eigen::MatrixXd recombiner, std::vector<ParamSet> branches);

  std::size_t size() const { return branches_.size(); }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& recombiner() const { return recombiner_; }
  std::vector<ParamSet>& branches() { return branches_; }
  const std::vector<ParamSet>& branches() const { return branches_; }

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd recombiner_;
  std::vector<ParamSet> branches_;
};

/// u = R w with w_i = branch_i(x - lambda_i t).
template <class E>
std::vector<E> system_forward(const SystemHead& head, std::span<const TapedParams> branches, const E& x, const E& t) {
  const std::size_t m = head.size();
  if (branches.size() != m) throw std::invalid_argument("system_forward: branch count mismatch");
  std::vector<E> w;
  w.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const E xi = x - t * head.eigenvalues()(static_cast<Eigen::Index>(i));
    const E in[1] = {xi};
    w.push_back(forward<E>(branches[i], std::span<const E>(in)).at(0));
  }
  const Eigen::MatrixXd& R = head.recombiner();
  std::vector<E> u;
  u.reserve(m);
  for (std::size_t r = 0; r < m; ++r) {
    E acc = w[0] * R(static_cast<Eigen::Index>(r), 0);
    for (std::size_t i = 1; i < m; ++i) acc = acc + w[i] * R(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i));
    u.push_back(acc);
  }
  return u;
}

struct RecursiveHead {
  int unroll_depth = 4;
  ParamSet body;  // 1 -> 1
};

/// u_0 = f(x), u_{k+1} = f(x - u_k t), returns u_K.
template <class E>
E recursive_forward(const TapedParams& body, int depth, const E& x, const E& t) {
  if (depth < 1) throw std::invalid_argument("recursive_forward: unroll depth must be >= 1");
  const E x0[1] = {x};
  E u = forward<E>(body, std::span<const E>(x0)).at(0);
  for (int k = 0; k < depth; ++k) {
    const E xi[1] = {x - u * t};
    u = forward<E>(body, std::span<const E>(xi)).at(0);
  }
  return u;
}

// ---- Batched models -----------------------------------------------------------

/// One spatial dimension, body 1 -> 1. Blocks: [time weight if trainable], body.
class AdvectionCinn final : public FieldModel {
 public:
  AdvectionCinn(AdvectionHead head, ParamSet body);

  std::string kind() const override { return "advection-cinn"; }
  int outputs() const override { return 1; }
  void append_blocks(std::vector<ParamBlock>& out) override;
  std::size_t block_count() const override { return (head_.trainable() ? 1 : 0) + 2 * body_.layers().size(); }

  ad::Mat evaluate(ad::MatrixTape& tape, std::span<const ad::Mat> params, const Points& points) const override;
  ad::MatJet evaluate_directional(ad::MatrixTape& tape, std::span<const ad::Mat> params, const Points& points,
                                  ad::Mat dx, ad::Mat dt) const override;
  Eigen::MatrixXd predict(const Points& points) const override;
  std::optional<double> velocity() const override { return head_.velocity().front(); }
  std::unique_ptr<FieldModel> clone() const override { return std::make_unique<AdvectionCinn>(*this); }

  const AdvectionHead& head() const { return head_; }
  AdvectionHead& head() { return head_; }
  const ParamSet& body() const { return body_; }
  ParamSet& body() { return body_; }

 private:
  ad::Mat time_weight(ad::MatrixTape& tape, std::span<const ad::Mat>& params) const;

  AdvectionHead head_;
  ParamSet body_;
};

class SystemCinn final : public FieldModel {
 public:
  explicit SystemCinn(SystemHead head);

  std::string kind() const override { return "system-cinn"; }
  int outputs() const override { return static_cast<int>(head_.size()); }
  void append_blocks(std::vector<ParamBlock>& out) override;
  std::size_t block_count() const override;

  ad::Mat evaluate(ad::MatrixTape& tape, std::span<const ad::Mat> params, const Points& points) const override;
  ad::MatJet evaluate_directional(ad::MatrixTape& tape, std::span<const ad::Mat> params, const Points& points,
                                  ad::Mat dx, ad::Mat dt) const override;
  Eigen::MatrixXd predict(const Points& points) const override;
  std::unique_ptr<FieldModel> clone() const override { return std::make_unique<SystemCinn>(*this); }

  const SystemHead& head() const { return head_; }
  SystemHead& head() { return head_; }

 private:
  SystemHead head_;
};

}  // namespace cinn
