#include "cinn/characteristics.hpp"

#include <cmath>
#include <string>

namespace cinn {

AdvectionHead::AdvectionHead(std::vector<double> velocity, bool trainable) : trainable_(trainable) {
  if (velocity.empty()) throw std::invalid_argument("AdvectionHead: empty velocity");
  time_weight_.reserve(velocity.size());
  for (double v : velocity) time_weight_.push_back(-v);
}

std::vector<double> AdvectionHead::velocity() const {
  std::vector<double> v;
  v.reserve(time_weight_.size());
  for (double w : time_weight_) v.push_back(-w);
  return v;
}

void AdvectionHead::set_velocity(std::span<const double> velocity) {
  if (velocity.size() != time_weight_.size()) throw std::invalid_argument("AdvectionHead: velocity dimension mismatch");
  for (std::size_t i = 0; i < velocity.size(); ++i) time_weight_[i] = -velocity[i];
}

TapedAdvectionHead bind(ad::Tape& tape, const AdvectionHead& head) {
  TapedAdvectionHead taped;
  for (double w : head.time_weights()) {
    taped.time_weight.push_back(head.trainable() ? ad::Var::leaf(tape, w) : ad::Var::constant(tape, w));
  }
  return taped;
}

AcousticsDecomposition acoustics_decomposition(double K0, double c0) {
  if (!(K0 > 0.0) || !(c0 > 0.0)) {
    throw std::invalid_argument("acoustics_decomposition: K0 and c0 must be positive");
  }
  AcousticsDecomposition d;
  const double Z0 = K0 / c0;
  d.impedance = Z0;
  d.eigenvalues << -c0, c0;
  d.recombiner << -Z0, Z0, 1.0, 1.0;
  d.inverse << -1.0, Z0, 1.0, Z0;
  d.inverse /= 2.0 * Z0;
  return d;
}

SystemHead::SystemHead(Eigen::VectorXd eigenvalues, Eigen::MatrixXd recombiner, std::vector<ParamSet> branches)
    : eigenvalues_(std::move(eigenvalues)), recombiner_(std::move(recombiner)), branches_(std::move(branches)) {
  const Eigen::Index m = eigenvalues_.size();
  if (m == 0) throw std::invalid_argument("SystemHead: no eigenvalues");
  if (recombiner_.rows() != m || recombiner_.cols() != m) {
    throw std::invalid_argument("SystemHead: recombiner must be " + std::to_string(m) + "x" + std::to_string(m));
  }
  if (static_cast<Eigen::Index>(branches_.size()) != m) throw std::invalid_argument("SystemHead: one branch per eigenvalue");
  for (const ParamSet& b : branches_) {
    if (b.layers().empty() || b.input_dim() != 1 || b.output_dim() != 1) {
      throw std::invalid_argument("SystemHead: branches must map 1 -> 1");
    }
  }
  // Scale-aware singularity test: |det R| against the product of column norms.
  double scale = 1.0;
  for (Eigen::Index c = 0; c < m; ++c) scale *= recombiner_.col(c).norm();
  if (!(scale > 0.0) || std::abs(recombiner_.determinant()) <= 1e-12 * scale) {
    throw std::invalid_argument("SystemHead: recombiner is singular");
  }
}

// ---- AdvectionCinn ----

AdvectionCinn::AdvectionCinn(AdvectionHead head, ParamSet body) : head_(std::move(head)), body_(std::move(body)) {
  if (head_.dim() != 1) throw std::invalid_argument("AdvectionCinn: one spatial dimension only");
  if (body_.layers().empty() || body_.input_dim() != 1 || body_.output_dim() != 1) {
    throw std::invalid_argument("AdvectionCinn: body must map 1 -> 1");
  }
}

void AdvectionCinn::append_blocks(std::vector<ParamBlock>& out) {
  if (head_.trainable()) out.push_back(ParamBlock{head_.time_weights().data(), 1, 1});
  body_.append_blocks(out);
}

ad::Mat AdvectionCinn::time_weight(ad::MatrixTape& tape, std::span<const ad::Mat>& params) const {
  if (!head_.trainable()) return tape.constant(head_.time_weights()[0]);
  if (params.empty()) throw std::invalid_argument("AdvectionCinn: missing time weight node");
  ad::Mat w = params.front();
  params = params.subspan(1);
  return w;
}

ad::Mat AdvectionCinn::evaluate(ad::MatrixTape& tape, std::span<const ad::Mat> params, const Points& points) const {
  ad::Mat w = time_weight(tape, params);
  BoundParams body = take_bound(params, body_.layers().size());
  ad::Mat xi = tape.constant(Eigen::MatrixXd(points.x)) + scalar_mul(w, tape.constant(Eigen::MatrixXd(points.t)));
  return forward(body, xi);
}

ad::MatJet AdvectionCinn::evaluate_directional(ad::MatrixTape& tape, std::span<const ad::Mat> params,
                                               const Points& points, ad::Mat dx, ad::Mat dt) const {
  ad::Mat w = time_weight(tape, params);
  BoundParams body = take_bound(params, body_.layers().size());
  ad::Mat xi = tape.constant(Eigen::MatrixXd(points.x)) + scalar_mul(w, tape.constant(Eigen::MatrixXd(points.t)));
  ad::Mat dxi = tape.broadcast(dx + w * dt, 1, points.size());
  return forward(body, ad::MatJet{xi, dxi});
}

Eigen::MatrixXd AdvectionCinn::predict(const Points& points) const {
  Eigen::MatrixXd xi = points.x + head_.time_weights()[0] * points.t;
  return cinn::evaluate(body_, xi);
}

// ---- SystemCinn ----

SystemCinn::SystemCinn(SystemHead head) : head_(std::move(head)) {}

void SystemCinn::append_blocks(std::vector<ParamBlock>& out) {
  for (ParamSet& b : head_.branches()) b.append_blocks(out);
}

std::size_t SystemCinn::block_count() const {
  std::size_t n = 0;
  for (const ParamSet& b : head_.branches()) n += 2 * b.layers().size();
  return n;
}

namespace {

template <class T>
T recombine(const Eigen::MatrixXd& R, const std::vector<T>& w, Eigen::Index r) {
  T acc = R(r, 0) * w[0];
  for (std::size_t i = 1; i < w.size(); ++i) acc = acc + R(r, static_cast<Eigen::Index>(i)) * w[i];
  return acc;
}

}  // namespace

ad::Mat SystemCinn::evaluate(ad::MatrixTape& tape, std::span<const ad::Mat> params, const Points& points) const {
  std::vector<ad::Mat> w;
  for (std::size_t i = 0; i < head_.size(); ++i) {
    BoundParams branch = take_bound(params, head_.branches()[i].layers().size());
    const double lambda = head_.eigenvalues()(static_cast<Eigen::Index>(i));
    w.push_back(forward(branch, tape.constant(Eigen::MatrixXd(points.x - lambda * points.t))));
  }
  ad::Mat u = recombine(head_.recombiner(), w, 0);
  for (Eigen::Index r = 1; r < head_.recombiner().rows(); ++r) u = concat_rows(u, recombine(head_.recombiner(), w, r));
  return u;
}

ad::MatJet SystemCinn::evaluate_directional(ad::MatrixTape& tape, std::span<const ad::Mat> params,
                                            const Points& points, ad::Mat dx, ad::Mat dt) const {
  std::vector<ad::MatJet> w;
  for (std::size_t i = 0; i < head_.size(); ++i) {
    BoundParams branch = take_bound(params, head_.branches()[i].layers().size());
    const double lambda = head_.eigenvalues()(static_cast<Eigen::Index>(i));
    ad::MatJet xi{tape.constant(Eigen::MatrixXd(points.x - lambda * points.t)),
                  tape.broadcast(dx - lambda * dt, 1, points.size())};
    w.push_back(forward(branch, xi));
  }
  ad::MatJet u = recombine(head_.recombiner(), w, 0);
  for (Eigen::Index r = 1; r < head_.recombiner().rows(); ++r) {
    ad::MatJet next = recombine(head_.recombiner(), w, r);
    u = {concat_rows(u.value, next.value), concat_rows(u.tangent, next.tangent)};
  }
  return u;
}

Eigen::MatrixXd SystemCinn::predict(const Points& points) const {
  Eigen::MatrixXd w(static_cast<Eigen::Index>(head_.size()), points.size());
  for (std::size_t i = 0; i < head_.size(); ++i) {
    const double lambda = head_.eigenvalues()(static_cast<Eigen::Index>(i));
    Eigen::MatrixXd xi = points.x - lambda * points.t;
    w.row(static_cast<Eigen::Index>(i)) = cinn::evaluate(head_.branches()[i], xi);
  }
  return head_.recombiner() * w;
}

}  // namespace cinn
