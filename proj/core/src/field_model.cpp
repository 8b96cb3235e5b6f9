#include "cinn/field_model.hpp"

namespace cinn {

std::vector<ad::Mat> record_blocks(ad::MatrixTape& tape, std::span<const ParamBlock> blocks, bool as_leaves) {
  std::vector<ad::Mat> nodes;
  nodes.reserve(blocks.size());
  for (const ParamBlock& b : blocks) {
    Eigen::Map<const Eigen::MatrixXd> view(b.data, b.rows, b.cols);
    nodes.push_back(as_leaves ? tape.leaf(view) : tape.constant(view));
  }
  return nodes;
}

void gather_gradient(const ad::MatrixTape& tape, std::span<const ad::Mat> nodes, std::span<double> grad) {
  std::size_t k = 0;
  for (const ad::Mat& node : nodes) {
    const Eigen::MatrixXd g = tape.adjoint(node);
    if (k + static_cast<std::size_t>(g.size()) > grad.size()) throw std::invalid_argument("gather_gradient: buffer too small");
    std::copy(g.data(), g.data() + g.size(), grad.begin() + static_cast<std::ptrdiff_t>(k));
    k += static_cast<std::size_t>(g.size());
  }
}

PlainNetwork::PlainNetwork(ParamSet params) : params_(std::move(params)) {
  if (params_.input_dim() != 2) throw std::invalid_argument("PlainNetwork expects (x, t) input");
}

ad::Mat PlainNetwork::evaluate(ad::MatrixTape& tape, std::span<const ad::Mat> params, const Points& points) const {
  BoundParams bound = take_bound(params, params_.layers().size());
  return forward(bound, tape.constant(points.stacked()));
}

ad::MatJet PlainNetwork::evaluate_directional(ad::MatrixTape& tape, std::span<const ad::Mat> params,
                                              const Points& points, ad::Mat dx, ad::Mat dt) const {
  BoundParams bound = take_bound(params, params_.layers().size());
  const Eigen::Index n = points.size();
  ad::MatJet input{tape.constant(points.stacked()), concat_rows(tape.broadcast(dx, 1, n), tape.broadcast(dt, 1, n))};
  return forward(bound, input);
}

Eigen::MatrixXd PlainNetwork::predict(const Points& points) const { return cinn::evaluate(params_, points.stacked()); }

}  // namespace cinn
