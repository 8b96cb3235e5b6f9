#pragma once

// Fully-connected tanh networks: u(x) = W_{L-1} tanh(... tanh(W_0 x + b_0) ...) + b_{L-1}.

#include "cinn/autodiff.hpp"
#include "cinn/matrix_tape.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cinn {

struct Layer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Contiguous trainable storage handed to the optimizer (column-major).
struct ParamBlock {
  double* data = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Index size() const { return rows * cols; }
};

class ParamSet {
 public:
  ParamSet() = default;
  /// Throws std::invalid_argument if adjacent layer shapes disagree.
  explicit ParamSet(std::vector<Layer> layers);

  /// Layer widths, input first: (in, h_1, ..., out).
  std::vector<Eigen::Index> dims() const;
  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;
  std::size_t parameter_count() const;

  /// Layer by layer: weight row-major, then bias.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  /// Appends (weight, bias) per layer.
  void append_blocks(std::vector<ParamBlock>& out);

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  bool operator==(const ParamSet& other) const;

 private:
  std::vector<Layer> layers_;
};

/// Weights ~ N(0, 2 / (fan_in + fan_out)), biases zero. Throws
/// std::invalid_argument for fewer than two dims or a non-positive width.
ParamSet glorot_init(std::span<const int> dims, std::uint64_t seed);
ParamSet zero_init(std::span<const int> dims);

/// Hidden-layer stack: (input, width x hidden_layers, output).
std::vector<int> mlp_dims(int input, int hidden_layers, int width, int output);

struct Dataset {
  Eigen::MatrixXd inputs;   // d x n
  Eigen::MatrixXd targets;  // m x n
  std::optional<Eigen::RowVectorXd> weights;

  Eigen::Index size() const { return inputs.cols(); }
  /// Throws std::invalid_argument on length mismatch.
  void validate() const;
};

// ---- Scalar-tape evaluation -------------------------------------------------

struct TapedLayer {
  Eigen::Index in = 0;
  Eigen::Index out = 0;
  std::vector<ad::Var> weight;  // row-major
  std::vector<ad::Var> bias;
};

struct TapedParams {
  std::vector<TapedLayer> layers;

  Eigen::Index input_dim() const { return layers.front().in; }
  Eigen::Index output_dim() const { return layers.back().out; }
};

/// Records every parameter as a leaf.
TapedParams bind(ad::Tape& tape, const ParamSet& params);

/// Gradient in ParamSet::flatten() order.
std::vector<double> gradient(const TapedParams& params, std::span<const double> adjoints);

/// Works for ad::Var and ad::Dual inputs.
template <class E>
std::vector<E> forward(const TapedParams& params, std::span<const E> input) {
  if (params.layers.empty()) throw std::invalid_argument("forward: empty network");
  if (static_cast<Eigen::Index>(input.size()) != params.input_dim()) {
    throw std::invalid_argument("forward: input dimension " + std::to_string(input.size()) + ", network expects " +
                                std::to_string(params.input_dim()));
  }
  std::vector<E> h(input.begin(), input.end());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const TapedLayer& layer = params.layers[l];
    const bool hidden = l + 1 < params.layers.size();
    std::vector<E> z;
    z.reserve(static_cast<std::size_t>(layer.out));
    for (Eigen::Index j = 0; j < layer.out; ++j) {
      E acc = E(layer.bias[j]);
      for (Eigen::Index i = 0; i < layer.in; ++i) acc = acc + layer.weight[j * layer.in + i] * h[i];
      z.push_back(hidden ? tanh(acc) : acc);
    }
    h = std::move(z);
  }
  return h;
}

/// (1/n) sum_i |y_i - u_i|^2 with `dim` components per point, stored point-major.
ad::Var mse_loss(std::span<const ad::Var> predictions, std::span<const double> targets, std::size_t dim = 1);

// ---- Batched evaluation -----------------------------------------------------

struct BoundLayer {
  ad::Mat weight;
  ad::Mat bias;
};

using BoundParams = std::vector<BoundLayer>;

/// Consumes two nodes per layer from the front of `nodes` (see append_blocks).
BoundParams take_bound(std::span<const ad::Mat>& nodes, std::size_t layers);
BoundParams bind(ad::MatrixTape& tape, const ParamSet& params);

ad::Mat forward(const BoundParams& params, ad::Mat input);
ad::MatJet forward(const BoundParams& params, const ad::MatJet& input);

/// Tape-free evaluation over columns of `inputs`.
Eigen::MatrixXd evaluate(const ParamSet& params, const Eigen::MatrixXd& inputs);

/// Squared error summed over output rows, averaged over columns, with
/// optional per-column weights. A positive `count` replaces the column count
/// as the divisor, for losses accumulated over column chunks.
ad::Mat mse_loss(ad::Mat predictions, const Eigen::MatrixXd& targets,
                 const std::optional<Eigen::RowVectorXd>& weights = std::nullopt, Eigen::Index count = 0);

// ---- Checkpoints ------------------------------------------------------------

void save_checkpoint(const ParamSet& params, const std::filesystem::path& path);
ParamSet load_checkpoint(const std::filesystem::path& path);
std::string to_checkpoint_json(const ParamSet& params);
ParamSet from_checkpoint_json(const std::string& text);

}  // namespace cinn
