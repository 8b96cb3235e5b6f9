#pragma once

// Batched field models u(x, t) evaluated on a MatrixTape.
//
// A model owns its trainable storage and exposes it as ParamBlocks. During a
// training step the trainer records one tape leaf per block (in block order)
// and hands the model the slice of leaves it owns.

#include "cinn/matrix_tape.hpp"
#include "cinn/network.hpp"
#include "cinn/points.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cinn {

class FieldModel {
 public:
  virtual ~FieldModel() = default;

  virtual std::string kind() const = 0;
  virtual int outputs() const = 0;
  virtual void append_blocks(std::vector<ParamBlock>& out) = 0;
  virtual std::size_t block_count() const = 0;

  /// outputs x n values.
  virtual ad::Mat evaluate(ad::MatrixTape& tape, std::span<const ad::Mat> params, const Points& points) const = 0;
  /// Values and the directional derivative along (dx, dt); both 1x1 nodes.
  virtual ad::MatJet evaluate_directional(ad::MatrixTape& tape, std::span<const ad::Mat> params, const Points& points,
                                          ad::Mat dx, ad::Mat dt) const = 0;
  /// Tape-free evaluation, outputs x n.
  virtual Eigen::MatrixXd predict(const Points& points) const = 0;

  /// Advection velocity carried by the architecture, if any.
  virtual std::optional<double> velocity() const { return std::nullopt; }

  virtual std::unique_ptr<FieldModel> clone() const = 0;
};

/// Records every block of `blocks` on the tape, as leaves or as constants.
std::vector<ad::Mat> record_blocks(ad::MatrixTape& tape, std::span<const ParamBlock> blocks, bool as_leaves);

/// Copies d(output)/d(block) for every recorded block into `grad` (block order,
/// column-major within each block).
void gather_gradient(const ad::MatrixTape& tape, std::span<const ad::Mat> nodes, std::span<double> grad);

/// Plain network on the stacked input (x, t); used by the NN and PINN solvers.
class PlainNetwork final : public FieldModel {
 public:
  explicit PlainNetwork(ParamSet params);

  std::string kind() const override { return "plain"; }
  int outputs() const override { return static_cast<int>(params_.output_dim()); }
  void append_blocks(std::vector<ParamBlock>& out) override { params_.append_blocks(out); }
  std::size_t block_count() const override { return 2 * params_.layers().size(); }

  ad::Mat evaluate(ad::MatrixTape& tape, std::span<const ad::Mat> params, const Points& points) const override;
  ad::MatJet evaluate_directional(ad::MatrixTape& tape, std::span<const ad::Mat> params, const Points& points,
                                  ad::Mat dx, ad::Mat dt) const override;
  Eigen::MatrixXd predict(const Points& points) const override;
  std::unique_ptr<FieldModel> clone() const override { return std::make_unique<PlainNetwork>(*this); }

  const ParamSet& params() const { return params_; }
  ParamSet& params() { return params_; }

 private:
  ParamSet params_;
};

}  // namespace cinn
