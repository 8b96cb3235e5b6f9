#pragma once

// Column-batched reverse-mode tape.
//
// Same recording model as the scalar Tape, but each node holds a dense
// matrix: network activations are (width x points), so one node covers a
// whole layer over a whole batch of points. Training uses this engine; the
// scalar Tape stays the reference that tests compare it against.

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cinn::ad {

using Matrix = Eigen::MatrixXd;
using MatId = std::size_t;

enum class MatOp : std::uint8_t {
  leaf,
  constant,
  add,
  sub,
  mul,           // elementwise
  scale,         // a * c, c a recorded double
  scalar_mul,    // s(1x1) * a
  neg,
  tanh,
  tanh_tangent,  // (1 - h^2) * dz, the tangent rule of tanh given h = tanh(z)
  square,
  exp,
  sin,
  cos,
  matmul,
  add_bias,      // a + b broadcast over columns, b is (rows x 1)
  concat_rows,
  broadcast,     // (1x1) -> (rows x cols)
  row,
  mean,          // mean of all entries -> (1x1)
  sum,           // sum of all entries -> (1x1)
};

struct MatNode {
  Matrix value;
  MatOp op = MatOp::leaf;
  std::uint8_t arity = 0;
  bool needs_grad = false;
  std::array<MatId, 2> parents{};
  double scalar = 0.0;
  Eigen::Index index = 0;
};

class MatrixTape;

class Mat {
 public:
  Mat() = default;
  Mat(MatrixTape& tape, MatId id) : tape_(&tape), id_(id) {}

  MatrixTape& tape() const { return *tape_; }
  MatId id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

 private:
  MatrixTape* tape_ = nullptr;
  MatId id_ = 0;
};

class MatrixTape {
 public:
  Mat leaf(Matrix value);
  Mat constant(Matrix value);
  Mat constant(double value, Eigen::Index rows = 1, Eigen::Index cols = 1);

  Mat record(MatOp op, Mat a);
  Mat record(MatOp op, Mat a, Mat b);
  Mat scale(Mat a, double c);
  Mat broadcast(Mat a, Eigen::Index rows, Eigen::Index cols);
  Mat row(Mat a, Eigen::Index i);

  /// Reverse sweep from `output`, which must be 1x1. Results are read back
  /// with adjoint() until the next backward() or reset().
  void backward(Mat output);
  /// d(output)/d(node); zeros when the node does not feed the output.
  Matrix adjoint(Mat node) const;

  /// Drops all nodes. Node and adjoint storage is kept and reused, so a loop
  /// that records the same shapes every iteration stops allocating.
  void reset();
  std::size_t size() const { return count_; }
  const MatNode& node(MatId id) const;

 private:
  MatNode& slot(MatOp op, std::uint8_t arity);
  void check(Mat a) const;

  std::vector<MatNode> nodes_;
  std::size_t count_ = 0;
  std::vector<Matrix> adjoints_;
  std::vector<char> has_adjoint_;
  bool adjoints_valid_ = false;
};

/// Elementwise tanh, vectorized. Absolute error is about 1e-16 everywhere;
/// relative accuracy degrades only for |x| far below 1e-3.
Matrix fast_tanh(const Matrix& x);
void fast_tanh(const Matrix& x, Matrix& out);

inline const Matrix& Mat::value() const { return tape_->node(id_).value; }

inline const MatNode& MatrixTape::node(MatId id) const {
  if (id >= count_) throw std::out_of_range("matrix node not recorded");
  return nodes_[id];
}

Mat operator+(Mat a, Mat b);
Mat operator-(Mat a, Mat b);
Mat operator*(Mat a, Mat b);  // elementwise
Mat operator-(Mat a);
Mat operator*(double c, Mat a);
Mat operator*(Mat a, double c);
Mat scalar_mul(Mat s, Mat a);
Mat tanh(Mat a);
Mat tanh_tangent(Mat h, Mat dz);
Mat square(Mat a);
Mat exp(Mat a);
Mat sin(Mat a);
Mat cos(Mat a);
Mat matmul(Mat a, Mat b);
Mat add_bias(Mat a, Mat bias);
Mat concat_rows(Mat top, Mat bottom);
Mat mean(Mat a);
Mat sum(Mat a);

/// Value and one directional derivative, both taped.
struct MatJet {
  Mat value;
  Mat tangent;
};

MatJet operator+(const MatJet& a, const MatJet& b);
MatJet operator-(const MatJet& a, const MatJet& b);
MatJet operator*(double c, const MatJet& a);
MatJet scalar_mul(Mat s, const MatJet& a);
MatJet tanh(const MatJet& a);

}  // namespace cinn::ad
