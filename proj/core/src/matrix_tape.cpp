#include "cinn/matrix_tape.hpp"

#include <string>

namespace cinn::ad {
namespace {

bool same_shape(const Matrix& a, const Matrix& b) { return a.rows() == b.rows() && a.cols() == b.cols(); }

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void require(bool ok, const char* what, const Matrix& a, const Matrix& b) {
  if (!ok) throw std::invalid_argument(std::string(what) + ": incompatible shapes " + shape(a) + " and " + shape(b));
}

}  // namespace

void fast_tanh(const Matrix& x, Matrix& out) {
  // Saturates correctly at both ends (exp overflow gives +1, underflow -1).
  out.resize(x.rows(), x.cols());
  out.array() = 1.0 - 2.0 / (1.0 + (2.0 * x.array()).exp());
}

Matrix fast_tanh(const Matrix& x) {
  Matrix out;
  fast_tanh(x, out);
  return out;
}

MatNode& MatrixTape::slot(MatOp op, std::uint8_t arity) {
  if (count_ == nodes_.size()) nodes_.emplace_back();
  MatNode& node = nodes_[count_++];
  node.op = op;
  node.arity = arity;
  node.needs_grad = false;
  node.parents = {0, 0};
  node.scalar = 0.0;
  node.index = 0;
  adjoints_valid_ = false;
  return node;
}

void MatrixTape::reset() {
  count_ = 0;
  adjoints_valid_ = false;
}

void MatrixTape::check(Mat a) const {
  if (&a.tape() != this || a.id() >= count_) throw std::out_of_range("matrix node not on this tape");
}

Mat MatrixTape::leaf(Matrix value) {
  MatNode& node = slot(MatOp::leaf, 0);
  node.value = std::move(value);
  node.needs_grad = true;
  return {*this, count_ - 1};
}

Mat MatrixTape::constant(Matrix value) {
  MatNode& node = slot(MatOp::constant, 0);
  node.value = std::move(value);
  return {*this, count_ - 1};
}

Mat MatrixTape::constant(double value, Eigen::Index rows, Eigen::Index cols) {
  MatNode& node = slot(MatOp::constant, 0);
  node.value.setConstant(rows, cols, value);
  return {*this, count_ - 1};
}

Mat MatrixTape::record(MatOp op, Mat a) {
  check(a);
  MatNode& node = slot(op, 1);
  const MatNode& pa = nodes_[a.id()];
  const Matrix& x = pa.value;
  node.parents[0] = a.id();
  node.needs_grad = pa.needs_grad;
  switch (op) {
    case MatOp::neg: node.value = -x; break;
    case MatOp::tanh: fast_tanh(x, node.value); break;
    case MatOp::square: node.value = x.array().square().matrix(); break;
    case MatOp::exp: node.value = x.array().exp().matrix(); break;
    case MatOp::sin: node.value = x.array().sin().matrix(); break;
    case MatOp::cos: node.value = x.array().cos().matrix(); break;
    case MatOp::mean: node.value.setConstant(1, 1, x.mean()); break;
    case MatOp::sum: node.value.setConstant(1, 1, x.sum()); break;
    default:
      --count_;
      throw std::invalid_argument("not a unary matrix primitive");
  }
  return {*this, count_ - 1};
}

Mat MatrixTape::record(MatOp op, Mat a, Mat b) {
  check(a);
  check(b);
  MatNode& node = slot(op, 2);
  const Matrix& x = nodes_[a.id()].value;
  const Matrix& y = nodes_[b.id()].value;
  node.parents = {a.id(), b.id()};
  node.needs_grad = nodes_[a.id()].needs_grad || nodes_[b.id()].needs_grad;
  try {
    switch (op) {
      case MatOp::add:
        require(same_shape(x, y), "add", x, y);
        node.value = x + y;
        break;
      case MatOp::sub:
        require(same_shape(x, y), "sub", x, y);
        node.value = x - y;
        break;
      case MatOp::mul:
        require(same_shape(x, y), "mul", x, y);
        node.value = x.cwiseProduct(y);
        break;
      case MatOp::scalar_mul:
        require(x.size() == 1, "scalar_mul", x, y);
        node.value = x(0, 0) * y;
        break;
      case MatOp::tanh_tangent:
        require(same_shape(x, y), "tanh_tangent", x, y);
        node.value = ((1.0 - x.array().square()) * y.array()).matrix();
        break;
      case MatOp::matmul:
        require(x.cols() == y.rows(), "matmul", x, y);
        node.value.noalias() = x * y;
        break;
      case MatOp::add_bias:
        require(y.cols() == 1 && y.rows() == x.rows(), "add_bias", x, y);
        node.value = x.colwise() + y.col(0);
        break;
      case MatOp::concat_rows:
        require(x.cols() == y.cols(), "concat_rows", x, y);
        node.value.resize(x.rows() + y.rows(), x.cols());
        node.value.topRows(x.rows()) = x;
        node.value.bottomRows(y.rows()) = y;
        break;
      default:
        throw std::invalid_argument("not a binary matrix primitive");
    }
  } catch (...) {
    --count_;
    throw;
  }
  return {*this, count_ - 1};
}

Mat MatrixTape::scale(Mat a, double c) {
  check(a);
  MatNode& node = slot(MatOp::scale, 1);
  node.parents[0] = a.id();
  node.needs_grad = nodes_[a.id()].needs_grad;
  node.scalar = c;
  node.value = c * nodes_[a.id()].value;
  return {*this, count_ - 1};
}

Mat MatrixTape::broadcast(Mat a, Eigen::Index rows, Eigen::Index cols) {
  check(a);
  if (nodes_[a.id()].value.size() != 1) {
    throw std::invalid_argument("broadcast: source must be 1x1, got " + shape(nodes_[a.id()].value));
  }
  MatNode& node = slot(MatOp::broadcast, 1);
  node.parents[0] = a.id();
  node.needs_grad = nodes_[a.id()].needs_grad;
  node.value.setConstant(rows, cols, nodes_[a.id()].value(0, 0));
  return {*this, count_ - 1};
}

Mat MatrixTape::row(Mat a, Eigen::Index i) {
  check(a);
  if (i < 0 || i >= nodes_[a.id()].value.rows()) throw std::out_of_range("row index out of range");
  MatNode& node = slot(MatOp::row, 1);
  node.parents[0] = a.id();
  node.needs_grad = nodes_[a.id()].needs_grad;
  node.index = i;
  node.value = nodes_[a.id()].value.row(i);
  return {*this, count_ - 1};
}

void MatrixTape::backward(Mat output) {
  check(output);
  if (nodes_[output.id()].value.size() != 1) throw std::invalid_argument("backward: output must be 1x1");
  if (adjoints_.size() < count_) adjoints_.resize(count_);
  has_adjoint_.assign(count_, 0);

  // First contribution assigns (reusing storage), later ones accumulate.
  auto put = [&](MatId id, const auto& contribution) {
    if (has_adjoint_[id]) {
      adjoints_[id] += contribution;
    } else {
      adjoints_[id] = contribution;
      has_adjoint_[id] = 1;
    }
  };

  adjoints_[output.id()].setOnes(1, 1);
  has_adjoint_[output.id()] = 1;
  for (MatId i = output.id() + 1; i-- > 0;) {
    const MatNode& n = nodes_[i];
    if (!n.needs_grad || !has_adjoint_[i] || n.arity == 0) continue;
    const Matrix& g = adjoints_[i];
    const MatId a = n.parents[0];
    const MatId b = n.parents[1];
    const bool ga = nodes_[a].needs_grad;
    const bool gb = n.arity == 2 && nodes_[b].needs_grad;
    switch (n.op) {
      case MatOp::add:
        if (ga) put(a, g);
        if (gb) put(b, g);
        break;
      case MatOp::sub:
        if (ga) put(a, g);
        if (gb) put(b, -g);
        break;
      case MatOp::mul:
        if (ga) put(a, g.cwiseProduct(nodes_[b].value));
        if (gb) put(b, g.cwiseProduct(nodes_[a].value));
        break;
      case MatOp::scale:
        put(a, n.scalar * g);
        break;
      case MatOp::scalar_mul:
        if (ga) put(a, Matrix::Constant(1, 1, g.cwiseProduct(nodes_[b].value).sum()));
        if (gb) put(b, nodes_[a].value(0, 0) * g);
        break;
      case MatOp::neg:
        put(a, -g);
        break;
      case MatOp::tanh:
        put(a, (g.array() * (1.0 - n.value.array().square())).matrix());
        break;
      case MatOp::tanh_tangent: {
        const auto h = nodes_[a].value.array();
        if (ga) put(a, (-2.0 * h * nodes_[b].value.array() * g.array()).matrix());
        if (gb) put(b, ((1.0 - h.square()) * g.array()).matrix());
        break;
      }
      case MatOp::square:
        put(a, (2.0 * nodes_[a].value.array() * g.array()).matrix());
        break;
      case MatOp::exp:
        put(a, g.cwiseProduct(n.value));
        break;
      case MatOp::sin:
        put(a, (g.array() * nodes_[a].value.array().cos()).matrix());
        break;
      case MatOp::cos:
        put(a, (-g.array() * nodes_[a].value.array().sin()).matrix());
        break;
      case MatOp::matmul:
        if (ga) {
          if (has_adjoint_[a]) {
            adjoints_[a].noalias() += g * nodes_[b].value.transpose();
          } else {
            adjoints_[a].noalias() = g * nodes_[b].value.transpose();
            has_adjoint_[a] = 1;
          }
        }
        if (gb) {
          if (has_adjoint_[b]) {
            adjoints_[b].noalias() += nodes_[a].value.transpose() * g;
          } else {
            adjoints_[b].noalias() = nodes_[a].value.transpose() * g;
            has_adjoint_[b] = 1;
          }
        }
        break;
      case MatOp::add_bias:
        if (ga) put(a, g);
        if (gb) put(b, g.rowwise().sum());
        break;
      case MatOp::concat_rows: {
        const Eigen::Index top = nodes_[a].value.rows();
        if (ga) put(a, g.topRows(top));
        if (gb) put(b, g.bottomRows(g.rows() - top));
        break;
      }
      case MatOp::broadcast:
        put(a, Matrix::Constant(1, 1, g.sum()));
        break;
      case MatOp::row:
        if (!has_adjoint_[a]) {
          adjoints_[a].setZero(nodes_[a].value.rows(), nodes_[a].value.cols());
          has_adjoint_[a] = 1;
        }
        adjoints_[a].row(n.index) += g;
        break;
      case MatOp::mean: {
        const Matrix& x = nodes_[a].value;
        put(a, Matrix::Constant(x.rows(), x.cols(), g(0, 0) / static_cast<double>(x.size())));
        break;
      }
      case MatOp::sum: {
        const Matrix& x = nodes_[a].value;
        put(a, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
        break;
      }
      case MatOp::leaf:
      case MatOp::constant:
        break;
    }
  }
  adjoints_valid_ = true;
}

Matrix MatrixTape::adjoint(Mat node) const {
  check(node);
  if (!adjoints_valid_) throw std::logic_error("adjoint: backward() has not been run on the current tape");
  if (!has_adjoint_[node.id()]) return Matrix::Zero(node.rows(), node.cols());
  return adjoints_[node.id()];
}

Mat operator+(Mat a, Mat b) { return a.tape().record(MatOp::add, a, b); }
Mat operator-(Mat a, Mat b) { return a.tape().record(MatOp::sub, a, b); }
Mat operator*(Mat a, Mat b) { return a.tape().record(MatOp::mul, a, b); }
Mat operator-(Mat a) { return a.tape().record(MatOp::neg, a); }
Mat operator*(double c, Mat a) { return a.tape().scale(a, c); }
Mat operator*(Mat a, double c) { return a.tape().scale(a, c); }
Mat scalar_mul(Mat s, Mat a) { return a.tape().record(MatOp::scalar_mul, s, a); }
Mat tanh(Mat a) { return a.tape().record(MatOp::tanh, a); }
Mat tanh_tangent(Mat h, Mat dz) { return h.tape().record(MatOp::tanh_tangent, h, dz); }
Mat square(Mat a) { return a.tape().record(MatOp::square, a); }
Mat exp(Mat a) { return a.tape().record(MatOp::exp, a); }
Mat sin(Mat a) { return a.tape().record(MatOp::sin, a); }
Mat cos(Mat a) { return a.tape().record(MatOp::cos, a); }
Mat matmul(Mat a, Mat b) { return a.tape().record(MatOp::matmul, a, b); }
Mat add_bias(Mat a, Mat bias) { return a.tape().record(MatOp::add_bias, a, bias); }
Mat concat_rows(Mat top, Mat bottom) { return top.tape().record(MatOp::concat_rows, top, bottom); }
Mat mean(Mat a) { return a.tape().record(MatOp::mean, a); }
Mat sum(Mat a) { return a.tape().record(MatOp::sum, a); }

MatJet operator+(const MatJet& a, const MatJet& b) { return {a.value + b.value, a.tangent + b.tangent}; }
MatJet operator-(const MatJet& a, const MatJet& b) { return {a.value - b.value, a.tangent - b.tangent}; }
MatJet operator*(double c, const MatJet& a) { return {c * a.value, c * a.tangent}; }
MatJet scalar_mul(Mat s, const MatJet& a) { return {scalar_mul(s, a.value), scalar_mul(s, a.tangent)}; }

MatJet tanh(const MatJet& a) {
  Mat h = tanh(a.value);
  return {h, tanh_tangent(h, a.tangent)};
}

}  // namespace cinn::ad
