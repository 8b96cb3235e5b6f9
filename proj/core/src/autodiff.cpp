#include "cinn/autodiff.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cinn::ad {

bool is_unary(Op op) {
  switch (op) {
    case Op::neg:
    case Op::tanh:
    case Op::exp:
    case Op::sin:
    case Op::recip:
    case Op::square:
      return true;
    default:
      return false;
  }
}

bool is_binary(Op op) { return op == Op::add || op == Op::sub || op == Op::mul; }

const char* op_name(Op op) {
  switch (op) {
    case Op::leaf: return "leaf";
    case Op::constant: return "const";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::neg: return "neg";
    case Op::tanh: return "tanh";
    case Op::exp: return "exp";
    case Op::sin: return "sin";
    case Op::recip: return "recip";
    case Op::square: return "square";
  }
  return "?";
}

void Tape::check_id(NodeId id) const {
  if (id >= nodes_.size()) {
    throw std::out_of_range("tape node " + std::to_string(id) + " not recorded (tape size " +
                            std::to_string(nodes_.size()) + ")");
  }
}

NodeId Tape::record_leaf(double value) {
  nodes_.push_back(TapeNode{value, Op::leaf, 0, {}});
  return nodes_.size() - 1;
}

NodeId Tape::record_constant(double value) {
  nodes_.push_back(TapeNode{value, Op::constant, 0, {}});
  return nodes_.size() - 1;
}

NodeId Tape::record_unary(Op op, NodeId a) {
  if (!is_unary(op)) {
    throw std::invalid_argument(std::string("not a unary primitive: ") + op_name(op));
  }
  check_id(a);
  const double x = nodes_[a].value;
  double value = 0.0;
  double partial = 0.0;
  switch (op) {
    case Op::neg:
      value = -x;
      partial = -1.0;
      break;
    case Op::tanh:
      value = std::tanh(x);
      partial = 1.0 - value * value;
      break;
    case Op::exp:
      value = std::exp(x);
      partial = value;
      break;
    case Op::sin:
      value = std::sin(x);
      partial = std::cos(x);
      break;
    case Op::recip:
      value = 1.0 / x;
      partial = -value * value;
      break;
    case Op::square:
      value = x * x;
      partial = 2.0 * x;
      break;
    default:
      break;
  }
  nodes_.push_back(TapeNode{value, op, 1, {Partial{a, partial}, Partial{}}});
  return nodes_.size() - 1;
}

NodeId Tape::record_binary(Op op, NodeId a, NodeId b) {
  if (!is_binary(op)) {
    throw std::invalid_argument(std::string("not a binary primitive: ") + op_name(op));
  }
  check_id(a);
  check_id(b);
  const double x = nodes_[a].value;
  const double y = nodes_[b].value;
  TapeNode node{0.0, op, 2, {}};
  switch (op) {
    case Op::add:
      node.value = x + y;
      node.partials = {Partial{a, 1.0}, Partial{b, 1.0}};
      break;
    case Op::sub:
      node.value = x - y;
      node.partials = {Partial{a, 1.0}, Partial{b, -1.0}};
      break;
    case Op::mul:
      node.value = x * y;
      node.partials = {Partial{a, y}, Partial{b, x}};
      break;
    default:
      break;
  }
  nodes_.push_back(node);
  return nodes_.size() - 1;
}

std::vector<double> Tape::backward(NodeId output) const {
  check_id(output);
  std::vector<double> adjoint(nodes_.size(), 0.0);
  adjoint[output] = 1.0;
  for (NodeId i = output + 1; i-- > 0;) {
    const double g = adjoint[i];
    if (g == 0.0) continue;
    for (const Partial& p : nodes_[i].local_partials()) adjoint[p.parent] += g * p.value;
  }
  return adjoint;
}

// Var arithmetic

Var operator+(Var a, Var b) { return {a.tape(), a.tape().record_binary(Op::add, a.id(), b.id())}; }
Var operator-(Var a, Var b) { return {a.tape(), a.tape().record_binary(Op::sub, a.id(), b.id())}; }
Var operator*(Var a, Var b) { return {a.tape(), a.tape().record_binary(Op::mul, a.id(), b.id())}; }
Var operator-(Var a) { return {a.tape(), a.tape().record_unary(Op::neg, a.id())}; }
Var operator+(Var a, double b) { return a + a.constant(b); }
Var operator+(double a, Var b) { return b.constant(a) + b; }
Var operator-(Var a, double b) { return a - a.constant(b); }
Var operator-(double a, Var b) { return b.constant(a) - b; }
Var operator*(Var a, double b) { return a * a.constant(b); }
Var operator*(double a, Var b) { return b.constant(a) * b; }
Var tanh(Var a) { return {a.tape(), a.tape().record_unary(Op::tanh, a.id())}; }
Var exp(Var a) { return {a.tape(), a.tape().record_unary(Op::exp, a.id())}; }
Var sin(Var a) { return {a.tape(), a.tape().record_unary(Op::sin, a.id())}; }
Var cos(Var a) { return sin(a + std::numbers::pi / 2.0); }
Var recip(Var a) { return {a.tape(), a.tape().record_unary(Op::recip, a.id())}; }
Var square(Var a) { return {a.tape(), a.tape().record_unary(Op::square, a.id())}; }

// Dual arithmetic: tangent rules written with taped primitives.

Dual operator+(const Dual& a, const Dual& b) { return {a.primal + b.primal, a.tangent + b.tangent}; }
Dual operator-(const Dual& a, const Dual& b) { return {a.primal - b.primal, a.tangent - b.tangent}; }
Dual operator*(const Dual& a, const Dual& b) {
  return {a.primal * b.primal, a.tangent * b.primal + a.primal * b.tangent};
}
Dual operator-(const Dual& a) { return {-a.primal, -a.tangent}; }
Dual operator*(Var a, const Dual& b) { return {a * b.primal, a * b.tangent}; }
Dual operator*(const Dual& a, Var b) { return {a.primal * b, a.tangent * b}; }
Dual operator+(const Dual& a, Var b) { return {a.primal + b, a.tangent}; }
Dual operator+(Var a, const Dual& b) { return {a + b.primal, b.tangent}; }
Dual operator-(const Dual& a, Var b) { return {a.primal - b, a.tangent}; }
Dual operator-(Var a, const Dual& b) { return {a - b.primal, -b.tangent}; }
Dual operator*(double a, const Dual& b) { return {a * b.primal, a * b.tangent}; }
Dual operator*(const Dual& a, double b) { return {a.primal * b, a.tangent * b}; }
Dual operator+(const Dual& a, double b) { return {a.primal + b, a.tangent}; }
Dual operator-(const Dual& a, double b) { return {a.primal - b, a.tangent}; }
Dual operator-(double a, const Dual& b) { return {a - b.primal, -b.tangent}; }

Dual tanh(const Dual& a) {
  Var h = tanh(a.primal);
  return {h, (1.0 - square(h)) * a.tangent};
}

Dual exp(const Dual& a) {
  Var e = exp(a.primal);
  return {e, e * a.tangent};
}

Dual sin(const Dual& a) { return {sin(a.primal), cos(a.primal) * a.tangent}; }

Dual recip(const Dual& a) {
  Var r = recip(a.primal);
  return {r, -square(r) * a.tangent};
}

Dual square(const Dual& a) { return {square(a.primal), 2.0 * a.primal * a.tangent}; }

std::vector<Dual> dual_lift(Tape& tape, std::span<const double> inputs, std::size_t direction) {
  if (direction >= inputs.size()) {
    throw std::out_of_range("dual_lift: direction " + std::to_string(direction) + " out of range for " +
                            std::to_string(inputs.size()) + " inputs");
  }
  std::vector<Dual> lifted;
  lifted.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Var x = Var::leaf(tape, inputs[i]);
    lifted.emplace_back(x, x.constant(i == direction ? 1.0 : 0.0));
  }
  return lifted;
}

}  // namespace cinn::ad
