#pragma once

// Scalar reverse-mode automatic differentiation.
//
// Every scalar operation appends one node to a Tape. Nodes store their value
// and the local partial derivatives with respect to at most two parents, so a
// single reverse sweep over the node sequence yields all adjoints.
//
// Dual carries a primal and a tangent that both live on the tape. Forward-mode
// rules for the tangent are expressed with taped primitives, so a tangent such
// as du/dx is itself differentiable with respect to anything on the tape
// (backward-over-forward gives the mixed derivatives needed by PDE residuals).

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cinn::ad {

using NodeId = std::size_t;

enum class Op : std::uint8_t {
  leaf,
  constant,
  add,
  sub,
  mul,
  neg,
  tanh,
  exp,
  sin,
  recip,
  square,
};

bool is_unary(Op op);
bool is_binary(Op op);
const char* op_name(Op op);

struct Partial {
  NodeId parent = 0;
  double value = 0.0;
};

struct TapeNode {
  double value = 0.0;
  Op op = Op::leaf;
  std::uint8_t arity = 0;
  std::array<Partial, 2> partials{};

  std::span<const Partial> local_partials() const { return {partials.data(), arity}; }
};

class Tape {
 public:
  NodeId record_leaf(double value);
  NodeId record_constant(double value);
  /// Throws std::invalid_argument if `op` is not a unary primitive.
  NodeId record_unary(Op op, NodeId a);
  /// Throws std::invalid_argument if `op` is not a binary primitive.
  NodeId record_binary(Op op, NodeId a, NodeId b);

  /// Adjoints d(output)/d(node) for every node, indexed by node id.
  std::vector<double> backward(NodeId output) const;

  void reset() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }
  const TapeNode& node(NodeId id) const { return nodes_.at(id); }
  double value(NodeId id) const { return nodes_.at(id).value; }

 private:
  void check_id(NodeId id) const;

  std::vector<TapeNode> nodes_;
};

/// Handle to a taped scalar; arithmetic records new nodes on the same tape.
class Var {
 public:
  Var() = default;
  Var(Tape& tape, NodeId id) : tape_(&tape), id_(id) {}

  static Var leaf(Tape& tape, double value) { return {tape, tape.record_leaf(value)}; }
  static Var constant(Tape& tape, double value) { return {tape, tape.record_constant(value)}; }

  Tape& tape() const { return *tape_; }
  NodeId id() const { return id_; }
  double value() const { return tape_->value(id_); }

  Var constant(double value) const { return constant(*tape_, value); }

 private:
  Tape* tape_ = nullptr;
  NodeId id_ = 0;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double b);
Var operator+(double a, Var b);
Var operator-(Var a, double b);
Var operator-(double a, Var b);
Var operator*(Var a, double b);
Var operator*(double a, Var b);
Var tanh(Var a);
Var exp(Var a);
Var sin(Var a);
Var cos(Var a);
Var recip(Var a);
Var square(Var a);

/// Forward-mode pair whose tangent is also recorded on the tape.
struct Dual {
  Var primal;
  Var tangent;

  Dual() = default;
  Dual(Var p, Var t) : primal(p), tangent(t) {}
  /// Lifts a taped value with zero tangent.
  explicit Dual(Var p) : primal(p), tangent(p.constant(0.0)) {}

  double value() const { return primal.value(); }
  double derivative() const { return tangent.value(); }
  Dual constant(double value) const { return Dual(primal.constant(value)); }
};

Dual operator+(const Dual& a, const Dual& b);
Dual operator-(const Dual& a, const Dual& b);
Dual operator*(const Dual& a, const Dual& b);
Dual operator-(const Dual& a);
Dual operator*(Var a, const Dual& b);
Dual operator*(const Dual& a, Var b);
Dual operator+(const Dual& a, Var b);
Dual operator+(Var a, const Dual& b);
Dual operator-(const Dual& a, Var b);
Dual operator-(Var a, const Dual& b);
Dual operator*(double a, const Dual& b);
Dual operator*(const Dual& a, double b);
Dual operator+(const Dual& a, double b);
Dual operator-(const Dual& a, double b);
Dual operator-(double a, const Dual& b);
Dual tanh(const Dual& a);
Dual exp(const Dual& a);
Dual sin(const Dual& a);
Dual recip(const Dual& a);
Dual square(const Dual& a);

/// Records each input as a leaf and seeds the tangents with unit vector
/// e_direction. Throws std::out_of_range if direction >= inputs.size().
std::vector<Dual> dual_lift(Tape& tape, std::span<const double> inputs, std::size_t direction);

}  // namespace cinn::ad
