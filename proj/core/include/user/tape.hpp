#pragma once

#include <vector>

#include "user/tensor.hpp"

namespace user::nd {

/// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

enum class Op {
  kLeaf,
  kConstant,
  kMatmul,
  kRelu,
  kSigmoid,
  kSoftplus,
  kExp,
  kSqrt,
  kLog2Eps,
  kNegate,
  kSquare,
  kReciprocalEps,
  kAdd,
  kSub,
  kMul,
  kDivEps,
  kSumAll,
  kRowSum,
  kColSum,
  kRowSoftmax,
  kTranspose,
};

/// Define-by-run recorder for reverse-mode differentiation over dense
/// matrices. A tape is rebuilt for every forward pass and is confined to a
/// single thread; the Tensors it returns are immutable.
///
/// Binary elementwise ops broadcast the second operand when it is 1xC, Rx1 or
/// 1x1 against a full RxC first operand; gradients are sum-reduced back over
/// the broadcast axes.
///
/// Clamp conventions (eps = 1e-12): log2_eps(x) = log2(max(x, eps)),
/// reciprocal_eps(x) = 1/max(x, eps), div_eps(a, b) divides by b with
/// |b| >= eps enforced preserving sign. Inside the clamped region the local
/// derivative is 0. relu'(0) = 0 and sqrt'(0) = 0.
class Tape {
 public:
  static constexpr double kEps = 1e-12;

  /// Records a differentiable parameter; backward() reports its gradient.
  Var leaf(Tensor value);
  /// Records a fixed input; no gradient is tracked.
  Var constant(Tensor value);

  Var matmul(Var a, Var b);

  Var relu(Var x);
  Var sigmoid(Var x);
  Var softplus(Var x);
  Var exp(Var x);
  Var sqrt(Var x);
  Var log2_eps(Var x);
  Var negate(Var x);
  Var square(Var x);
  Var reciprocal_eps(Var x);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div_eps(Var a, Var b);

  Var sum_all(Var x);
  Var row_sum(Var x);
  Var col_sum(Var x);

  Var row_softmax(Var x);
  Var transpose(Var x);

  const Tensor& value(Var v) const;
  bool is_leaf(Var v) const;
  int node_count() const { return static_cast<int>(nodes_.size()); }

  /// Gradients of a scalar output with respect to every leaf on the tape.
  class Gradients {
   public:
    const Tensor& wrt(Var leaf) const;

   private:
    friend class Tape;
    std::vector<int> slot_of_node_;  // node id -> index into grads_, or -1
    std::vector<Tensor> grads_;
  };

  /// Reverse pass from a 1x1 output. Pure: the tape itself is not modified
  /// and repeated calls return identical gradients.
  Gradients backward(Var output) const;

 private:
  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    Tensor value;
  };

  Var push(Op op, int a, int b, Tensor value);
  const Node& node(Var v) const;
  Var unary(Op op, Var x);

  std::vector<Node> nodes_;
};

}  // namespace user::nd
