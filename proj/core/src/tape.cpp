#include "user/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace user::nd {

namespace {

constexpr double kLn2 = 0.6931471805599453;

bool broadcastable(const Tensor& a, const Tensor& b) {
  return (b.rows() == a.rows() || b.rows() == 1) && (b.cols() == a.cols() || b.cols() == 1);
}

double bval(const Tensor& b, int i, int j) {
  return b(b.rows() == 1 ? 0 : i, b.cols() == 1 ? 0 : j);
}

/// Sum g down to shape rows x cols (each dimension either matches or is 1).
Tensor reduce_to(const Tensor& g, int rows, int cols) {
  Tensor out(rows, cols);
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j)
      out(rows == 1 ? 0 : i, cols == 1 ? 0 : j) += g(i, j);
  return out;
}

double clamp_signed(double b) {
  if (b >= Tape::kEps) return b;
  if (b <= -Tape::kEps) return b;
  return b >= 0.0 ? Tape::kEps : -Tape::kEps;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var Tape::push(Op op, int a, int b, Tensor value) {
  nodes_.push_back(Node{op, a, b, std::move(value)});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument("Tape: invalid Var");
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

bool Tape::is_leaf(Var v) const { return node(v).op == Op::kLeaf; }

Var Tape::leaf(Tensor value) { return push(Op::kLeaf, -1, -1, std::move(value)); }

Var Tape::constant(Tensor value) { return push(Op::kConstant, -1, -1, std::move(value)); }

Var Tape::matmul(Var a, Var b) {
  Tensor out = nd::matmul(value(a), value(b));
  return push(Op::kMatmul, a.id, b.id, std::move(out));
}

Var Tape::unary(Op op, Var x) {
  const Tensor& in = value(x);
  Tensor out = in;
  switch (op) {
    case Op::kRelu:
      for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
      break;
    case Op::kSigmoid:
      for (double& v : out.data()) v = stable_sigmoid(v);
      break;
    case Op::kSoftplus:
      // log(1+e^x) evaluated as max(x,0) + log1p(e^-|x|)
      for (double& v : out.data()) v = std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
      break;
    case Op::kExp:
      for (double& v : out.data()) v = std::exp(v);
      break;
    case Op::kSqrt:
      for (double& v : out.data()) {
        if (v < 0.0) throw std::domain_error("sqrt: negative entry");
        v = std::sqrt(v);
      }
      break;
    case Op::kLog2Eps:
      for (double& v : out.data()) v = std::log2(std::max(v, kEps));
      break;
    case Op::kNegate:
      for (double& v : out.data()) v = -v;
      break;
    case Op::kSquare:
      for (double& v : out.data()) v = v * v;
      break;
    case Op::kReciprocalEps:
      for (double& v : out.data()) v = 1.0 / std::max(v, kEps);
      break;
    default:
      throw std::logic_error("Tape::unary: not a unary op");
  }
  return push(op, x.id, -1, std::move(out));
}

Var Tape::relu(Var x) { return unary(Op::kRelu, x); }
Var Tape::sigmoid(Var x) { return unary(Op::kSigmoid, x); }
Var Tape::softplus(Var x) { return unary(Op::kSoftplus, x); }
Var Tape::exp(Var x) { return unary(Op::kExp, x); }
Var Tape::sqrt(Var x) { return unary(Op::kSqrt, x); }
Var Tape::log2_eps(Var x) { return unary(Op::kLog2Eps, x); }
Var Tape::negate(Var x) { return unary(Op::kNegate, x); }
Var Tape::square(Var x) { return unary(Op::kSquare, x); }
Var Tape::reciprocal_eps(Var x) { return unary(Op::kReciprocalEps, x); }

namespace {

template <typename F>
Tensor binary_broadcast(const Tensor& a, const Tensor& b, const char* name, F f) {
  if (!broadcastable(a, b))
    throw std::invalid_argument(std::string(name) + ": incompatible shapes (" +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  Tensor out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(i, j) = f(a(i, j), bval(b, i, j));
  return out;
}

}  // namespace

Var Tape::add(Var a, Var b) {
  Tensor out = binary_broadcast(value(a), value(b), "add",
                                [](double x, double y) { return x + y; });
  return push(Op::kAdd, a.id, b.id, std::move(out));
}

Var Tape::sub(Var a, Var b) {
  Tensor out = binary_broadcast(value(a), value(b), "sub",
                                [](double x, double y) { return x - y; });
  return push(Op::kSub, a.id, b.id, std::move(out));
}

Var Tape::mul(Var a, Var b) {
  Tensor out = binary_broadcast(value(a), value(b), "mul",
                                [](double x, double y) { return x * y; });
  return push(Op::kMul, a.id, b.id, std::move(out));
}

Var Tape::div_eps(Var a, Var b) {
  Tensor out = binary_broadcast(value(a), value(b), "div_eps",
                                [](double x, double y) { return x / clamp_signed(y); });
  return push(Op::kDivEps, a.id, b.id, std::move(out));
}

Var Tape::sum_all(Var x) {
  return push(Op::kSumAll, x.id, -1, Tensor::scalar(nd::sum(value(x))));
}

Var Tape::row_sum(Var x) { return push(Op::kRowSum, x.id, -1, row_sums(value(x))); }

Var Tape::col_sum(Var x) { return push(Op::kColSum, x.id, -1, col_sums(value(x))); }

Var Tape::row_softmax(Var x) {
  const Tensor& in = value(x);
  Tensor out(in.rows(), in.cols());
  for (int i = 0; i < in.rows(); ++i) {
    double mx = in(i, 0);
    for (int j = 1; j < in.cols(); ++j) mx = std::max(mx, in(i, j));
    double total = 0.0;
    for (int j = 0; j < in.cols(); ++j) {
      const double e = std::exp(in(i, j) - mx);
      out(i, j) = e;
      total += e;
    }
    for (int j = 0; j < in.cols(); ++j) out(i, j) /= total;
  }
  return push(Op::kRowSoftmax, x.id, -1, std::move(out));
}

Var Tape::transpose(Var x) { return push(Op::kTranspose, x.id, -1, nd::transpose(value(x))); }

const Tensor& Tape::Gradients::wrt(Var leaf) const {
  if (!leaf.valid() || leaf.id >= static_cast<int>(slot_of_node_.size()) ||
      slot_of_node_[static_cast<std::size_t>(leaf.id)] < 0)
    throw std::invalid_argument("Gradients::wrt: Var is not a leaf of this tape");
  return grads_[static_cast<std::size_t>(slot_of_node_[static_cast<std::size_t>(leaf.id)])];
}

Tape::Gradients Tape::backward(Var output) const {
  const Tensor& out_val = value(output);
  if (!out_val.is_scalar())
    throw std::invalid_argument("Tape::backward: output must be 1x1");

  const std::size_t n = nodes_.size();
  std::vector<Tensor> grad(n);
  std::vector<char> has(n, 0);

  auto accum = [&](int target, Tensor contribution) {
    const auto t = static_cast<std::size_t>(target);
    if (!has[t]) {
      grad[t] = std::move(contribution);
      has[t] = 1;
    } else {
      auto gd = grad[t].data();
      auto cd = contribution.data();
      for (std::size_t i = 0; i < gd.size(); ++i) gd[i] += cd[i];
    }
  };

  Gradients result;
  result.slot_of_node_.assign(n, -1);

  accum(output.id, Tensor::scalar(1.0));

  for (int id = output.id; id >= 0; --id) {
    const auto uid = static_cast<std::size_t>(id);
    if (!has[uid]) continue;
    const Node& nd_ = nodes_[uid];
    Tensor g = std::move(grad[uid]);
    has[uid] = 0;

    switch (nd_.op) {
      case Op::kLeaf:
        result.slot_of_node_[uid] = static_cast<int>(result.grads_.size());
        result.grads_.push_back(std::move(g));
        continue;
      case Op::kConstant:
        continue;

      case Op::kMatmul: {
        const Tensor& va = nodes_[static_cast<std::size_t>(nd_.a)].value;
        const Tensor& vb = nodes_[static_cast<std::size_t>(nd_.b)].value;
        accum(nd_.a, nd::matmul(g, nd::transpose(vb)));
        accum(nd_.b, nd::matmul(nd::transpose(va), g));
        break;
      }

      case Op::kRelu: {
        const Tensor& x = nodes_[static_cast<std::size_t>(nd_.a)].value;
        Tensor gx = g;
        auto gd = gx.data();
        auto xd = x.data();
        for (std::size_t i = 0; i < gd.size(); ++i)
          if (xd[i] <= 0.0) gd[i] = 0.0;
        accum(nd_.a, std::move(gx));
        break;
      }
      case Op::kSigmoid: {
        Tensor gx = g;
        auto gd = gx.data();
        auto sd = nd_.value.data();
        for (std::size_t i = 0; i < gd.size(); ++i) gd[i] *= sd[i] * (1.0 - sd[i]);
        accum(nd_.a, std::move(gx));
        break;
      }
      case Op::kSoftplus: {
        const Tensor& x = nodes_[static_cast<std::size_t>(nd_.a)].value;
        Tensor gx = g;
        auto gd = gx.data();
        auto xd = x.data();
        for (std::size_t i = 0; i < gd.size(); ++i) gd[i] *= stable_sigmoid(xd[i]);
        accum(nd_.a, std::move(gx));
        break;
      }
      case Op::kExp: {
        Tensor gx = g;
        auto gd = gx.data();
        auto vd = nd_.value.data();
        for (std::size_t i = 0; i < gd.size(); ++i) gd[i] *= vd[i];
        accum(nd_.a, std::move(gx));
        break;
      }
      case Op::kSqrt: {
        Tensor gx = g;
        auto gd = gx.data();
        auto vd = nd_.value.data();  // vd[i] = sqrt(x_i)
        for (std::size_t i = 0; i < gd.size(); ++i)
          gd[i] = vd[i] > 0.0 ? gd[i] * 0.5 / vd[i] : 0.0;
        accum(nd_.a, std::move(gx));
        break;
      }
      case Op::kLog2Eps: {
        const Tensor& x = nodes_[static_cast<std::size_t>(nd_.a)].value;
        Tensor gx = g;
        auto gd = gx.data();
        auto xd = x.data();
        for (std::size_t i = 0; i < gd.size(); ++i)
          gd[i] = xd[i] >= kEps ? gd[i] / (xd[i] * kLn2) : 0.0;
        accum(nd_.a, std::move(gx));
        break;
      }
      case Op::kNegate: {
        Tensor gx = g;
        for (double& v : gx.data()) v = -v;
        accum(nd_.a, std::move(gx));
        break;
      }
      case Op::kSquare: {
        const Tensor& x = nodes_[static_cast<std::size_t>(nd_.a)].value;
        Tensor gx = g;
        auto gd = gx.data();
        auto xd = x.data();
        for (std::size_t i = 0; i < gd.size(); ++i) gd[i] *= 2.0 * xd[i];
        accum(nd_.a, std::move(gx));
        break;
      }
      case Op::kReciprocalEps: {
        const Tensor& x = nodes_[static_cast<std::size_t>(nd_.a)].value;
        Tensor gx = g;
        auto gd = gx.data();
        auto xd = x.data();
        for (std::size_t i = 0; i < gd.size(); ++i)
          gd[i] = xd[i] >= kEps ? -gd[i] / (xd[i] * xd[i]) : 0.0;
        accum(nd_.a, std::move(gx));
        break;
      }

      case Op::kAdd: {
        const Tensor& vb = nodes_[static_cast<std::size_t>(nd_.b)].value;
        accum(nd_.b, reduce_to(g, vb.rows(), vb.cols()));
        accum(nd_.a, std::move(g));
        break;
      }
      case Op::kSub: {
        const Tensor& vb = nodes_[static_cast<std::size_t>(nd_.b)].value;
        Tensor gb = reduce_to(g, vb.rows(), vb.cols());
        for (double& v : gb.data()) v = -v;
        accum(nd_.b, std::move(gb));
        accum(nd_.a, std::move(g));
        break;
      }
      case Op::kMul: {
        const Tensor& va = nodes_[static_cast<std::size_t>(nd_.a)].value;
        const Tensor& vb = nodes_[static_cast<std::size_t>(nd_.b)].value;
        Tensor ga(g.rows(), g.cols());
        Tensor gb_full(g.rows(), g.cols());
        for (int i = 0; i < g.rows(); ++i)
          for (int j = 0; j < g.cols(); ++j) {
            ga(i, j) = g(i, j) * bval(vb, i, j);
            gb_full(i, j) = g(i, j) * va(i, j);
          }
        accum(nd_.a, std::move(ga));
        accum(nd_.b, reduce_to(gb_full, vb.rows(), vb.cols()));
        break;
      }
      case Op::kDivEps: {
        const Tensor& va = nodes_[static_cast<std::size_t>(nd_.a)].value;
        const Tensor& vb = nodes_[static_cast<std::size_t>(nd_.b)].value;
        Tensor ga(g.rows(), g.cols());
        Tensor gb_full(g.rows(), g.cols());
        for (int i = 0; i < g.rows(); ++i)
          for (int j = 0; j < g.cols(); ++j) {
            const double b = bval(vb, i, j);
            ga(i, j) = g(i, j) / clamp_signed(b);
            gb_full(i, j) =
                std::abs(b) >= kEps ? -g(i, j) * va(i, j) / (b * b) : 0.0;
          }
        accum(nd_.a, std::move(ga));
        accum(nd_.b, reduce_to(gb_full, vb.rows(), vb.cols()));
        break;
      }

      case Op::kSumAll: {
        const Tensor& x = nodes_[static_cast<std::size_t>(nd_.a)].value;
        accum(nd_.a, Tensor::full(x.rows(), x.cols(), g(0, 0)));
        break;
      }
      case Op::kRowSum: {
        const Tensor& x = nodes_[static_cast<std::size_t>(nd_.a)].value;
        Tensor gx(x.rows(), x.cols());
        for (int i = 0; i < x.rows(); ++i)
          for (int j = 0; j < x.cols(); ++j) gx(i, j) = g(i, 0);
        accum(nd_.a, std::move(gx));
        break;
      }
      case Op::kColSum: {
        const Tensor& x = nodes_[static_cast<std::size_t>(nd_.a)].value;
        Tensor gx(x.rows(), x.cols());
        for (int i = 0; i < x.rows(); ++i)
          for (int j = 0; j < x.cols(); ++j) gx(i, j) = g(0, j);
        accum(nd_.a, std::move(gx));
        break;
      }

      case Op::kRowSoftmax: {
        const Tensor& s = nd_.value;
        Tensor gx(s.rows(), s.cols());
        for (int i = 0; i < s.rows(); ++i) {
          double dot = 0.0;
          for (int j = 0; j < s.cols(); ++j) dot += g(i, j) * s(i, j);
          for (int j = 0; j < s.cols(); ++j) gx(i, j) = s(i, j) * (g(i, j) - dot);
        }
        accum(nd_.a, std::move(gx));
        break;
      }
      case Op::kTranspose:
        accum(nd_.a, nd::transpose(g));
        break;
    }
  }
  return result;
}

}  // namespace user::nd
