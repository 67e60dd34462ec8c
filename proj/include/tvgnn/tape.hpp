#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tvgnn/error.hpp"
#include "tvgnn/sparse.hpp"
#include "tvgnn/tensor.hpp"

namespace tvgnn {

using NodeId = std::size_t;

enum class Op {
  kLeaf,
  kMatmul,
  kAdd,
  kSubtract,
  kMultiply,
  kScalarMul,
  kTranspose,
  kAbs,
  kRelu,
  kElu,
  kRowSoftmax,
  kReduceSumAll,
  kReduceSumAxis,
  kTrace,
  kFrobeniusNorm,
  kSpmm,
  kRowGather,
  kAsymAbs,
  kLog,
  kDivideByConst,
  kDivide,
  kNllRowSoftmax,
};

inline const char* op_name(Op op) {
  switch (op) {
    case Op::kLeaf: return "leaf";
    case Op::kMatmul: return "matmul";
    case Op::kAdd: return "add";
    case Op::kSubtract: return "subtract";
    case Op::kMultiply: return "multiply";
    case Op::kScalarMul: return "scalar-multiply";
    case Op::kTranspose: return "transpose";
    case Op::kAbs: return "abs";
    case Op::kRelu: return "relu";
    case Op::kElu: return "elu";
    case Op::kRowSoftmax: return "row-softmax";
    case Op::kReduceSumAll: return "reduce-sum";
    case Op::kReduceSumAxis: return "reduce-sum-axis";
    case Op::kTrace: return "trace";
    case Op::kFrobeniusNorm: return "frobenius-norm";
    case Op::kSpmm: return "sparse-dense-matmul";
    case Op::kRowGather: return "row-gather";
    case Op::kAsymAbs: return "asymmetric-abs";
    case Op::kLog: return "log";
    case Op::kDivideByConst: return "divide-by-constant";
    case Op::kDivide: return "divide";
    case Op::kNllRowSoftmax: return "nll-row-softmax";
  }
  return "?";
}

// Reverse-mode tape over eagerly evaluated tensors. Nodes are append-only
// and reference strictly earlier nodes. The sparse operand of kSpmm is an
// attribute, not a node: no gradient flows into it.
class Tape {
 public:
  struct Node {
    Op op = Op::kLeaf;
    std::vector<NodeId> inputs;
    Tensor value;
    bool trainable = false;
    double scalar = 0.0;  // kScalarMul factor, kDivideByConst divisor, kAsymAbs rho
    int axis = -1;        // kReduceSumAxis
    std::shared_ptr<const SparseMatrix> sparse;  // kSpmm
    std::vector<std::size_t> gather;             // kRowGather
    std::vector<int> labels;                     // kNllRowSoftmax
    Tensor saved;                                // kNllRowSoftmax probabilities
  };

  NodeId input(Tensor t, bool trainable = false) {
    Node n;
    n.op = Op::kLeaf;
    n.value = std::move(t);
    n.trainable = trainable;
    return push(std::move(n), /*check_finite=*/false);
  }

  NodeId constant(Tensor t) { return input(std::move(t), false); }
  NodeId param(Tensor t) { return input(std::move(t), true); }

  NodeId matmul(NodeId a, NodeId b) {
    require_rank2(a, "matmul lhs");
    require_rank2(b, "matmul rhs");
    if (value(a).cols() != value(b).rows())
      throw ShapeMismatch("matmul: " + value(a).shape_str() + " * " + value(b).shape_str());
    Node n;
    n.op = Op::kMatmul;
    n.inputs = {a, b};
    return push(std::move(n));
  }

  NodeId add(NodeId a, NodeId b) { return binary(Op::kAdd, a, b); }
  NodeId subtract(NodeId a, NodeId b) { return binary(Op::kSubtract, a, b); }
  NodeId multiply(NodeId a, NodeId b) { return binary(Op::kMultiply, a, b); }

  NodeId scalar_mul(NodeId a, double c) {
    Node n;
    n.op = Op::kScalarMul;
    n.inputs = {a};
    n.scalar = c;
    return push(std::move(n));
  }

  NodeId transpose(NodeId a) {
    require_rank2(a, "transpose");
    Node n;
    n.op = Op::kTranspose;
    n.inputs = {a};
    return push(std::move(n));
  }

  NodeId abs(NodeId a) { return unary(Op::kAbs, a); }
  NodeId relu(NodeId a) { return unary(Op::kRelu, a); }
  NodeId elu(NodeId a) { return unary(Op::kElu, a); }
  NodeId log(NodeId a) { return unary(Op::kLog, a); }

  NodeId row_softmax(NodeId a) {
    require_rank2(a, "row-softmax");
    Node n;
    n.op = Op::kRowSoftmax;
    n.inputs = {a};
    return push(std::move(n));
  }

  NodeId reduce_sum(NodeId a) {
    Node n;
    n.op = Op::kReduceSumAll;
    n.inputs = {a};
    return push(std::move(n));
  }

  // axis 0 sums rows into a 1 x m result, axis 1 sums columns into n x 1.
  NodeId reduce_sum_axis(NodeId a, int axis) {
    require_rank2(a, "reduce-sum-axis");
    if (axis != 0 && axis != 1) throw ShapeMismatch("axis must be 0 or 1");
    Node n;
    n.op = Op::kReduceSumAxis;
    n.inputs = {a};
    n.axis = axis;
    return push(std::move(n));
  }

  NodeId trace(NodeId a) {
    require_rank2(a, "trace");
    if (value(a).rows() != value(a).cols()) throw ShapeMismatch("trace needs a square matrix");
    Node n;
    n.op = Op::kTrace;
    n.inputs = {a};
    return push(std::move(n));
  }

  NodeId frobenius_norm(NodeId a) {
    Node n;
    n.op = Op::kFrobeniusNorm;
    n.inputs = {a};
    return push(std::move(n));
  }

  // y = s * x; the sparse operand is frozen (no gradient to its entries).
  NodeId spmm(std::shared_ptr<const SparseMatrix> s, NodeId x) {
    require_rank2(x, "sparse-dense-matmul rhs");
    if (value(x).rows() != s->n_cols)
      throw ShapeMismatch("sparse-dense-matmul: sparse cols " + std::to_string(s->n_cols) +
                          " vs dense rows " + std::to_string(value(x).rows()));
    Node n;
    n.op = Op::kSpmm;
    n.inputs = {x};
    n.sparse = std::move(s);
    return push(std::move(n));
  }

  NodeId row_gather(NodeId a, std::vector<std::size_t> idx) {
    require_rank2(a, "row-gather");
    for (std::size_t r : idx)
      if (r >= value(a).rows()) throw ShapeMismatch("row-gather index out of range");
    Node n;
    n.op = Op::kRowGather;
    n.inputs = {a};
    n.gather = std::move(idx);
    return push(std::move(n));
  }

  NodeId asym_abs(NodeId a, double rho) {
    Node n;
    n.op = Op::kAsymAbs;
    n.inputs = {a};
    n.scalar = rho;
    return push(std::move(n));
  }

  NodeId divide_by_const(NodeId a, double c) {
    if (c == 0.0) throw ShapeMismatch("divide-by-constant: zero divisor");
    Node n;
    n.op = Op::kDivideByConst;
    n.inputs = {a};
    n.scalar = c;
    return push(std::move(n));
  }

  // b must match a's shape or be a scalar.
  NodeId divide(NodeId a, NodeId b) {
    if (!value(b).is_scalar() && !value(a).same_shape(value(b)))
      throw ShapeMismatch("divide: " + value(a).shape_str() + " / " + value(b).shape_str());
    Node n;
    n.op = Op::kDivide;
    n.inputs = {a, b};
    return push(std::move(n));
  }

  // Fused cross-entropy: sum over rows of -log softmax(logits)[label].
  NodeId nll_row_softmax(NodeId logits, std::vector<int> labels) {
    require_rank2(logits, "nll-row-softmax");
    const Tensor& z = value(logits);
    if (labels.size() != z.rows()) throw ShapeMismatch("one label per logits row required");
    for (int y : labels)
      if (y < 0 || static_cast<std::size_t>(y) >= z.cols())
        throw LabelOutOfRange("label " + std::to_string(y) + " for " + std::to_string(z.cols()) +
                              " classes");
    Node n;
    n.op = Op::kNllRowSoftmax;
    n.inputs = {logits};
    n.labels = std::move(labels);
    return push(std::move(n));
  }

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  const Node& node(NodeId id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }

  void set_leaf_value(NodeId id, const Tensor& t) {
    if (nodes_[id].op != Op::kLeaf) throw Error("set_leaf_value on a non-leaf node");
    if (!nodes_[id].value.same_shape(t)) throw ShapeMismatch("leaf shape changed");
    nodes_[id].value = t;
  }

  // Recomputes every non-leaf forward value in recording order with all
  // attributes (gather indices, constants, sparse operands) frozen.
  void replay() {
    for (Node& n : nodes_) {
      if (n.op == Op::kLeaf) continue;
      n.value = forward(n);
      check_finite(n);
    }
  }

  // Gradients of a scalar loss for every trainable leaf. Unreachable
  // parameters get zeros of matching shape.
  std::map<NodeId, Tensor> backward(NodeId loss) const {
    if (!value(loss).is_scalar())
      throw NonScalarLoss("loss node has shape " + value(loss).shape_str());
    std::vector<Tensor> grad(nodes_.size());
    std::vector<bool> has(nodes_.size(), false);
    grad[loss] = Tensor::scalar(1.0);
    has[loss] = true;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      if (!has[i] || nodes_[i].op == Op::kLeaf) continue;
      accumulate(nodes_[i], grad[i], grad, has);
    }
    std::map<NodeId, Tensor> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].op == Op::kLeaf && nodes_[i].trainable)
        out.emplace(i, has[i] ? std::move(grad[i]) : Tensor(nodes_[i].value.shape()));
    return out;
  }

 private:
  NodeId binary(Op op, NodeId a, NodeId b) {
    if (!value(a).same_shape(value(b)))
      throw ShapeMismatch(std::string(op_name(op)) + ": " + value(a).shape_str() + " vs " +
                          value(b).shape_str());
    Node n;
    n.op = op;
    n.inputs = {a, b};
    return push(std::move(n));
  }

  NodeId unary(Op op, NodeId a) {
    Node n;
    n.op = op;
    n.inputs = {a};
    return push(std::move(n));
  }

  void require_rank2(NodeId a, const char* what) const {
    if (value(a).rank() != 2) throw ShapeMismatch(std::string(what) + " must be rank 2");
  }

  NodeId push(Node n, bool check = true) {
    for (NodeId in : n.inputs)
      if (in >= nodes_.size()) throw Error("node input references a later node");
    if (n.op != Op::kLeaf) n.value = forward(n);
    if (check) check_finite(n);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  void check_finite(const Node& n) const {
    if (!n.value.all_finite())
      throw NonFiniteValue(std::string("non-finite output of ") + op_name(n.op));
    if (n.op == Op::kNllRowSoftmax && !n.saved.all_finite())
      throw NonFiniteValue("non-finite softmax in nll-row-softmax");
  }

  Tensor forward(Node& n) const {
    switch (n.op) {
      case Op::kLeaf: return n.value;
      case Op::kMatmul: {
        const Tensor& a = value(n.inputs[0]);
        const Tensor& b = value(n.inputs[1]);
        Tensor c({a.rows(), b.cols()});
        kernel::matmul(a.data(), a.rows(), a.cols(), b.data(), b.cols(), c.data());
        return c;
      }
      case Op::kAdd:
      case Op::kSubtract:
      case Op::kMultiply: {
        const Tensor& a = value(n.inputs[0]);
        const Tensor& b = value(n.inputs[1]);
        Tensor c(a.shape());
        for (std::size_t i = 0; i < a.size(); ++i)
          c[i] = n.op == Op::kAdd        ? a[i] + b[i]
                 : n.op == Op::kSubtract ? a[i] - b[i]
                                         : a[i] * b[i];
        return c;
      }
      case Op::kScalarMul: {
        const Tensor& a = value(n.inputs[0]);
        Tensor c(a.shape());
        for (std::size_t i = 0; i < a.size(); ++i) c[i] = n.scalar * a[i];
        return c;
      }
      case Op::kTranspose: {
        const Tensor& a = value(n.inputs[0]);
        Tensor c({a.cols(), a.rows()});
        for (std::size_t i = 0; i < a.rows(); ++i)
          for (std::size_t j = 0; j < a.cols(); ++j) c.at(j, i) = a.at(i, j);
        return c;
      }
      case Op::kAbs: {
        const Tensor& a = value(n.inputs[0]);
        Tensor c(a.shape());
        for (std::size_t i = 0; i < a.size(); ++i) c[i] = std::abs(a[i]);
        return c;
      }
      case Op::kRelu: {
        const Tensor& a = value(n.inputs[0]);
        Tensor c(a.shape());
        for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] > 0.0 ? a[i] : 0.0;
        return c;
      }
      case Op::kElu: {
        const Tensor& a = value(n.inputs[0]);
        Tensor c(a.shape());
        for (std::size_t i = 0; i < a.size(); ++i)
          c[i] = a[i] > 0.0 ? a[i] : std::expm1(a[i]);
        return c;
      }
      case Op::kRowSoftmax: {
        const Tensor& a = value(n.inputs[0]);
        Tensor c(a.shape());
        row_softmax_into(a, c);
        return c;
      }
      case Op::kReduceSumAll: {
        const Tensor& a = value(n.inputs[0]);
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i];
        return Tensor::scalar(s);
      }
      case Op::kReduceSumAxis: {
        const Tensor& a = value(n.inputs[0]);
        if (n.axis == 0) {
          Tensor c({1, a.cols()});
          for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) c.at(0, j) += a.at(i, j);
          return c;
        }
        Tensor c({a.rows(), 1});
        for (std::size_t i = 0; i < a.rows(); ++i)
          for (std::size_t j = 0; j < a.cols(); ++j) c.at(i, 0) += a.at(i, j);
        return c;
      }
      case Op::kTrace: {
        const Tensor& a = value(n.inputs[0]);
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) s += a.at(i, i);
        return Tensor::scalar(s);
      }
      case Op::kFrobeniusNorm: {
        const Tensor& a = value(n.inputs[0]);
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * a[i];
        return Tensor::scalar(std::sqrt(s));
      }
      case Op::kSpmm: {
        const Tensor& x = value(n.inputs[0]);
        Tensor y({n.sparse->n_rows, x.cols()});
        kernel::spmm(*n.sparse, x.data(), x.cols(), y.data());
        return y;
      }
      case Op::kRowGather: {
        const Tensor& a = value(n.inputs[0]);
        Tensor c({n.gather.size(), a.cols()});
        for (std::size_t r = 0; r < n.gather.size(); ++r)
          for (std::size_t j = 0; j < a.cols(); ++j) c.at(r, j) = a.at(n.gather[r], j);
        return c;
      }
      case Op::kAsymAbs: {
        const Tensor& a = value(n.inputs[0]);
        Tensor c(a.shape());
        for (std::size_t i = 0; i < a.size(); ++i)
          c[i] = a[i] >= 0.0 ? n.scalar * a[i] : -a[i];
        return c;
      }
      case Op::kLog: {
        const Tensor& a = value(n.inputs[0]);
        Tensor c(a.shape());
        for (std::size_t i = 0; i < a.size(); ++i) c[i] = std::log(a[i]);
        return c;
      }
      case Op::kDivideByConst: {
        const Tensor& a = value(n.inputs[0]);
        Tensor c(a.shape());
        for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] / n.scalar;
        return c;
      }
      case Op::kDivide: {
        const Tensor& a = value(n.inputs[0]);
        const Tensor& b = value(n.inputs[1]);
        Tensor c(a.shape());
        if (b.is_scalar()) {
          const double d = b.scalar_value();
          for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] / d;
        } else {
          for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] / b[i];
        }
        return c;
      }
      case Op::kNllRowSoftmax: {
        const Tensor& z = value(n.inputs[0]);
        n.saved = Tensor(z.shape());
        row_softmax_into(z, n.saved);
        double s = 0.0;
        for (std::size_t i = 0; i < z.rows(); ++i) {
          double m = z.at(i, 0);
          for (std::size_t j = 1; j < z.cols(); ++j) m = std::max(m, z.at(i, j));
          double lse = 0.0;
          for (std::size_t j = 0; j < z.cols(); ++j) lse += std::exp(z.at(i, j) - m);
          s += m + std::log(lse) - z.at(i, static_cast<std::size_t>(n.labels[i]));
        }
        return Tensor::scalar(s);
      }
    }
    throw Error("unhandled op");
  }

  static void row_softmax_into(const Tensor& a, Tensor& c) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
      double m = a.at(i, 0);
      for (std::size_t j = 1; j < a.cols(); ++j) m = std::max(m, a.at(i, j));
      double s = 0.0;
      for (std::size_t j = 0; j < a.cols(); ++j) {
        const double e = std::exp(a.at(i, j) - m);
        c.at(i, j) = e;
        s += e;
      }
      for (std::size_t j = 0; j < a.cols(); ++j) c.at(i, j) /= s;
    }
  }

  static void add_into(Tensor& acc, bool& present, const std::vector<std::size_t>& shape,
                       const Tensor& g) {
    if (!present) {
      acc = Tensor(shape);
      present = true;
    }
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
  }

  void accumulate(const Node& n, const Tensor& g, std::vector<Tensor>& grad,
                  std::vector<bool>& has) const {
    const auto sink = [&](NodeId id) -> Tensor& {
      if (!has[id]) {
        grad[id] = Tensor(value(id).shape());
        has[id] = true;
      }
      return grad[id];
    };
    switch (n.op) {
      case Op::kLeaf: return;
      case Op::kMatmul: {
        const Tensor& a = value(n.inputs[0]);
        const Tensor& b = value(n.inputs[1]);
        Tensor& da = sink(n.inputs[0]);
        Tensor& db = sink(n.inputs[1]);
        // dA += G * B^T
        Tensor bt({b.cols(), b.rows()});
        for (std::size_t i = 0; i < b.rows(); ++i)
          for (std::size_t j = 0; j < b.cols(); ++j) bt.at(j, i) = b.at(i, j);
        Tensor tmp({a.rows(), a.cols()});
        kernel::matmul(g.data(), g.rows(), g.cols(), bt.data(), bt.cols(), tmp.data());
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += tmp[i];
        // dB += A^T * G
        Tensor at({a.cols(), a.rows()});
        for (std::size_t i = 0; i < a.rows(); ++i)
          for (std::size_t j = 0; j < a.cols(); ++j) at.at(j, i) = a.at(i, j);
        Tensor tmpb({b.rows(), b.cols()});
        kernel::matmul(at.data(), at.rows(), at.cols(), g.data(), g.cols(), tmpb.data());
        for (std::size_t i = 0; i < db.size(); ++i) db[i] += tmpb[i];
        return;
      }
      case Op::kAdd: {
        Tensor& da = sink(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
        Tensor& db = sink(n.inputs[1]);
        for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i];
        return;
      }
      case Op::kSubtract: {
        Tensor& da = sink(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
        Tensor& db = sink(n.inputs[1]);
        for (std::size_t i = 0; i < g.size(); ++i) db[i] -= g[i];
        return;
      }
      case Op::kMultiply: {
        const Tensor& a = value(n.inputs[0]);
        const Tensor& b = value(n.inputs[1]);
        Tensor& da = sink(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * b[i];
        Tensor& db = sink(n.inputs[1]);
        for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * a[i];
        return;
      }
      case Op::kScalarMul: {
        Tensor& da = sink(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += n.scalar * g[i];
        return;
      }
      case Op::kTranspose: {
        Tensor& da = sink(n.inputs[0]);
        const Tensor& a = value(n.inputs[0]);
        for (std::size_t i = 0; i < a.rows(); ++i)
          for (std::size_t j = 0; j < a.cols(); ++j) da.at(i, j) += g.at(j, i);
        return;
      }
      case Op::kAbs: {
        const Tensor& a = value(n.inputs[0]);
        Tensor& da = sink(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i)
          da[i] += g[i] * (a[i] > 0.0 ? 1.0 : a[i] < 0.0 ? -1.0 : 0.0);
        return;
      }
      case Op::kRelu: {
        const Tensor& a = value(n.inputs[0]);
        Tensor& da = sink(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += a[i] > 0.0 ? g[i] : 0.0;
        return;
      }
      case Op::kElu: {
        const Tensor& a = value(n.inputs[0]);
        Tensor& da = sink(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i)
          da[i] += g[i] * (a[i] > 0.0 ? 1.0 : std::exp(a[i]));
        return;
      }
      case Op::kRowSoftmax: {
        const Tensor& y = n.value;
        Tensor& da = sink(n.inputs[0]);
        for (std::size_t i = 0; i < y.rows(); ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < y.cols(); ++j) dot += g.at(i, j) * y.at(i, j);
          for (std::size_t j = 0; j < y.cols(); ++j)
            da.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
        }
        return;
      }
      case Op::kReduceSumAll: {
        Tensor& da = sink(n.inputs[0]);
        const double gs = g.scalar_value();
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += gs;
        return;
      }
      case Op::kReduceSumAxis: {
        const Tensor& a = value(n.inputs[0]);
        Tensor& da = sink(n.inputs[0]);
        for (std::size_t i = 0; i < a.rows(); ++i)
          for (std::size_t j = 0; j < a.cols(); ++j)
            da.at(i, j) += n.axis == 0 ? g.at(0, j) : g.at(i, 0);
        return;
      }
      case Op::kTrace: {
        Tensor& da = sink(n.inputs[0]);
        const double gs = g.scalar_value();
        const Tensor& a = value(n.inputs[0]);
        for (std::size_t i = 0; i < a.rows(); ++i) da.at(i, i) += gs;
        return;
      }
      case Op::kFrobeniusNorm: {
        const double r = n.value.scalar_value();
        if (r < 1e-12) return;  // guarded: zero gradient near the origin
        const Tensor& a = value(n.inputs[0]);
        Tensor& da = sink(n.inputs[0]);
        const double gs = g.scalar_value() / r;
        for (std::size_t i = 0; i < a.size(); ++i) da[i] += gs * a[i];
        return;
      }
      case Op::kSpmm: {
        Tensor& da = sink(n.inputs[0]);
        Tensor tmp({n.sparse->n_cols, g.cols()});
        kernel::spmm_transposed(*n.sparse, g.data(), g.cols(), tmp.data());
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += tmp[i];
        return;
      }
      case Op::kRowGather: {
        Tensor& da = sink(n.inputs[0]);
        for (std::size_t r = 0; r < n.gather.size(); ++r)
          for (std::size_t j = 0; j < g.cols(); ++j) da.at(n.gather[r], j) += g.at(r, j);
        return;
      }
      case Op::kAsymAbs: {
        const Tensor& a = value(n.inputs[0]);
        Tensor& da = sink(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i)
          da[i] += g[i] * (a[i] >= 0.0 ? n.scalar : -1.0);
        return;
      }
      case Op::kLog: {
        const Tensor& a = value(n.inputs[0]);
        Tensor& da = sink(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] / a[i];
        return;
      }
      case Op::kDivideByConst: {
        Tensor& da = sink(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] / n.scalar;
        return;
      }
      case Op::kDivide: {
        const Tensor& a = value(n.inputs[0]);
        const Tensor& b = value(n.inputs[1]);
        Tensor& da = sink(n.inputs[0]);
        Tensor& db = sink(n.inputs[1]);
        if (b.is_scalar()) {
          const double d = b.scalar_value();
          double acc = 0.0;
          for (std::size_t i = 0; i < g.size(); ++i) {
            da[i] += g[i] / d;
            acc += g[i] * a[i];
          }
          db[0] -= acc / (d * d);
        } else {
          for (std::size_t i = 0; i < g.size(); ++i) {
            da[i] += g[i] / b[i];
            db[i] -= g[i] * a[i] / (b[i] * b[i]);
          }
        }
        return;
      }
      case Op::kNllRowSoftmax: {
        const Tensor& p = n.saved;
        Tensor& dz = sink(n.inputs[0]);
        const double gs = g.scalar_value();
        for (std::size_t i = 0; i < p.rows(); ++i)
          for (std::size_t j = 0; j < p.cols(); ++j) {
            const double onehot = static_cast<std::size_t>(n.labels[i]) == j ? 1.0 : 0.0;
            dz.at(i, j) += gs * (p.at(i, j) - onehot);
          }
        return;
      }
    }
  }

  std::vector<Node> nodes_;
};

}  // namespace tvgnn
