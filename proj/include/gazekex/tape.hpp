#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gazekex/error.hpp"
#include "gazekex/tensor.hpp"

namespace gazekex {

// Reverse-mode autodiff over a flat op tape. Nodes are append-only; backward
// walks them in reverse creation order. Every op validates shapes eagerly so
// a bad wiring fails at graph build time, not inside backward.
class Tape {
 public:
  using NodeId = std::size_t;

  enum class Op {
    kInput,
    kAffine,        // y = W x + b
    kTanh,
    kLogistic,
    kMul,           // elementwise
    kAdd,           // elementwise
    kScale,         // y = c * x
    kConcat,        // variadic, rank-1 inputs
    kSlice,         // contiguous rank-1 slice
    kSoftmax,       // rank-1
    kSumNormalize,  // rank-1, y_i = x_i / sum(x)
    kSquaredError,  // scalar sum((a-b)^2)
    kSum,           // scalar sum of elements
  };

  NodeId input(Tensor value) {
    return push(Op::kInput, {}, std::move(value));
  }

  // y = W x + b. W is [m,n], x is [n], b is [m].
  NodeId affine(NodeId w, NodeId x, NodeId b) {
    const Tensor& tw = value(w);
    const Tensor& tx = value(x);
    const Tensor& tb = value(b);
    if (tw.rank() != 2) throw ShapeError("affine: W must be rank-2, got " + shape_str(tw.shape()));
    if (tx.rank() != 1) throw ShapeError("affine: x must be rank-1, got " + shape_str(tx.shape()));
    if (tb.rank() != 1) throw ShapeError("affine: b must be rank-1, got " + shape_str(tb.shape()));
    const std::size_t m = tw.dim(0);
    const std::size_t n = tw.dim(1);
    if (tx.dim(0) != n) {
      throw ShapeError("affine: W cols " + std::to_string(n) + " vs x len " + std::to_string(tx.dim(0)));
    }
    if (tb.dim(0) != m) {
      throw ShapeError("affine: W rows " + std::to_string(m) + " vs b len " + std::to_string(tb.dim(0)));
    }
    Tensor y(Shape{m});
    for (std::size_t r = 0; r < m; ++r) {
      double acc = tb[r];
      for (std::size_t c = 0; c < n; ++c) acc += tw.at(r, c) * tx[c];
      y[r] = acc;
    }
    return push(Op::kAffine, {w, x, b}, std::move(y));
  }

  NodeId tanh(NodeId x) {
    Tensor y(value(x).shape());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(value(x)[i]);
    return push(Op::kTanh, {x}, std::move(y));
  }

  NodeId logistic(NodeId x) {
    Tensor y(value(x).shape());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-value(x)[i]));
    return push(Op::kLogistic, {x}, std::move(y));
  }

  NodeId mul(NodeId a, NodeId b) {
    require_same_shape(value(a), value(b), "mul");
    Tensor y(value(a).shape());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = value(a)[i] * value(b)[i];
    return push(Op::kMul, {a, b}, std::move(y));
  }

  NodeId add(NodeId a, NodeId b) {
    require_same_shape(value(a), value(b), "add");
    Tensor y(value(a).shape());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = value(a)[i] + value(b)[i];
    return push(Op::kAdd, {a, b}, std::move(y));
  }

  NodeId scale(NodeId x, double c) {
    Tensor y(value(x).shape());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = c * value(x)[i];
    NodeId id = push(Op::kScale, {x}, std::move(y));
    nodes_[id].constant = c;
    return id;
  }

  NodeId concat(const std::vector<NodeId>& parts) {
    if (parts.empty()) throw ContractError("concat: no inputs");
    std::size_t total = 0;
    for (NodeId p : parts) {
      if (value(p).rank() != 1) throw ShapeError("concat: rank-1 inputs only");
      total += value(p).size();
    }
    Tensor y(Shape{total});
    std::size_t off = 0;
    for (NodeId p : parts) {
      for (std::size_t i = 0; i < value(p).size(); ++i) y[off + i] = value(p)[i];
      off += value(p).size();
    }
    return push(Op::kConcat, parts, std::move(y));
  }

  NodeId slice(NodeId x, std::size_t begin, std::size_t len) {
    const Tensor& tx = value(x);
    if (tx.rank() != 1) throw ShapeError("slice: rank-1 input only");
    if (begin + len > tx.size()) {
      throw ShapeError("slice: [" + std::to_string(begin) + "," + std::to_string(begin + len) +
                       ") out of range for length " + std::to_string(tx.size()));
    }
    if (len == 0) throw ShapeError("slice: zero length");
    Tensor y(Shape{len});
    for (std::size_t i = 0; i < len; ++i) y[i] = tx[begin + i];
    NodeId id = push(Op::kSlice, {x}, std::move(y));
    nodes_[id].offset = begin;
    return id;
  }

  // Numerically stable softmax over a rank-1 vector.
  NodeId softmax(NodeId x) {
    const Tensor& tx = value(x);
    if (tx.rank() != 1) throw ShapeError("softmax: rank-1 input only");
    double mx = tx[0];
    for (std::size_t i = 1; i < tx.size(); ++i) mx = std::max(mx, tx[i]);
    Tensor y(tx.shape());
    double z = 0.0;
    for (std::size_t i = 0; i < tx.size(); ++i) {
      y[i] = std::exp(tx[i] - mx);
      z += y[i];
    }
    for (std::size_t i = 0; i < tx.size(); ++i) y[i] /= z;
    return push(Op::kSoftmax, {x}, std::move(y));
  }

  // y_i = x_i / sum(x). Unlike softmax there is no exp, so the denominator can
  // vanish or flip sign; evaluation refuses near-zero sums outright.
  NodeId sum_normalize(NodeId x) {
    const Tensor& tx = value(x);
    if (tx.rank() != 1) throw ShapeError("sum_normalize: rank-1 input only");
    double s = 0.0;
    for (std::size_t i = 0; i < tx.size(); ++i) s += tx[i];
    if (std::abs(s) < 1e-8) {
      throw EvalError("sum_normalize: sum " + std::to_string(s) + " too close to zero");
    }
    Tensor y(tx.shape());
    for (std::size_t i = 0; i < tx.size(); ++i) y[i] = tx[i] / s;
    NodeId id = push(Op::kSumNormalize, {x}, std::move(y));
    nodes_[id].constant = s;
    return id;
  }

  // Scalar sum((a - b)^2).
  NodeId squared_error(NodeId a, NodeId b) {
    require_same_shape(value(a), value(b), "squared_error");
    double acc = 0.0;
    for (std::size_t i = 0; i < value(a).size(); ++i) {
      const double d = value(a)[i] - value(b)[i];
      acc += d * d;
    }
    return push(Op::kSquaredError, {a, b}, Tensor::scalar(acc));
  }

  NodeId sum(NodeId x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < value(x).size(); ++i) acc += value(x)[i];
    return push(Op::kSum, {x}, Tensor::scalar(acc));
  }

  const Tensor& value(NodeId id) const { return nodes_.at(id).value; }
  const Tensor& grad(NodeId id) const { return nodes_.at(id).grad; }
  std::size_t node_count() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and accumulates gradients into every node.
  // The loss must be a scalar (single-element tensor).
  void backward(NodeId loss) {
    if (value(loss).size() != 1) {
      throw ContractError("backward: loss must be scalar, got shape " + shape_str(value(loss).shape()));
    }
    for (auto& n : nodes_) n.grad.fill(0.0);
    nodes_[loss].grad[0] = 1.0;

    for (std::size_t k = nodes_.size(); k-- > 0;) {
      Node& n = nodes_[k];
      switch (n.op) {
        case Op::kInput:
          break;
        case Op::kAffine: {
          Node& nw = nodes_[n.inputs[0]];
          Node& nx = nodes_[n.inputs[1]];
          Node& nb = nodes_[n.inputs[2]];
          const std::size_t m = nw.value.dim(0);
          const std::size_t cols = nw.value.dim(1);
          for (std::size_t r = 0; r < m; ++r) {
            const double g = n.grad[r];
            nb.grad[r] += g;
            for (std::size_t c = 0; c < cols; ++c) {
              nw.grad.at(r, c) += g * nx.value[c];
              nx.grad[c] += g * nw.value.at(r, c);
            }
          }
          break;
        }
        case Op::kTanh: {
          Node& nx = nodes_[n.inputs[0]];
          for (std::size_t i = 0; i < n.value.size(); ++i) {
            nx.grad[i] += n.grad[i] * (1.0 - n.value[i] * n.value[i]);
          }
          break;
        }
        case Op::kLogistic: {
          Node& nx = nodes_[n.inputs[0]];
          for (std::size_t i = 0; i < n.value.size(); ++i) {
            nx.grad[i] += n.grad[i] * n.value[i] * (1.0 - n.value[i]);
          }
          break;
        }
        case Op::kMul: {
          Node& na = nodes_[n.inputs[0]];
          Node& nb = nodes_[n.inputs[1]];
          for (std::size_t i = 0; i < n.value.size(); ++i) {
            na.grad[i] += n.grad[i] * nb.value[i];
            nb.grad[i] += n.grad[i] * na.value[i];
          }
          break;
        }
        case Op::kAdd: {
          Node& na = nodes_[n.inputs[0]];
          Node& nb = nodes_[n.inputs[1]];
          for (std::size_t i = 0; i < n.value.size(); ++i) {
            na.grad[i] += n.grad[i];
            nb.grad[i] += n.grad[i];
          }
          break;
        }
        case Op::kScale: {
          Node& nx = nodes_[n.inputs[0]];
          for (std::size_t i = 0; i < n.value.size(); ++i) nx.grad[i] += n.grad[i] * n.constant;
          break;
        }
        case Op::kConcat: {
          std::size_t off = 0;
          for (NodeId p : n.inputs) {
            Node& np = nodes_[p];
            for (std::size_t i = 0; i < np.value.size(); ++i) np.grad[i] += n.grad[off + i];
            off += np.value.size();
          }
          break;
        }
        case Op::kSlice: {
          Node& nx = nodes_[n.inputs[0]];
          for (std::size_t i = 0; i < n.value.size(); ++i) nx.grad[n.offset + i] += n.grad[i];
          break;
        }
        case Op::kSoftmax: {
          Node& nx = nodes_[n.inputs[0]];
          double dot = 0.0;
          for (std::size_t i = 0; i < n.value.size(); ++i) dot += n.grad[i] * n.value[i];
          for (std::size_t i = 0; i < n.value.size(); ++i) {
            nx.grad[i] += n.value[i] * (n.grad[i] - dot);
          }
          break;
        }
        case Op::kSumNormalize: {
          Node& nx = nodes_[n.inputs[0]];
          const double s = n.constant;
          double dot = 0.0;
          for (std::size_t i = 0; i < n.value.size(); ++i) dot += n.grad[i] * n.value[i];
          for (std::size_t i = 0; i < n.value.size(); ++i) {
            nx.grad[i] += (n.grad[i] - dot) / s;
          }
          break;
        }
        case Op::kSquaredError: {
          Node& na = nodes_[n.inputs[0]];
          Node& nb = nodes_[n.inputs[1]];
          const double g = n.grad[0];
          for (std::size_t i = 0; i < na.value.size(); ++i) {
            const double d = 2.0 * g * (na.value[i] - nb.value[i]);
            na.grad[i] += d;
            nb.grad[i] -= d;
          }
          break;
        }
        case Op::kSum: {
          Node& nx = nodes_[n.inputs[0]];
          const double g = n.grad[0];
          for (std::size_t i = 0; i < nx.value.size(); ++i) nx.grad[i] += g;
          break;
        }
      }
    }
  }

 private:
  struct Node {
    Op op;
    std::vector<NodeId> inputs;
    Tensor value;
    Tensor grad;
    double constant = 0.0;   // kScale factor / kSumNormalize denominator
    std::size_t offset = 0;  // kSlice begin
  };

  NodeId push(Op op, std::vector<NodeId> inputs, Tensor value) {
    Node n;
    n.op = op;
    n.inputs = std::move(inputs);
    n.grad = Tensor(value.shape());
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  std::vector<Node> nodes_;
};

}  // namespace gazekex
