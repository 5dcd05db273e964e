#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace dlac {

inline std::string shape_str(const std::vector<int>& s) {
  std::string r = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) r += "x";
    r += std::to_string(s[i]);
  }
  return r + "]";
}

inline std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0)
      throw std::invalid_argument("tensor dimensions must be positive, got " + shape_str(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

// Dense row-major tensor with reverse-mode automatic differentiation.
// T is float for training and double for the gradient-check oracle path.
//
// A tensor is a shared handle to a graph node. Forward values are treated as
// immutable once an op has consumed the tensor; grad buffers are the only
// mutable state. A graph and its tensors are confined to one thread.
// Backward can either fill the node grad buffers (backward()) or return all
// gradients in a detached map (backward_collect()), which lets worker threads
// run backward through per-sample graphs that share leaf parameters without
// writing to any shared buffer.
template <typename T>
class TensorT {
 public:
  struct Node;
  using NodePtr = std::shared_ptr<Node>;
  using GradMap = std::unordered_map<const Node*, std::vector<T>>;

  struct Node {
    std::vector<int> shape;
    std::vector<T> value;
    std::vector<T> grad;  // empty until first use
    bool requires_grad = false;
    bool backward_used = false;  // set on a root once backward consumed the graph
    const char* op = "leaf";
    std::vector<NodePtr> inputs;
    std::function<void(const std::vector<T>&, GradMap&)> backprop;

    std::size_t numel() const { return value.size(); }
  };

  TensorT() = default;
  explicit TensorT(NodePtr n) : node_(std::move(n)) {}

  static TensorT from_data(std::vector<int> shape, std::vector<T> data, bool requires_grad = false) {
    if (shape_numel(shape) != data.size())
      throw std::invalid_argument("data length " + std::to_string(data.size()) +
                                  " does not match shape " + shape_str(shape));
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->value = std::move(data);
    n->requires_grad = requires_grad;
    return TensorT(std::move(n));
  }

  static TensorT zeros(std::vector<int> shape, bool requires_grad = false) {
    std::size_t n = shape_numel(shape);
    return from_data(std::move(shape), std::vector<T>(n, T(0)), requires_grad);
  }

  static TensorT full(std::vector<int> shape, T v, bool requires_grad = false) {
    std::size_t n = shape_numel(shape);
    return from_data(std::move(shape), std::vector<T>(n, v), requires_grad);
  }

  static TensorT scalar(T v, bool requires_grad = false) {
    return from_data({1}, {v}, requires_grad);
  }

  bool defined() const { return node_ != nullptr; }
  const std::vector<int>& shape() const { return node().shape; }
  std::size_t numel() const { return node().value.size(); }
  const std::vector<T>& value() const { return node().value; }
  bool requires_grad() const { return node().requires_grad; }
  const char* op() const { return node().op; }
  Node* raw() const { return node_.get(); }
  const NodePtr& handle() const { return node_; }

  // Leaf initialization and finite-difference probing only; op outputs are
  // conceptually immutable.
  std::vector<T>& value_mut() { return node().value; }

  T item() const {
    if (numel() != 1)
      throw std::invalid_argument("item() requires a scalar, got shape " + shape_str(shape()));
    return node().value[0];
  }

  bool has_grad() const { return !node().grad.empty(); }

  // Lazily materializes a zero buffer so an untouched leaf reads as zero grad.
  const std::vector<T>& grad() const {
    Node& n = node();
    if (n.grad.empty()) n.grad.assign(n.value.size(), T(0));
    return n.grad;
  }

  std::vector<T>& grad_mut() {
    Node& n = node();
    if (n.grad.empty()) n.grad.assign(n.value.size(), T(0));
    return n.grad;
  }

  void zero_grad() {
    Node& n = node();
    std::fill(n.grad.begin(), n.grad.end(), T(0));
  }

  // Reverse-mode sweep from a scalar root. Gradients come back in a map keyed
  // by node; grad buffers are left untouched. Each node is visited exactly
  // once. Running backward twice on the same root is an error: rebuild the
  // graph instead.
  GradMap backward_collect() {
    Node* root = node_.get();
    if (!root) throw std::logic_error("backward on an undefined tensor");
    if (root->numel() != 1)
      throw std::invalid_argument("backward requires a scalar root, got shape " +
                                  shape_str(root->shape));
    if (root->backward_used)
      throw std::logic_error("backward was already run on this graph; rebuild it before re-running");
    root->backward_used = true;

    // Iterative post-order DFS over the grad-requiring subgraph.
    std::vector<Node*> order;
    std::unordered_set<const Node*> seen;
    struct Frame {
      Node* n;
      std::size_t next_input;
    };
    std::vector<Frame> stack;
    stack.push_back({root, 0});
    seen.insert(root);
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next_input < f.n->inputs.size()) {
        Node* in = f.n->inputs[f.next_input++].get();
        if (in->requires_grad && !seen.count(in)) {
          seen.insert(in);
          stack.push_back({in, 0});
        }
      } else {
        order.push_back(f.n);
        stack.pop_back();
      }
    }

    GradMap gm;
    gm[root] = {T(1)};
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      Node* n = *it;
      if (!n->backprop) continue;
      auto found = gm.find(n);
      if (found == gm.end()) continue;
      n->backprop(found->second, gm);
    }
    return gm;
  }

  // Single-thread convenience: accumulates the collected gradients into the
  // grad buffers of every grad-requiring node.
  void backward() {
    GradMap gm = backward_collect();
    for (auto& [raw, g] : gm) {
      Node* n = const_cast<Node*>(raw);
      if (!n->requires_grad) continue;
      if (n->grad.empty()) n->grad.assign(n->value.size(), T(0));
      for (std::size_t i = 0; i < g.size(); ++i) n->grad[i] += g[i];
    }
  }

 private:
  Node& node() const {
    if (!node_) throw std::logic_error("operation on an undefined tensor");
    return *node_;
  }

  NodePtr node_;
};

using Tensor = TensorT<float>;

namespace detail {

template <typename T>
TensorT<T> make_op(std::vector<int> shape, const char* op,
                   std::vector<typename TensorT<T>::NodePtr> inputs) {
  auto n = std::make_shared<typename TensorT<T>::Node>();
  n->shape = std::move(shape);
  n->value.assign(shape_numel(n->shape), T(0));
  n->op = op;
  for (auto& in : inputs)
    if (in->requires_grad) n->requires_grad = true;
  n->inputs = std::move(inputs);
  return TensorT<T>(std::move(n));
}

template <typename T>
std::vector<T>& grad_buf(typename TensorT<T>::GradMap& gm,
                         const typename TensorT<T>::Node* n) {
  auto it = gm.find(n);
  if (it == gm.end()) it = gm.emplace(n, std::vector<T>(n->value.size(), T(0))).first;
  return it->second;
}

template <typename T>
void require_rank(const TensorT<T>& t, std::size_t rank, const char* op) {
  if (t.shape().size() != rank)
    throw std::invalid_argument(std::string(op) + ": expected rank " + std::to_string(rank) +
                                ", got shape " + shape_str(t.shape()));
}

// Output index range for one kernel offset such that the corresponding input
// index stays inside the unpadded image (zero-padding taps contribute nothing
// and are skipped).
inline int conv_lo(int koff, int stride, int padding) {
  return koff < padding ? (padding - koff + stride - 1) / stride : 0;
}

inline int conv_hi(int koff, int in_dim, int out_dim, int stride, int padding) {
  int h = (in_dim - 1 + padding - koff) / stride + 1;
  if (h < 0) h = 0;
  return h < out_dim ? h : out_dim;
}

}  // namespace detail

// ---- elementwise -----------------------------------------------------------
// Binary ops take identical shapes, or one scalar operand; nothing else
// broadcasts.

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
  const bool same = a.shape() == b.shape();
  if (!same && a.numel() != 1 && b.numel() != 1)
    throw std::invalid_argument("add: shape mismatch " + shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  const TensorT<T>& big = (a.numel() >= b.numel()) ? a : b;
  auto out = detail::make_op<T>(big.shape(), "add", {a.handle(), b.handle()});
  auto& v = out.raw()->value;
  const auto& av = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = (av.size() == 1 ? av[0] : av[i]) + (bv.size() == 1 ? bv[0] : bv[i]);

  auto* an = a.raw();
  auto* bn = b.raw();
  out.raw()->backprop = [an, bn](const std::vector<T>& gout,
                                 typename TensorT<T>::GradMap& gm) {
    if (an->requires_grad) {
      auto& ga = detail::grad_buf<T>(gm, an);
      if (ga.size() == gout.size()) {
        for (std::size_t i = 0; i < gout.size(); ++i) ga[i] += gout[i];
      } else {  // scalar operand: gradient is the total
        T s = 0;
        for (T g : gout) s += g;
        ga[0] += s;
      }
    }
    if (bn->requires_grad) {
      auto& gb = detail::grad_buf<T>(gm, bn);
      if (gb.size() == gout.size()) {
        for (std::size_t i = 0; i < gout.size(); ++i) gb[i] += gout[i];
      } else {
        T s = 0;
        for (T g : gout) s += g;
        gb[0] += s;
      }
    }
  };
  return out;
}

template <typename T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
  const bool same = a.shape() == b.shape();
  if (!same && a.numel() != 1 && b.numel() != 1)
    throw std::invalid_argument("mul: shape mismatch " + shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  const TensorT<T>& big = (a.numel() >= b.numel()) ? a : b;
  auto out = detail::make_op<T>(big.shape(), "mul", {a.handle(), b.handle()});
  auto& v = out.raw()->value;
  const auto& av = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = (av.size() == 1 ? av[0] : av[i]) * (bv.size() == 1 ? bv[0] : bv[i]);

  auto* an = a.raw();
  auto* bn = b.raw();
  out.raw()->backprop = [an, bn](const std::vector<T>& gout,
                                 typename TensorT<T>::GradMap& gm) {
    const auto& av = an->value;
    const auto& bv = bn->value;
    if (an->requires_grad) {
      auto& ga = detail::grad_buf<T>(gm, an);
      if (ga.size() == gout.size()) {
        for (std::size_t i = 0; i < gout.size(); ++i)
          ga[i] += gout[i] * (bv.size() == 1 ? bv[0] : bv[i]);
      } else {
        T s = 0;
        for (std::size_t i = 0; i < gout.size(); ++i) s += gout[i] * bv[i];
        ga[0] += s;
      }
    }
    if (bn->requires_grad) {
      auto& gb = detail::grad_buf<T>(gm, bn);
      if (gb.size() == gout.size()) {
        for (std::size_t i = 0; i < gout.size(); ++i)
          gb[i] += gout[i] * (av.size() == 1 ? av[0] : av[i]);
      } else {
        T s = 0;
        for (std::size_t i = 0; i < gout.size(); ++i) s += gout[i] * av[i];
        gb[0] += s;
      }
    }
  };
  return out;
}

template <typename T>
TensorT<T> relu(const TensorT<T>& a) {
  auto out = detail::make_op<T>(a.shape(), "relu", {a.handle()});
  auto& v = out.raw()->value;
  const auto& av = a.value();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = av[i] > T(0) ? av[i] : T(0);

  auto* an = a.raw();
  out.raw()->backprop = [an](const std::vector<T>& gout, typename TensorT<T>::GradMap& gm) {
    if (!an->requires_grad) return;
    auto& ga = detail::grad_buf<T>(gm, an);
    const auto& av = an->value;
    for (std::size_t i = 0; i < gout.size(); ++i)
      if (av[i] > T(0)) ga[i] += gout[i];
  };
  return out;
}

// Multiply by a plain constant.
template <typename T>
TensorT<T> scale(const TensorT<T>& a, T c) {
  auto out = detail::make_op<T>(a.shape(), "scale", {a.handle()});
  auto& v = out.raw()->value;
  const auto& av = a.value();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = av[i] * c;

  auto* an = a.raw();
  out.raw()->backprop = [an, c](const std::vector<T>& gout, typename TensorT<T>::GradMap& gm) {
    if (!an->requires_grad) return;
    auto& ga = detail::grad_buf<T>(gm, an);
    for (std::size_t i = 0; i < gout.size(); ++i) ga[i] += gout[i] * c;
  };
  return out;
}

template <typename T>
TensorT<T> sum(const TensorT<T>& a) {
  auto out = detail::make_op<T>({1}, "sum", {a.handle()});
  T s = 0;
  for (T x : a.value()) s += x;
  out.raw()->value[0] = s;

  auto* an = a.raw();
  out.raw()->backprop = [an](const std::vector<T>& gout, typename TensorT<T>::GradMap& gm) {
    if (!an->requires_grad) return;
    auto& ga = detail::grad_buf<T>(gm, an);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gout[0];
  };
  return out;
}

template <typename T>
TensorT<T> reshape(const TensorT<T>& a, std::vector<int> shape) {
  if (shape_numel(shape) != a.numel())
    throw std::invalid_argument("reshape: cannot view " + shape_str(a.shape()) + " as " +
                                shape_str(shape));
  auto out = detail::make_op<T>(std::move(shape), "reshape", {a.handle()});
  out.raw()->value = a.value();

  auto* an = a.raw();
  out.raw()->backprop = [an](const std::vector<T>& gout, typename TensorT<T>::GradMap& gm) {
    if (!an->requires_grad) return;
    auto& ga = detail::grad_buf<T>(gm, an);
    for (std::size_t i = 0; i < gout.size(); ++i) ga[i] += gout[i];
  };
  return out;
}

// Picks one element (flat index) as a scalar; the Grad-CAM path uses this to
// seed backward from a single logit.
template <typename T>
TensorT<T> select(const TensorT<T>& a, int index) {
  if (index < 0 || static_cast<std::size_t>(index) >= a.numel())
    throw std::invalid_argument("select: index " + std::to_string(index) +
                                " out of range for shape " + shape_str(a.shape()));
  auto out = detail::make_op<T>({1}, "select", {a.handle()});
  out.raw()->value[0] = a.value()[static_cast<std::size_t>(index)];

  auto* an = a.raw();
  out.raw()->backprop = [an, index](const std::vector<T>& gout,
                                    typename TensorT<T>::GradMap& gm) {
    if (!an->requires_grad) return;
    detail::grad_buf<T>(gm, an)[static_cast<std::size_t>(index)] += gout[0];
  };
  return out;
}

// ---- matmul ----------------------------------------------------------------

template <typename T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
  detail::require_rank(a, 2, "matmul");
  detail::require_rank(b, 2, "matmul");
  const int m = a.shape()[0], k = a.shape()[1];
  const int k2 = b.shape()[0], n = b.shape()[1];
  if (k != k2)
    throw std::invalid_argument("matmul: inner dimensions differ, " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
  auto out = detail::make_op<T>({m, n}, "matmul", {a.handle(), b.handle()});
  T* ov = out.raw()->value.data();
  const T* av = a.value().data();
  const T* bv = b.value().data();
  // Each output element accumulates in ascending inner index.
  for (int i = 0; i < m; ++i)
    for (int kk = 0; kk < k; ++kk) {
      const T aik = av[i * k + kk];
      const T* brow = bv + static_cast<std::size_t>(kk) * n;
      T* orow = ov + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) orow[j] += aik * brow[j];
    }

  auto* an = a.raw();
  auto* bn = b.raw();
  out.raw()->backprop = [an, bn, m, k, n](const std::vector<T>& gout,
                                          typename TensorT<T>::GradMap& gm) {
    const T* av = an->value.data();
    const T* bv = bn->value.data();
    if (an->requires_grad) {  // dA = dC * B^T
      auto& ga = detail::grad_buf<T>(gm, an);
      for (int i = 0; i < m; ++i)
        for (int kk = 0; kk < k; ++kk) {
          T acc = 0;
          const T* grow = gout.data() + static_cast<std::size_t>(i) * n;
          const T* brow = bv + static_cast<std::size_t>(kk) * n;
          for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
          ga[static_cast<std::size_t>(i) * k + kk] += acc;
        }
    }
    if (bn->requires_grad) {  // dB = A^T * dC
      auto& gb = detail::grad_buf<T>(gm, bn);
      for (int i = 0; i < m; ++i)
        for (int kk = 0; kk < k; ++kk) {
          const T aik = av[static_cast<std::size_t>(i) * k + kk];
          const T* grow = gout.data() + static_cast<std::size_t>(i) * n;
          T* gbrow = gb.data() + static_cast<std::size_t>(kk) * n;
          for (int j = 0; j < n; ++j) gbrow[j] += aik * grow[j];
        }
    }
  };
  return out;
}

// ---- conv2d ----------------------------------------------------------------
// Cross-correlation (no kernel flip), zero padding. input [Cin x H x W],
// kernels [Cout x Cin x kH x kW]. Every output element accumulates its taps
// in ascending (cin, ky, kx) order, which keeps results bit-identical to the
// straightforward quadruple-loop formulation.

template <typename T>
TensorT<T> conv2d(const TensorT<T>& input, const TensorT<T>& kernels, int stride, int padding) {
  detail::require_rank(input, 3, "conv2d");
  detail::require_rank(kernels, 4, "conv2d");
  if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
  if (padding < 0) throw std::invalid_argument("conv2d: padding must be >= 0");
  const int Ci = input.shape()[0], H = input.shape()[1], W = input.shape()[2];
  const int Co = kernels.shape()[0], Ck = kernels.shape()[1];
  const int kh = kernels.shape()[2], kw = kernels.shape()[3];
  if (Ck != Ci)
    throw std::invalid_argument("conv2d: input channels " + std::to_string(Ci) +
                                " do not match kernel channels " + std::to_string(Ck));
  if (kh > H + 2 * padding || kw > W + 2 * padding)
    throw std::invalid_argument("conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                                " larger than padded input " + std::to_string(H + 2 * padding) +
                                "x" + std::to_string(W + 2 * padding));
  const int Ho = (H + 2 * padding - kh) / stride + 1;
  const int Wo = (W + 2 * padding - kw) / stride + 1;

  auto out = detail::make_op<T>({Co, Ho, Wo}, "conv2d", {input.handle(), kernels.handle()});
  T* ov = out.raw()->value.data();
  const T* iv = input.value().data();
  const T* wv = kernels.value().data();

  for (int co = 0; co < Co; ++co) {
    T* oplane = ov + static_cast<std::size_t>(co) * Ho * Wo;
    for (int ci = 0; ci < Ci; ++ci) {
      const T* iplane = iv + static_cast<std::size_t>(ci) * H * W;
      for (int ky = 0; ky < kh; ++ky) {
        const int oy_lo = detail::conv_lo(ky, stride, padding);
        const int oy_hi = detail::conv_hi(ky, H, Ho, stride, padding);
        for (int kx = 0; kx < kw; ++kx) {
          const T w = wv[((static_cast<std::size_t>(co) * Ci + ci) * kh + ky) * kw + kx];
          const int ox_lo = detail::conv_lo(kx, stride, padding);
          const int ox_hi = detail::conv_hi(kx, W, Wo, stride, padding);
          for (int oy = oy_lo; oy < oy_hi; ++oy) {
            const int iy = oy * stride + ky - padding;
            const T* irow = iplane + static_cast<std::size_t>(iy) * W + (kx - padding);
            T* orow = oplane + static_cast<std::size_t>(oy) * Wo;
            if (stride == 1) {
              for (int ox = ox_lo; ox < ox_hi; ++ox) orow[ox] += w * irow[ox];
            } else {
              for (int ox = ox_lo; ox < ox_hi; ++ox) orow[ox] += w * irow[ox * stride];
            }
          }
        }
      }
    }
  }

  auto* in_node = input.raw();
  auto* k_node = kernels.raw();
  out.raw()->backprop = [in_node, k_node, Ci, H, W, Co, kh, kw, Ho, Wo, stride, padding](
                            const std::vector<T>& gout, typename TensorT<T>::GradMap& gm) {
    const T* iv = in_node->value.data();
    const T* wv = k_node->value.data();
    if (in_node->requires_grad) {
      auto& gi = detail::grad_buf<T>(gm, in_node);
      for (int co = 0; co < Co; ++co) {
        const T* gplane = gout.data() + static_cast<std::size_t>(co) * Ho * Wo;
        for (int ci = 0; ci < Ci; ++ci) {
          T* giplane = gi.data() + static_cast<std::size_t>(ci) * H * W;
          for (int ky = 0; ky < kh; ++ky) {
            const int oy_lo = detail::conv_lo(ky, stride, padding);
            const int oy_hi = detail::conv_hi(ky, H, Ho, stride, padding);
            for (int kx = 0; kx < kw; ++kx) {
              const T w = wv[((static_cast<std::size_t>(co) * Ci + ci) * kh + ky) * kw + kx];
              const int ox_lo = detail::conv_lo(kx, stride, padding);
              const int ox_hi = detail::conv_hi(kx, W, Wo, stride, padding);
              for (int oy = oy_lo; oy < oy_hi; ++oy) {
                const int iy = oy * stride + ky - padding;
                T* girow = giplane + static_cast<std::size_t>(iy) * W + (kx - padding);
                const T* grow = gplane + static_cast<std::size_t>(oy) * Wo;
                for (int ox = ox_lo; ox < ox_hi; ++ox) girow[ox * stride] += w * grow[ox];
              }
            }
          }
        }
      }
    }
    if (k_node->requires_grad) {
      auto& gk = detail::grad_buf<T>(gm, k_node);
      for (int co = 0; co < Co; ++co) {
        const T* gplane = gout.data() + static_cast<std::size_t>(co) * Ho * Wo;
        for (int ci = 0; ci < Ci; ++ci) {
          const T* iplane = iv + static_cast<std::size_t>(ci) * H * W;
          for (int ky = 0; ky < kh; ++ky) {
            const int oy_lo = detail::conv_lo(ky, stride, padding);
            const int oy_hi = detail::conv_hi(ky, H, Ho, stride, padding);
            for (int kx = 0; kx < kw; ++kx) {
              const int ox_lo = detail::conv_lo(kx, stride, padding);
              const int ox_hi = detail::conv_hi(kx, W, Wo, stride, padding);
              T acc = 0;
              for (int oy = oy_lo; oy < oy_hi; ++oy) {
                const int iy = oy * stride + ky - padding;
                const T* irow = iplane + static_cast<std::size_t>(iy) * W + (kx - padding);
                const T* grow = gplane + static_cast<std::size_t>(oy) * Wo;
                if (stride == 1) {
                  for (int ox = ox_lo; ox < ox_hi; ++ox) acc += grow[ox] * irow[ox];
                } else {
                  for (int ox = ox_lo; ox < ox_hi; ++ox) acc += grow[ox] * irow[ox * stride];
                }
              }
              gk[((static_cast<std::size_t>(co) * Ci + ci) * kh + ky) * kw + kx] += acc;
            }
          }
        }
      }
    }
  };
  return out;
}

// Per-channel bias for feature maps: x [C x H x W] + b [C].
template <typename T>
TensorT<T> add_channel_bias(const TensorT<T>& x, const TensorT<T>& b) {
  detail::require_rank(x, 3, "add_channel_bias");
  detail::require_rank(b, 1, "add_channel_bias");
  const int C = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
  if (b.shape()[0] != C)
    throw std::invalid_argument("add_channel_bias: bias " + shape_str(b.shape()) +
                                " does not match channels of " + shape_str(x.shape()));
  auto out = detail::make_op<T>(x.shape(), "add_channel_bias", {x.handle(), b.handle()});
  auto& v = out.raw()->value;
  const auto& xv = x.value();
  const auto& bv = b.value();
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  for (int c = 0; c < C; ++c) {
    const T bc = bv[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < plane; ++i) v[c * plane + i] = xv[c * plane + i] + bc;
  }

  auto* xn = x.raw();
  auto* bn = b.raw();
  out.raw()->backprop = [xn, bn, C, plane](const std::vector<T>& gout,
                                           typename TensorT<T>::GradMap& gm) {
    if (xn->requires_grad) {
      auto& gx = detail::grad_buf<T>(gm, xn);
      for (std::size_t i = 0; i < gout.size(); ++i) gx[i] += gout[i];
    }
    if (bn->requires_grad) {
      auto& gb = detail::grad_buf<T>(gm, bn);
      for (int c = 0; c < C; ++c) {
        T s = 0;
        for (std::size_t i = 0; i < plane; ++i) s += gout[c * plane + i];
        gb[static_cast<std::size_t>(c)] += s;
      }
    }
  };
  return out;
}

// ---- global average pool ---------------------------------------------------

template <typename T>
TensorT<T> global_avg_pool(const TensorT<T>& x) {
  detail::require_rank(x, 3, "global_avg_pool");
  const int C = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
  auto out = detail::make_op<T>({C}, "global_avg_pool", {x.handle()});
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  const T inv = T(1) / static_cast<T>(plane);
  const auto& xv = x.value();
  for (int c = 0; c < C; ++c) {
    T s = 0;
    for (std::size_t i = 0; i < plane; ++i) s += xv[c * plane + i];
    out.raw()->value[static_cast<std::size_t>(c)] = s * inv;
  }

  auto* xn = x.raw();
  out.raw()->backprop = [xn, C, plane, inv](const std::vector<T>& gout,
                                            typename TensorT<T>::GradMap& gm) {
    if (!xn->requires_grad) return;
    auto& gx = detail::grad_buf<T>(gm, xn);
    for (int c = 0; c < C; ++c) {
      const T g = gout[static_cast<std::size_t>(c)] * inv;
      for (std::size_t i = 0; i < plane; ++i) gx[c * plane + i] += g;
    }
  };
  return out;
}

// ---- softmax / cross-entropy -----------------------------------------------

// Numerically stable softmax on a raw logit vector (no graph).
template <typename T>
std::vector<T> softmax(const std::vector<T>& logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty logits");
  T m = logits[0];
  for (T x : logits) m = std::max(m, x);
  std::vector<T> p(logits.size());
  T z = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (T& x : p) x /= z;
  return p;
}

// loss = -log softmax(logits)[label], with max subtraction for stability.
template <typename T>
TensorT<T> softmax_cross_entropy(const TensorT<T>& logits, int label) {
  detail::require_rank(logits, 1, "softmax_cross_entropy");
  const int d = logits.shape()[0];
  if (label < 0 || label >= d)
    throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(label) +
                                " out of range [0, " + std::to_string(d) + ")");
  const auto& lv = logits.value();
  T m = lv[0];
  for (T x : lv) m = std::max(m, x);
  T z = 0;
  for (T x : lv) z += std::exp(x - m);
  auto out = detail::make_op<T>({1}, "softmax_cross_entropy", {logits.handle()});
  out.raw()->value[0] = std::log(z) + m - lv[static_cast<std::size_t>(label)];

  std::vector<T> probs(lv.size());
  for (std::size_t i = 0; i < lv.size(); ++i) probs[i] = std::exp(lv[i] - m) / z;

  auto* ln = logits.raw();
  out.raw()->backprop = [ln, label, probs = std::move(probs)](
                            const std::vector<T>& gout, typename TensorT<T>::GradMap& gm) {
    if (!ln->requires_grad) return;
    auto& gl = detail::grad_buf<T>(gm, ln);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      T g = probs[i];
      if (i == static_cast<std::size_t>(label)) g -= T(1);
      gl[i] += gout[0] * g;
    }
  };
  return out;
}

// ---- SGD with momentum -----------------------------------------------------
// v <- momentum * v + grad; param <- param - lr * v; grads are zeroed after
// the step. A parameter whose grad buffer was never populated is an error.

template <typename T>
class SgdT {
 public:
  explicit SgdT(std::vector<TensorT<T>> params) : params_(std::move(params)) {
    velocity_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i)
      velocity_[i].assign(params_[i].numel(), T(0));
  }

  void step(T lr, T momentum) {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = params_[i];
      if (!p.has_grad())
        throw std::invalid_argument("sgd_step: parameter " + std::to_string(i) +
                                    " has no gradient; run backward first");
      auto& vel = velocity_[i];
      auto& val = p.value_mut();
      auto& g = p.grad_mut();
      for (std::size_t j = 0; j < val.size(); ++j) {
        vel[j] = momentum * vel[j] + g[j];
        val[j] -= lr * vel[j];
      }
      p.zero_grad();
    }
  }

  const std::vector<TensorT<T>>& params() const { return params_; }

 private:
  std::vector<TensorT<T>> params_;
  std::vector<std::vector<T>> velocity_;
};

using Sgd = SgdT<float>;

}  // namespace dlac
