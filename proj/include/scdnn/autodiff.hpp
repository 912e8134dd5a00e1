/* Copyright 2026 The SCDNN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Reverse-mode automatic differentiation over a dynamic tape.
//
// A Tape records every operation of one forward pass. Leaves are either
// constants (never differentiated), owned variables, or references to
// externally stored parameters. Tape::backward walks the records in reverse
// order and returns the gradient of a scalar loss for every differentiable
// leaf it reaches. Fan-out is handled by summing into the input gradient
// buffers, so a node consumed twice receives both contributions.

#ifndef SCDNN_AUTODIFF_HPP_
#define SCDNN_AUTODIFF_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scdnn/linalg.hpp"
#include "scdnn/tensor.hpp"

namespace scdnn::ad {

class Tape;
class BackwardContext;

using BackwardRule = std::function<void(BackwardContext&)>;

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  std::size_t id() const { return id_; }
  Tape& tape() const { return *tape_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Gradients of one backward pass, keyed by leaf node id.
class GradientMap {
 public:
  bool contains(const Var& v) const { return grads_.count(v.id()) != 0; }
  bool contains(std::size_t id) const { return grads_.count(id) != 0; }

  const Tensor& at(const Var& v) const { return at(v.id()); }
  const Tensor& at(std::size_t id) const {
    auto it = grads_.find(id);
    if (it == grads_.end()) {
      throw std::out_of_range("gradient map: no gradient for node " +
                              std::to_string(id));
    }
    return it->second;
  }

  std::size_t size() const { return grads_.size(); }
  auto begin() const { return grads_.begin(); }
  auto end() const { return grads_.end(); }

 private:
  friend class Tape;
  std::map<std::size_t, Tensor> grads_;
};

namespace detail {

struct Node {
  std::string_view op;
  std::vector<std::size_t> inputs;
  Tensor owned;
  const Tensor* external = nullptr;
  bool leaf = false;
  bool requires_grad = false;
  BackwardRule rule;

  const Tensor& value() const { return external ? *external : owned; }
};

}  // namespace detail

/// Gives a backward rule access to its node's inputs and gradient buffers.
class BackwardContext {
 public:
  const Tensor& input(std::size_t k) const;
  const Tensor& output() const { return node_.value(); }
  std::span<const double> grad_output() const { return grad_out_; }
  std::size_t input_count() const { return node_.inputs.size(); }

  /// True when input k participates in differentiation.
  bool wants(std::size_t k) const;

  /// Accumulation buffer for input k, zero-initialized on first access.
  std::span<double> grad_input(std::size_t k);

 private:
  friend class Tape;
  BackwardContext(const Tape& tape, const detail::Node& node,
                  std::span<const double> grad_out,
                  std::vector<std::vector<double>>& grads)
      : tape_(tape), node_(node), grad_out_(grad_out), grads_(grads) {}

  const Tape& tape_;
  const detail::Node& node_;
  std::span<const double> grad_out_;
  std::vector<std::vector<double>>& grads_;
};

/// Ordered record of the operations of one forward pass.
///
/// Not copyable or movable: Var handles point back at the tape. A tape is
/// confined to one thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Tensor value) {
    detail::Node node;
    node.op = "constant";
    node.owned = std::move(value);
    node.leaf = true;
    return push(std::move(node));
  }

  /// Differentiable leaf owning its value.
  Var variable(Tensor value) {
    detail::Node node;
    node.op = "variable";
    node.owned = std::move(value);
    node.leaf = true;
    node.requires_grad = true;
    return push(std::move(node));
  }

  /// Differentiable leaf referring to storage that must outlive the tape.
  Var parameter(const Tensor& value) {
    detail::Node node;
    node.op = "parameter";
    node.external = &value;
    node.leaf = true;
    node.requires_grad = true;
    return push(std::move(node));
  }

  /// Non-differentiable view of external storage.
  Var constant_ref(const Tensor& value) {
    detail::Node node;
    node.op = "constant";
    node.external = &value;
    node.leaf = true;
    return push(std::move(node));
  }

  /// Registers the result of an operation together with its backward rule.
  Var record(std::string_view op, std::vector<Var> inputs, Tensor output,
             BackwardRule rule) {
    detail::Node node;
    node.op = op;
    node.inputs.reserve(inputs.size());
    bool inputs_finite = true;
    for (const Var& in : inputs) {
      if (in.tape_ != this) {
        throw std::invalid_argument(std::string(op) +
                                    ": input recorded on another tape");
      }
      node.inputs.push_back(in.id_);
      node.requires_grad = node.requires_grad || nodes_[in.id_].requires_grad;
#ifndef NDEBUG
      inputs_finite = inputs_finite && nodes_[in.id_].value().all_finite();
#endif
    }
#ifndef NDEBUG
    if (inputs_finite && !output.all_finite()) {
      throw std::domain_error(std::string(op) +
                              ": non-finite output from finite inputs");
    }
#else
    (void)inputs_finite;
#endif
    node.owned = std::move(output);
    if (node.requires_grad) node.rule = std::move(rule);
    return push(std::move(node));
  }

  /// Gradient of a scalar loss with respect to every reachable
  /// differentiable leaf. The tape is left untouched, so repeated calls give
  /// identical results.
  GradientMap backward(const Var& loss) const {
    if (loss.tape_ != this || loss.id_ >= nodes_.size()) {
      throw std::invalid_argument("backward: loss is not on this tape");
    }
    if (!nodes_[loss.id_].value().is_scalar()) {
      throw ShapeError("backward: loss must be scalar, got shape " +
                       to_string(nodes_[loss.id_].value().shape()));
    }
    GradientMap result;
    std::vector<std::vector<double>> grads(loss.id_ + 1);
    grads[loss.id_].assign(1, 1.0);
    for (std::size_t i = loss.id_ + 1; i-- > 0;) {
      const detail::Node& node = nodes_[i];
      if (grads[i].empty() || !node.requires_grad) continue;
      if (node.leaf) {
        result.grads_.emplace(i, Tensor(node.value().shape(), std::move(grads[i])));
        continue;
      }
      if (!node.rule) continue;
      BackwardContext ctx(*this, node, grads[i], grads);
      node.rule(ctx);
      grads[i].clear();
      grads[i].shrink_to_fit();
    }
    return result;
  }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  const Tensor& value(std::size_t id) const { return nodes_.at(id).value(); }
  std::string_view op(std::size_t id) const { return nodes_.at(id).op; }
  const std::vector<std::size_t>& inputs(std::size_t id) const {
    return nodes_.at(id).inputs;
  }
  bool requires_grad(std::size_t id) const {
    return nodes_.at(id).requires_grad;
  }

 private:
  friend class BackwardContext;

  Var push(detail::Node node) {
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
  }

  std::deque<detail::Node> nodes_;  // stable references across growth
};

inline const Tensor& Var::value() const { return tape_->value(id_); }
inline bool Var::requires_grad() const { return tape_->requires_grad(id_); }

inline const Tensor& BackwardContext::input(std::size_t k) const {
  return tape_.nodes_[node_.inputs[k]].value();
}

inline bool BackwardContext::wants(std::size_t k) const {
  return tape_.nodes_[node_.inputs[k]].requires_grad;
}

inline std::span<double> BackwardContext::grad_input(std::size_t k) {
  const std::size_t id = node_.inputs[k];
  auto& buffer = grads_[id];
  if (buffer.empty()) buffer.assign(tape_.nodes_[id].value().size(), 0.0);
  return buffer;
}

// ---------------------------------------------------------------------------
// Elementary operations.

namespace detail {

inline void require_same_shape(std::string_view op, const Var& a,
                               const Var& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
}

}  // namespace detail

inline Var add(const Var& a, const Var& b) {
  detail::require_same_shape("add", a, b);
  Tensor out(a.shape());
  const auto x = a.value().values();
  const auto y = b.value().values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return a.tape().record("add", {a, b}, std::move(out), [](BackwardContext& ctx) {
    const auto g = ctx.grad_output();
    for (std::size_t k = 0; k < 2; ++k) {
      if (!ctx.wants(k)) continue;
      auto dx = ctx.grad_input(k);
      for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
    }
  });
}

inline Var sub(const Var& a, const Var& b) {
  detail::require_same_shape("sub", a, b);
  Tensor out(a.shape());
  const auto x = a.value().values();
  const auto y = b.value().values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return a.tape().record("sub", {a, b}, std::move(out), [](BackwardContext& ctx) {
    const auto g = ctx.grad_output();
    if (ctx.wants(0)) {
      auto dx = ctx.grad_input(0);
      for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
    }
    if (ctx.wants(1)) {
      auto dy = ctx.grad_input(1);
      for (std::size_t i = 0; i < g.size(); ++i) dy[i] -= g[i];
    }
  });
}

/// Elementwise product.
inline Var mul(const Var& a, const Var& b) {
  detail::require_same_shape("mul", a, b);
  Tensor out(a.shape());
  const auto x = a.value().values();
  const auto y = b.value().values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return a.tape().record("mul", {a, b}, std::move(out), [](BackwardContext& ctx) {
    const auto g = ctx.grad_output();
    const auto x = ctx.input(0).values();
    const auto y = ctx.input(1).values();
    if (ctx.wants(0)) {
      auto dx = ctx.grad_input(0);
      for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i] * y[i];
    }
    if (ctx.wants(1)) {
      auto dy = ctx.grad_input(1);
      for (std::size_t i = 0; i < g.size(); ++i) dy[i] += g[i] * x[i];
    }
  });
}

inline Var scale(const Var& a, double factor) {
  Tensor out(a.shape());
  const auto x = a.value().values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * x[i];
  return a.tape().record("scale", {a}, std::move(out),
                         [factor](BackwardContext& ctx) {
                           const auto g = ctx.grad_output();
                           auto dx = ctx.grad_input(0);
                           for (std::size_t i = 0; i < g.size(); ++i) {
                             dx[i] += factor * g[i];
                           }
                         });
}

/// Sum of all elements, as a scalar.
inline Var sum(const Var& a) {
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  return a.tape().record("sum", {a}, Tensor::scalar(total),
                         [](BackwardContext& ctx) {
                           const double g = ctx.grad_output()[0];
                           for (double& d : ctx.grad_input(0)) d += g;
                         });
}

inline Var mean(const Var& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

/// Same data under a new shape of equal element count.
inline Var reshape(const Var& a, Shape shape) {
  if (shape_size(shape) != a.value().size()) {
    throw ShapeError("reshape: cannot view " + to_string(a.shape()) + " as " +
                     to_string(shape));
  }
  return a.tape().record("reshape", {a}, a.value().reshaped(std::move(shape)),
                         [](BackwardContext& ctx) {
                           const auto g = ctx.grad_output();
                           auto dx = ctx.grad_input(0);
                           for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
                         });
}

/// Rows [begin, begin + count) of a tensor with leading batch axis.
inline Var slice_rows(const Var& a, std::size_t begin, std::size_t count) {
  const Shape& s = a.shape();
  if (s.size() < 2 || begin + count > s[0]) {
    throw ShapeError("slice_rows: rows [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") out of range for " +
                     to_string(s));
  }
  const std::size_t row = a.value().size() / s[0];
  Shape shape = s;
  shape[0] = count;
  std::vector<double> data(a.value().data() + begin * row,
                           a.value().data() + (begin + count) * row);
  return a.tape().record("slice_rows", {a}, Tensor(std::move(shape), std::move(data)),
                         [begin, row](BackwardContext& ctx) {
                           const auto g = ctx.grad_output();
                           double* dx = ctx.grad_input(0).data() + begin * row;
                           for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
                         });
}

/// Matrix product of two rank-2 tensors.
inline Var matmul(const Var& a, const Var& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2) {
    throw ShapeError("matmul: operands must be rank 2, got " +
                     to_string(a.shape()) + " and " + to_string(b.shape()));
  }
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw ShapeError("matmul: inner dimensions differ, " + to_string(a.shape()) +
                     " x " + to_string(b.shape()));
  }
  Tensor out({m, n});
  linalg::view(out.data(), m, n).noalias() =
      linalg::view(a.value().data(), m, k) * linalg::view(b.value().data(), k, n);
  return a.tape().record("matmul", {a, b}, std::move(out),
                         [m, k, n](BackwardContext& ctx) {
                           const auto g = linalg::view(ctx.grad_output().data(), m, n);
                           if (ctx.wants(0)) {
                             linalg::view(ctx.grad_input(0).data(), m, k).noalias() +=
                                 g * linalg::view(ctx.input(1).data(), k, n).transpose();
                           }
                           if (ctx.wants(1)) {
                             linalg::view(ctx.grad_input(1).data(), k, n).noalias() +=
                                 linalg::view(ctx.input(0).data(), m, k).transpose() * g;
                           }
                         });
}

// ---------------------------------------------------------------------------
// Gradient validation.

using ScalarFunction = std::function<Var(Tape&, const Var&)>;

/// Largest relative disagreement between the analytic gradient of `f` at
/// `point` and a central-difference estimate of `reference` with the given
/// step. Ops whose backward is deliberately not the derivative of their
/// forward (gradient reversal) pass a reference with the intended gradient.
///
/// Each coordinate contributes |a - n| / max(|a|, |n|, 1e-8). Returns +Inf
/// when `f` does not produce a gradient for its argument.
inline double finite_difference_check(const ScalarFunction& f, const ScalarFunction& reference,
                                      const Tensor& point, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite difference: step <= 0");
  Tensor analytic;
  {
    Tape tape;
    Var x = tape.variable(point);
    Var loss = f(tape, x);
    GradientMap grads = tape.backward(loss);
    if (!grads.contains(x)) return std::numeric_limits<double>::infinity();
    analytic = grads.at(x);
  }
  auto evaluate = [&reference](const Tensor& at) {
    Tape tape;
    return reference(tape, tape.constant(at)).value().item();
  };
  double worst = 0.0;
  Tensor probe = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    probe[i] = point[i] + step;
    const double up = evaluate(probe);
    probe[i] = point[i] - step;
    const double down = evaluate(probe);
    probe[i] = point[i];
    const double numeric = (up - down) / (2.0 * step);
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

/// Same check with `f` as its own reference.
inline double finite_difference_check(const ScalarFunction& f, const Tensor& point,
                                      double step) {
  return finite_difference_check(f, f, point, step);
}

}  // namespace scdnn::ad

#endif  // SCDNN_AUTODIFF_HPP_
