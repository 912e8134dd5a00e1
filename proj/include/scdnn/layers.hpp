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

#ifndef SCDNN_LAYERS_HPP_
#define SCDNN_LAYERS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scdnn/autodiff.hpp"
#include "scdnn/linalg.hpp"
#include "scdnn/tensor.hpp"

namespace scdnn::nn {

using ad::BackwardContext;
using ad::Var;

/// Probabilities below this floor are clamped before taking the logarithm.
inline constexpr double kLogFloor = 1e-12;

/// Valid, stride-1 2-D convolution parameters.
struct Conv2dLayer {
  Tensor weights;  // (out_channels, in_channels, kernel_h, kernel_w)
  Tensor bias;     // (out_channels)

  Conv2dLayer() = default;
  Conv2dLayer(std::size_t out_channels, std::size_t in_channels,
              std::size_t kernel_h, std::size_t kernel_w)
      : weights({out_channels, in_channels, kernel_h, kernel_w}),
        bias({out_channels}) {}

  std::size_t out_channels() const { return weights.dim(0); }
  std::size_t in_channels() const { return weights.dim(1); }
  std::size_t kernel_h() const { return weights.dim(2); }
  std::size_t kernel_w() const { return weights.dim(3); }
};

/// Affine map y = W x + b.
struct DenseLayer {
  Tensor weights;  // (out_units, in_units)
  Tensor bias;     // (out_units)

  DenseLayer() = default;
  DenseLayer(std::size_t out_units, std::size_t in_units)
      : weights({out_units, in_units}), bias({out_units}) {}

  std::size_t out_units() const { return weights.dim(0); }
  std::size_t in_units() const { return weights.dim(1); }
};

/// Identity on the forward pass, gradient scaled by -coefficient on the way
/// back.
struct GradientReversal {
  double coefficient = 1.0;
};

namespace detail {

struct ImageBatch {
  std::size_t n, c, h, w;
  bool batched;
};

inline ImageBatch image_dims(std::string_view op, const Shape& s) {
  if (s.size() == 3) return {1, s[0], s[1], s[2], false};
  if (s.size() == 4) return {s[0], s[1], s[2], s[3], true};
  throw ShapeError(std::string(op) + ": expected (C,H,W) or (N,C,H,W), got " +
                   to_string(s));
}

// Rows of a rank-1 or rank-2 tensor interpreted as (rows, width).
inline std::pair<std::size_t, std::size_t> row_dims(std::string_view op,
                                                    const Shape& s) {
  if (s.size() == 1) return {1, s[0]};
  if (s.size() == 2) return {s[0], s[1]};
  throw ShapeError(std::string(op) + ": expected rank 1 or 2, got " +
                   to_string(s));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Convolution and pooling.

namespace detail {

// Unfolds one (C,H,W) image into a (C*kh*kw) x (oh*ow) column matrix.
inline void im2col(const double* image, std::size_t channels, std::size_t h,
                   std::size_t w, std::size_t kh, std::size_t kw, double* cols) {
  const std::size_t oh = h - kh + 1, ow = w - kw + 1;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < kh; ++i) {
      for (std::size_t j = 0; j < kw; ++j) {
        double* row = cols + ((c * kh + i) * kw + j) * oh * ow;
        for (std::size_t y = 0; y < oh; ++y) {
          const double* s = image + (c * h + y + i) * w + j;
          std::copy(s, s + ow, row + y * ow);
        }
      }
    }
  }
}

// Adjoint of im2col: scatters column gradients back onto the image.
inline void col2im_add(const double* cols, std::size_t channels, std::size_t h,
                       std::size_t w, std::size_t kh, std::size_t kw,
                       double* image) {
  const std::size_t oh = h - kh + 1, ow = w - kw + 1;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < kh; ++i) {
      for (std::size_t j = 0; j < kw; ++j) {
        const double* row = cols + ((c * kh + i) * kw + j) * oh * ow;
        for (std::size_t y = 0; y < oh; ++y) {
          double* d = image + (c * h + y + i) * w + j;
          const double* s = row + y * ow;
          for (std::size_t x = 0; x < ow; ++x) d[x] += s[x];
        }
      }
    }
  }
}

}  // namespace detail

/// Valid (no padding), stride-1 cross-correlation plus per-channel bias.
///
/// input (C,H,W) or (N,C,H,W); weights (O,C,kh,kw); bias (O).
inline Var conv2d(const Var& input, const Var& weights, const Var& bias) {
  const auto in = detail::image_dims("conv2d", input.shape());
  const Shape& ws = weights.shape();
  if (ws.size() != 4) {
    throw ShapeError("conv2d: weights must be (O,C,kh,kw), got " + to_string(ws));
  }
  const std::size_t out_c = ws[0], kh = ws[2], kw = ws[3];
  if (ws[1] != in.c) {
    throw ShapeError("conv2d: input has " + std::to_string(in.c) +
                     " channels, kernel expects " + std::to_string(ws[1]));
  }
  if (bias.shape() != Shape{out_c}) {
    throw ShapeError("conv2d: bias shape " + to_string(bias.shape()) +
                     " does not match " + std::to_string(out_c) + " channels");
  }
  if (in.h < kh || in.w < kw) {
    throw ShapeError("conv2d: spatial size " + std::to_string(in.h) + "x" +
                     std::to_string(in.w) + " smaller than kernel " +
                     std::to_string(kh) + "x" + std::to_string(kw));
  }
  const std::size_t oh = in.h - kh + 1, ow = in.w - kw + 1;
  const std::size_t patch = in.c * kh * kw;
  const std::size_t plane = oh * ow;
  const std::size_t image = in.c * in.h * in.w;

  Shape out_shape = in.batched ? Shape{in.n, out_c, oh, ow} : Shape{out_c, oh, ow};
  Tensor out(out_shape);
  std::vector<double> cols(patch * plane);
  const auto wmat = linalg::view(weights.value().data(), out_c, patch);
  const double* b = bias.value().data();
  for (std::size_t n = 0; n < in.n; ++n) {
    detail::im2col(input.value().data() + n * image, in.c, in.h, in.w, kh, kw,
                   cols.data());
    auto y = linalg::view(out.data() + n * out_c * plane, out_c, plane);
    y.noalias() = wmat * linalg::view(cols.data(), patch, plane);
    for (std::size_t o = 0; o < out_c; ++o) y.row(o).array() += b[o];
  }

  return input.tape().record(
      "conv2d", {input, weights, bias}, std::move(out),
      [in, out_c, kh, kw, patch, plane, image](BackwardContext& ctx) {
        const auto g = ctx.grad_output();
        if (ctx.wants(2)) {
          auto db = ctx.grad_input(2);
          for (std::size_t n = 0; n < in.n; ++n) {
            for (std::size_t o = 0; o < out_c; ++o) {
              const double* r = g.data() + (n * out_c + o) * plane;
              double s = 0.0;
              for (std::size_t p = 0; p < plane; ++p) s += r[p];
              db[o] += s;
            }
          }
        }
        const bool want_w = ctx.wants(1), want_x = ctx.wants(0);
        if (!want_w && !want_x) return;
        std::vector<double> cols(patch * plane);
        std::vector<double> dcols(want_x ? patch * plane : 0);
        const auto wmat = linalg::view(ctx.input(1).data(), out_c, patch);
        double* dw = want_w ? ctx.grad_input(1).data() : nullptr;
        double* dx = want_x ? ctx.grad_input(0).data() : nullptr;
        for (std::size_t n = 0; n < in.n; ++n) {
          const auto gn = linalg::view(g.data() + n * out_c * plane, out_c, plane);
          if (want_w) {
            detail::im2col(ctx.input(0).data() + n * image, in.c, in.h, in.w, kh,
                           kw, cols.data());
            linalg::view(dw, out_c, patch).noalias() +=
                gn * linalg::view(cols.data(), patch, plane).transpose();
          }
          if (want_x) {
            linalg::view(dcols.data(), patch, plane).noalias() = wmat.transpose() * gn;
            detail::col2im_add(dcols.data(), in.c, in.h, in.w, kh, kw,
                               dx + n * image);
          }
        }
      });
}

inline Var conv2d(const Var& input, const Conv2dLayer& layer) {
  ad::Tape& tape = input.tape();
  return conv2d(input, tape.parameter(layer.weights), tape.parameter(layer.bias));
}

/// Non-overlapping 2x2 max pooling. The gradient goes to the first maximum
/// in row-major window order.
inline Var maxpool2(const Var& input) {
  const auto in = detail::image_dims("maxpool2", input.shape());
  if (in.h % 2 != 0 || in.w % 2 != 0) {
    throw ShapeError("maxpool2: spatial dims must be even, got " +
                     std::to_string(in.h) + "x" + std::to_string(in.w));
  }
  const std::size_t oh = in.h / 2, ow = in.w / 2;
  Shape out_shape = in.batched ? Shape{in.n, in.c, oh, ow} : Shape{in.c, oh, ow};
  Tensor out(out_shape);
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.size());
  const double* x = input.value().data();
  std::size_t k = 0;
  for (std::size_t m = 0; m < in.n * in.c; ++m) {
    const std::size_t base = m * in.h * in.w;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx, ++k) {
        const std::size_t top = base + 2 * y * in.w + 2 * xx;
        const std::size_t cand[4] = {top, top + 1, top + in.w, top + in.w + 1};
        std::size_t best = cand[0];
        for (std::size_t t = 1; t < 4; ++t) {
          if (x[cand[t]] > x[best]) best = cand[t];
        }
        out[k] = x[best];
        (*argmax)[k] = best;
      }
    }
  }
  return input.tape().record("maxpool2", {input}, std::move(out),
                             [argmax](BackwardContext& ctx) {
                               const auto g = ctx.grad_output();
                               auto dx = ctx.grad_input(0);
                               for (std::size_t i = 0; i < g.size(); ++i) {
                                 dx[(*argmax)[i]] += g[i];
                               }
                             });
}

// ---------------------------------------------------------------------------
// Fully connected.

/// y = W x + b for x of shape (in) or (N, in).
inline Var dense(const Var& input, const Var& weights, const Var& bias) {
  const auto [rows, in_units] = detail::row_dims("dense", input.shape());
  const Shape& ws = weights.shape();
  if (ws.size() != 2 || ws[1] != in_units) {
    throw ShapeError("dense: input " + to_string(input.shape()) +
                     " incompatible with weights " + to_string(ws));
  }
  const std::size_t out_units = ws[0];
  if (bias.shape() != Shape{out_units}) {
    throw ShapeError("dense: bias shape " + to_string(bias.shape()) +
                     " does not match " + std::to_string(out_units) + " units");
  }
  Shape out_shape =
      input.shape().size() == 1 ? Shape{out_units} : Shape{rows, out_units};
  Tensor out(out_shape);
  auto y = linalg::view(out.data(), rows, out_units);
  y.noalias() = linalg::view(input.value().data(), rows, in_units) *
                linalg::view(weights.value().data(), out_units, in_units).transpose();
  const double* b = bias.value().data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t o = 0; o < out_units; ++o) out[r * out_units + o] += b[o];
  }
  return input.tape().record(
      "dense", {input, weights, bias}, std::move(out),
      [rows, in_units, out_units](BackwardContext& ctx) {
        const auto g = linalg::view(ctx.grad_output().data(), rows, out_units);
        if (ctx.wants(0)) {
          linalg::view(ctx.grad_input(0).data(), rows, in_units).noalias() +=
              g * linalg::view(ctx.input(1).data(), out_units, in_units);
        }
        if (ctx.wants(1)) {
          linalg::view(ctx.grad_input(1).data(), out_units, in_units).noalias() +=
              g.transpose() * linalg::view(ctx.input(0).data(), rows, in_units);
        }
        if (ctx.wants(2)) {
          auto db = ctx.grad_input(2);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t o = 0; o < out_units; ++o) db[o] += g(r, o);
          }
        }
      });
}

inline Var dense(const Var& input, const DenseLayer& layer) {
  ad::Tape& tape = input.tape();
  return dense(input, tape.parameter(layer.weights), tape.parameter(layer.bias));
}

// ---------------------------------------------------------------------------
// Activations.

inline Var relu(const Var& input) {
  Tensor out(input.shape());
  const auto x = input.value().values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return input.tape().record("relu", {input}, std::move(out),
                             [](BackwardContext& ctx) {
                               const auto g = ctx.grad_output();
                               const auto x = ctx.input(0).values();
                               auto dx = ctx.grad_input(0);
                               for (std::size_t i = 0; i < g.size(); ++i) {
                                 if (x[i] > 0.0) dx[i] += g[i];
                               }
                             });
}

inline Var sigmoid(const Var& input) {
  Tensor out(input.shape());
  const auto x = input.value().values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    // Split by sign so exp never overflows.
    if (x[i] >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-x[i]));
    } else {
      const double e = std::exp(x[i]);
      out[i] = e / (1.0 + e);
    }
  }
  return input.tape().record("sigmoid", {input}, std::move(out),
                             [](BackwardContext& ctx) {
                               const auto g = ctx.grad_output();
                               const auto y = ctx.output().values();
                               auto dx = ctx.grad_input(0);
                               for (std::size_t i = 0; i < g.size(); ++i) {
                                 dx[i] += g[i] * y[i] * (1.0 - y[i]);
                               }
                             });
}

/// Softmax over the last axis of a (n) or (N, n) tensor.
inline Var softmax(const Var& input) {
  const auto [rows, width] = detail::row_dims("softmax", input.shape());
  Tensor out(input.shape());
  const auto x = input.value().values();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * width;
    double* yr = out.data() + r * width;
    const double peak = *std::max_element(xr, xr + width);
    double total = 0.0;
    for (std::size_t i = 0; i < width; ++i) {
      yr[i] = std::exp(xr[i] - peak);
      total += yr[i];
    }
    for (std::size_t i = 0; i < width; ++i) yr[i] /= total;
  }
  return input.tape().record(
      "softmax", {input}, std::move(out), [rows, width](BackwardContext& ctx) {
        const auto g = ctx.grad_output();
        const auto y = ctx.output().values();
        auto dx = ctx.grad_input(0);
        for (std::size_t r = 0; r < rows; ++r) {
          const std::size_t o = r * width;
          double dot = 0.0;
          for (std::size_t i = 0; i < width; ++i) dot += g[o + i] * y[o + i];
          for (std::size_t i = 0; i < width; ++i) {
            dx[o + i] += y[o + i] * (g[o + i] - dot);
          }
        }
      });
}

// ---------------------------------------------------------------------------
// Gradient reversal.

inline Tensor grl_forward(const Tensor& input, double /*coefficient*/) {
  return input;
}

inline Tensor grl_backward(const Tensor& upstream, double coefficient) {
  Tensor out(upstream.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -coefficient * upstream[i];
  return out;
}

inline Var gradient_reversal(const Var& input, double coefficient) {
  if (coefficient < 0.0) {
    throw std::invalid_argument("gradient_reversal: coefficient must be >= 0");
  }
  return input.tape().record("grl", {input}, grl_forward(input.value(), coefficient),
                             [coefficient](BackwardContext& ctx) {
                               const auto g = ctx.grad_output();
                               auto dx = ctx.grad_input(0);
                               for (std::size_t i = 0; i < g.size(); ++i) {
                                 dx[i] += -coefficient * g[i];
                               }
                             });
}

inline Var gradient_reversal(const Var& input, const GradientReversal& layer) {
  return gradient_reversal(input, layer.coefficient);
}

// ---------------------------------------------------------------------------
// Losses.

namespace detail {

inline Var mean_negative_log(std::string_view op, const Var& probabilities,
                             std::span<const int> targets,
                             std::size_t expected_width) {
  const auto [rows, width] = row_dims(op, probabilities.shape());
  if (expected_width != 0 && width != expected_width) {
    throw ShapeError(std::string(op) + ": expected " +
                     std::to_string(expected_width) + " probabilities, got " +
                     std::to_string(width));
  }
  if (targets.size() != rows) {
    throw ShapeError(std::string(op) + ": " + std::to_string(rows) +
                     " rows but " + std::to_string(targets.size()) + " targets");
  }
  for (int t : targets) {
    if (t < 0 || static_cast<std::size_t>(t) >= width) {
      throw std::out_of_range(std::string(op) + ": target " + std::to_string(t) +
                              " outside 0.." + std::to_string(width - 1));
    }
  }
  const auto p = probabilities.value().values();
  double total = 0.0;
  std::size_t clamped = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double v = p[r * width + targets[r]];
    if (v < kLogFloor) ++clamped;
    total += -std::log(std::max(v, kLogFloor));
  }
#ifndef NDEBUG
  if (clamped) {
    std::clog << "[debug] " << op << ": clamped " << clamped
              << " probabilities at " << kLogFloor << '\n';
  }
#else
  (void)clamped;
#endif
  const double inv_rows = 1.0 / static_cast<double>(rows);
  std::vector<int> labels(targets.begin(), targets.end());
  return probabilities.tape().record(
      op, {probabilities}, Tensor::scalar(total * inv_rows),
      [labels = std::move(labels), width, inv_rows](BackwardContext& ctx) {
        const double g = ctx.grad_output()[0];
        const auto p = ctx.input(0).values();
        auto dp = ctx.grad_input(0);
        for (std::size_t r = 0; r < labels.size(); ++r) {
          const std::size_t i = r * width + static_cast<std::size_t>(labels[r]);
          if (p[i] >= kLogFloor) dp[i] += -g * inv_rows / p[i];
        }
      });
}

}  // namespace detail

/// Mean negative log-likelihood of the true class; (8) or (N, 8) input.
inline Var nll_class_loss(const Var& probabilities, std::span<const int> labels) {
  return detail::mean_negative_log("nll_class_loss", probabilities, labels, 0);
}

inline Var nll_class_loss(const Var& probabilities, int label) {
  const int labels[1] = {label};
  return nll_class_loss(probabilities, std::span<const int>(labels));
}

/// Binary cross-entropy of a two-way domain softmax: -ln p[domain].
/// Domain 0 is source, 1 is target.
inline Var domain_bce_loss(const Var& probabilities, std::span<const int> domains) {
  return detail::mean_negative_log("domain_bce_loss", probabilities, domains, 2);
}

inline Var domain_bce_loss(const Var& probabilities, int domain) {
  const int domains[1] = {domain};
  return domain_bce_loss(probabilities, std::span<const int>(domains));
}

/// coefficient * sum of squared weights.
inline Var l2_regularizer(std::span<const Var> weights, double coefficient) {
  if (coefficient < 0.0) {
    throw std::invalid_argument("l2_regularizer: coefficient must be >= 0");
  }
  if (weights.empty()) {
    throw std::invalid_argument("l2_regularizer: no weights given");
  }
  double total = 0.0;
  for (const Var& w : weights) {
    for (double v : w.value().values()) total += v * v;
  }
  std::vector<Var> inputs(weights.begin(), weights.end());
  return weights.front().tape().record(
      "l2_regularizer", std::move(inputs), Tensor::scalar(coefficient * total),
      [coefficient](BackwardContext& ctx) {
        const double g = ctx.grad_output()[0];
        for (std::size_t k = 0; k < ctx.input_count(); ++k) {
          if (!ctx.wants(k)) continue;
          const auto w = ctx.input(k).values();
          auto dw = ctx.grad_input(k);
          for (std::size_t i = 0; i < w.size(); ++i) {
            dw[i] += 2.0 * coefficient * w[i] * g;
          }
        }
      });
}

}  // namespace scdnn::nn

#endif  // SCDNN_LAYERS_HPP_
