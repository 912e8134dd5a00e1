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

// The three-part network: a convolutional feature extractor shared by a
// label classifier and a domain discriminator. The discriminator is attached
// through a gradient reversal layer, so minimizing its loss trains the
// discriminator while pushing the feature extractor towards features that
// do not reveal the recording domain.
//
//   input 1x20x32
//   conv 5x9 + ReLU -> (C1)x16x24 -> maxpool -> (C1)x8x12
//   conv 3x5 + ReLU -> (C2)x6x8   -> maxpool -> (C2)x3x4 -> flatten
//   label head:  dense H1 + ReLU, dense H2 + ReLU, dense 8 + softmax
//   domain head: GRL, dense D1 + ReLU, dense 2 + softmax
//
// The reference widths are C1=128, C2=500, H1=1000, H2=500, D1=1000, which
// flatten to exactly 6000 features.

#ifndef SCDNN_MODEL_HPP_
#define SCDNN_MODEL_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "scdnn/activity.hpp"
#include "scdnn/autodiff.hpp"
#include "scdnn/layers.hpp"
#include "scdnn/tensor.hpp"

namespace scdnn {


inline constexpr std::size_t kConv1KernelH = 5, kConv1KernelW = 9;
inline constexpr std::size_t kConv2KernelH = 3, kConv2KernelW = 5;
// Spatial extent left after the two conv/pool stages: 20x32 -> 16x24 ->
// 8x12 -> 6x8 -> 3x4.
inline constexpr std::size_t kFeatureH = 3, kFeatureW = 4;

/// Layer widths. Kernel sizes and the spatial chain are fixed.
struct Architecture {
  std::size_t conv1_channels = 128;
  std::size_t conv2_channels = 500;
  std::size_t label_hidden1 = 1000;
  std::size_t label_hidden2 = 500;
  std::size_t domain_hidden = 1000;

  /// Full-size network.
  static Architecture reference() { return {}; }

  /// Narrow network with the same topology and spatial chain, sized for
  /// repeated training runs on a single CPU core.
  static Architecture compact() { return {6, 16, 64, 32, 64}; }

  std::size_t feature_length() const {
    return conv2_channels * kFeatureH * kFeatureW;
  }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// Parameter tensor with its persistent name.
struct ParameterRef {
  std::string_view name;
  Tensor* tensor;
  bool is_weight;  // biases are excluded from the L2 penalty
};

struct ConstParameterRef {
  std::string_view name;
  const Tensor* tensor;
  bool is_weight;
};

class ScdnnModel {
 public:
  ScdnnModel() = default;
  explicit ScdnnModel(const Architecture& arch)
      : architecture(arch),
        conv1(arch.conv1_channels, kSampleChannels, kConv1KernelH, kConv1KernelW),
        conv2(arch.conv2_channels, arch.conv1_channels, kConv2KernelH, kConv2KernelW),
        label_fc1(arch.label_hidden1, arch.feature_length()),
        label_fc2(arch.label_hidden2, arch.label_hidden1),
        label_out(kNumActivities, arch.label_hidden2),
        domain_fc1(arch.domain_hidden, arch.feature_length()),
        domain_out(kNumDomains, arch.domain_hidden) {}

  Architecture architecture;
  std::uint64_t seed = 0;

  nn::Conv2dLayer conv1;
  nn::Conv2dLayer conv2;
  nn::DenseLayer label_fc1;
  nn::DenseLayer label_fc2;
  nn::DenseLayer label_out;
  nn::DenseLayer domain_fc1;
  nn::DenseLayer domain_out;

  /// All parameters in persistent order.
  std::vector<ParameterRef> parameters() {
    return {{"conv1.weights", &conv1.weights, true},
            {"conv1.bias", &conv1.bias, false},
            {"conv2.weights", &conv2.weights, true},
            {"conv2.bias", &conv2.bias, false},
            {"label_fc1.weights", &label_fc1.weights, true},
            {"label_fc1.bias", &label_fc1.bias, false},
            {"label_fc2.weights", &label_fc2.weights, true},
            {"label_fc2.bias", &label_fc2.bias, false},
            {"label_out.weights", &label_out.weights, true},
            {"label_out.bias", &label_out.bias, false},
            {"domain_fc1.weights", &domain_fc1.weights, true},
            {"domain_fc1.bias", &domain_fc1.bias, false},
            {"domain_out.weights", &domain_out.weights, true},
            {"domain_out.bias", &domain_out.bias, false}};
  }

  std::vector<ConstParameterRef> parameters() const {
    std::vector<ConstParameterRef> out;
    for (const auto& p : const_cast<ScdnnModel*>(this)->parameters()) {
      out.push_back({p.name, p.tensor, p.is_weight});
    }
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t total = 0;
    for (const auto& p : parameters()) total += p.tensor->size();
    return total;
  }

  /// Bitwise equality of every parameter tensor.
  friend bool operator==(const ScdnnModel& a, const ScdnnModel& b) {
    if (!(a.architecture == b.architecture)) return false;
    const auto pa = a.parameters();
    const auto pb = b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) {
      if (pa[i].tensor->shape() != pb[i].tensor->shape() ||
          !bitwise_equal(pa[i].tensor->values(), pb[i].tensor->values())) {
        return false;
      }
    }
    return true;
  }
};

namespace detail {

inline void glorot_uniform(Tensor& weights, std::size_t fan_in,
                           std::size_t fan_out, std::mt19937_64& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& w : weights.values()) w = dist(rng);
}

}  // namespace detail

/// Glorot-uniform weights, zero biases; deterministic in the seed.
inline ScdnnModel build_model(std::uint64_t seed,
                              const Architecture& arch = Architecture::reference()) {
  ScdnnModel model(arch);
  model.seed = seed;
  std::mt19937_64 rng(seed);
  auto init_conv = [&rng](nn::Conv2dLayer& layer) {
    const std::size_t area = layer.kernel_h() * layer.kernel_w();
    detail::glorot_uniform(layer.weights, layer.in_channels() * area,
                           layer.out_channels() * area, rng);
  };
  auto init_dense = [&rng](nn::DenseLayer& layer) {
    detail::glorot_uniform(layer.weights, layer.in_units(), layer.out_units(), rng);
  };
  init_conv(model.conv1);
  init_conv(model.conv2);
  init_dense(model.label_fc1);
  init_dense(model.label_fc2);
  init_dense(model.label_out);
  init_dense(model.domain_fc1);
  init_dense(model.domain_out);
  return model;
}

/// Model parameters registered as differentiable leaves on one tape.
struct BoundModel {
  ad::Var conv1_w, conv1_b, conv2_w, conv2_b;
  ad::Var label_fc1_w, label_fc1_b, label_fc2_w, label_fc2_b, label_out_w,
      label_out_b;
  ad::Var domain_fc1_w, domain_fc1_b, domain_out_w, domain_out_b;

  /// Every parameter, in the order of ScdnnModel::parameters().
  std::vector<ad::Var> all() const {
    return {conv1_w,     conv1_b,     conv2_w,     conv2_b,      label_fc1_w,
            label_fc1_b, label_fc2_w, label_fc2_b, label_out_w,  label_out_b,
            domain_fc1_w, domain_fc1_b, domain_out_w, domain_out_b};
  }

  /// Weights of the feature extractor and label classifier, the set the L2
  /// penalty applies to.
  std::vector<ad::Var> regularized_weights() const {
    return {conv1_w, conv2_w, label_fc1_w, label_fc2_w, label_out_w};
  }
};

/// Registers every parameter of `model` on `tape`. The model must outlive
/// the tape.
inline BoundModel bind(ad::Tape& tape, const ScdnnModel& model) {
  BoundModel b;
  b.conv1_w = tape.parameter(model.conv1.weights);
  b.conv1_b = tape.parameter(model.conv1.bias);
  b.conv2_w = tape.parameter(model.conv2.weights);
  b.conv2_b = tape.parameter(model.conv2.bias);
  b.label_fc1_w = tape.parameter(model.label_fc1.weights);
  b.label_fc1_b = tape.parameter(model.label_fc1.bias);
  b.label_fc2_w = tape.parameter(model.label_fc2.weights);
  b.label_fc2_b = tape.parameter(model.label_fc2.bias);
  b.label_out_w = tape.parameter(model.label_out.weights);
  b.label_out_b = tape.parameter(model.label_out.bias);
  b.domain_fc1_w = tape.parameter(model.domain_fc1.weights);
  b.domain_fc1_b = tape.parameter(model.domain_fc1.bias);
  b.domain_out_w = tape.parameter(model.domain_out.weights);
  b.domain_out_b = tape.parameter(model.domain_out.bias);
  return b;
}

/// Intermediate activations of the feature extractor, kept for shape checks.
struct FeatureTrace {
  ad::Var conv1, pool1, conv2, pool2, features;
};

/// conv -> relu -> pool -> conv -> relu -> pool -> flatten, channel-major.
/// Accepts (1,20,32) or (N,1,20,32); returns (F) or (N,F).
inline FeatureTrace trace_features(const BoundModel& m, const ad::Var& samples) {
  const Shape& s = samples.shape();
  const bool batched = s.size() == 4;
  const Shape expected = batched ? Shape{s[0], kSampleChannels, kSampleHeight, kSampleWidth}
                                 : Shape{kSampleChannels, kSampleHeight, kSampleWidth};
  if (s != expected) {
    throw ShapeError("extract_features: expected sample shape (1,20,32), got " +
                     to_string(s));
  }
  FeatureTrace t;
  t.conv1 = nn::relu(nn::conv2d(samples, m.conv1_w, m.conv1_b));
  t.pool1 = nn::maxpool2(t.conv1);
  t.conv2 = nn::relu(nn::conv2d(t.pool1, m.conv2_w, m.conv2_b));
  t.pool2 = nn::maxpool2(t.conv2);
  const std::size_t flat = t.pool2.value().size() / (batched ? s[0] : 1);
  t.features = ad::reshape(t.pool2, batched ? Shape{s[0], flat} : Shape{flat});
  return t;
}

inline ad::Var extract_features(const BoundModel& m, const ad::Var& samples) {
  return trace_features(m, samples).features;
}

/// Softmax over the eight activities.
inline ad::Var classify_labels(const BoundModel& m, const ad::Var& features) {
  ad::Var h = nn::relu(nn::dense(features, m.label_fc1_w, m.label_fc1_b));
  h = nn::relu(nn::dense(h, m.label_fc2_w, m.label_fc2_b));
  return nn::softmax(nn::dense(h, m.label_out_w, m.label_out_b));
}

/// Softmax over {source, target}, behind a gradient reversal layer with
/// the given coefficient.
inline ad::Var discriminate_domain(const BoundModel& m, const ad::Var& features,
                                   double grl_coefficient) {
  ad::Var r = nn::gradient_reversal(features, grl_coefficient);
  ad::Var h = nn::relu(nn::dense(r, m.domain_fc1_w, m.domain_fc1_b));
  return nn::softmax(nn::dense(h, m.domain_out_w, m.domain_out_b));
}

// ---------------------------------------------------------------------------
// Tensor-level inference helpers.

inline Tensor extract_features(const ScdnnModel& model, const Tensor& samples) {
  ad::Tape tape;
  const BoundModel m = bind(tape, model);
  return extract_features(m, tape.constant_ref(samples)).value();
}

inline Tensor classify_labels(const ScdnnModel& model, const Tensor& features) {
  ad::Tape tape;
  const BoundModel m = bind(tape, model);
  return classify_labels(m, tape.constant_ref(features)).value();
}

inline Tensor discriminate_domain(const ScdnnModel& model, const Tensor& features,
                                  double grl_coefficient) {
  ad::Tape tape;
  const BoundModel m = bind(tape, model);
  return discriminate_domain(m, tape.constant_ref(features), grl_coefficient).value();
}

/// Index of the largest value; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

/// Class probabilities for a batch (N,1,20,32), evaluated in chunks.
inline Tensor predict_probabilities(const ScdnnModel& model, const Tensor& batch,
                                    std::size_t chunk = 256) {
  if (batch.rank() != 4) {
    throw ShapeError("predict_probabilities: expected (N,1,20,32), got " +
                     to_string(batch.shape()));
  }
  const std::size_t n = batch.dim(0);
  Tensor out({n, kNumActivities});
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    const std::size_t count = std::min(chunk, n - begin);
    std::vector<double> slice(batch.data() + begin * kSampleSize,
                              batch.data() + (begin + count) * kSampleSize);
    Tensor part({count, kSampleChannels, kSampleHeight, kSampleWidth},
                std::move(slice));
    ad::Tape tape;
    const BoundModel m = bind(tape, model);
    const Tensor probs =
        classify_labels(m, extract_features(m, tape.constant_ref(part))).value();
    std::copy(probs.values().begin(), probs.values().end(),
              out.data() + begin * kNumActivities);
  }
  return out;
}

/// Most probable activity for one (1,20,32) sample.
inline ActivityLabel predict(const ScdnnModel& model, const Tensor& sample) {
  const Tensor probs = classify_labels(model, extract_features(model, sample));
  return activity_from_index(static_cast<int>(argmax(probs.values())));
}

}  // namespace scdnn

#endif  // SCDNN_MODEL_HPP_
