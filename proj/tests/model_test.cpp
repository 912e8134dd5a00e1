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

#include <random>

#include <gtest/gtest.h>

#include "scdnn/model.hpp"
#include "test_util.hpp"

namespace scdnn {
namespace {

TEST(ArchitectureTest, ReferenceFeatureLengthIs6000) {
  EXPECT_EQ(Architecture::reference().feature_length(), 6000u);
}

TEST(ModelTest, ReferenceShapeChain) {
  const ScdnnModel model = build_model(1, Architecture::reference());
  std::mt19937_64 rng(1);
  const Tensor x = testing::random_tensor({1, 20, 32}, rng);
  ad::Tape tape;
  const BoundModel m = bind(tape, model);
  const FeatureTrace t = trace_features(m, tape.constant_ref(x));
  EXPECT_EQ(t.conv1.shape(), (Shape{128, 16, 24}));
  EXPECT_EQ(t.pool1.shape(), (Shape{128, 8, 12}));
  EXPECT_EQ(t.conv2.shape(), (Shape{500, 6, 8}));
  EXPECT_EQ(t.pool2.shape(), (Shape{500, 3, 4}));
  EXPECT_EQ(t.features.shape(), (Shape{6000}));
  EXPECT_EQ(classify_labels(m, t.features).shape(), (Shape{8}));
  EXPECT_EQ(discriminate_domain(m, t.features, 1.0).shape(), (Shape{2}));
}

TEST(ModelTest, ReferenceParameterCountMatchesClosedForm) {
  const std::size_t expected = 1 * 128 * 5 * 9 + 128 + 128 * 500 * 3 * 5 + 500 +
                               6000 * 1000 + 1000 + 1000 * 500 + 500 + 500 * 8 + 8 +
                               6000 * 1000 + 1000 + 1000 * 2 + 2;
  EXPECT_EQ(ScdnnModel(Architecture::reference()).parameter_count(), expected);
}

TEST(ModelTest, BuildIsDeterministic) {
  const Architecture a = Architecture::compact();
  EXPECT_TRUE(build_model(7, a) == build_model(7, a));
  EXPECT_FALSE(build_model(7, a) == build_model(8, a));
}

TEST(ModelTest, GlorotBoundsAndZeroBiases) {
  const ScdnnModel model = build_model(3, Architecture::compact());
  for (const auto& p : model.parameters()) {
    if (!p.is_weight) {
      for (double v : p.tensor->values()) EXPECT_EQ(v, 0.0) << p.name;
      continue;
    }
    const Shape& s = p.tensor->shape();
    const std::size_t receptive = s.size() == 4 ? s[2] * s[3] : 1;
    const double limit = std::sqrt(6.0 / static_cast<double>((s[0] + s[1]) * receptive));
    for (double v : p.tensor->values()) {
      ASSERT_LE(std::abs(v), limit) << p.name;
    }
  }
}

TEST(ModelTest, BatchedFeaturesMatchSingleSamples) {
  const ScdnnModel model = build_model(2, Architecture::compact());
  std::mt19937_64 rng(2);
  const Tensor batch = testing::random_tensor({3, 1, 20, 32}, rng);
  const Tensor all = extract_features(model, batch);
  const std::size_t f = model.architecture.feature_length();
  ASSERT_EQ(all.shape(), (Shape{3, f}));
  for (std::size_t n = 0; n < 3; ++n) {
    Tensor one({1, 20, 32}, std::vector<double>(batch.data() + n * 640, batch.data() + (n + 1) * 640));
    const Tensor single = extract_features(model, one);
    for (std::size_t i = 0; i < f; ++i) EXPECT_NEAR(all[n * f + i], single[i], 1e-12);
  }
}

TEST(ModelTest, ZeroSampleFeaturesComeFromBiases) {
  ScdnnModel model = build_model(4, Architecture::compact());
  const Tensor zero({1, 20, 32});
  // With zero biases every feature is relu(0) = 0.
  const Tensor features = extract_features(model, zero);
  for (double v : features.values()) EXPECT_EQ(v, 0.0);
  for (double& v : model.conv1.bias.values()) v = 0.3;
  for (double& v : model.conv2.bias.values()) v = -0.1;
  const Tensor f = extract_features(model, zero);
  for (std::size_t i = 0; i < f.size(); ++i) {
    double want = -0.1;
    for (double w : model.conv2.weights.values().subspan(
             (i / (kFeatureH * kFeatureW)) * model.conv2.weights.size() / model.conv2.out_channels(),
             model.conv2.weights.size() / model.conv2.out_channels())) {
      want += 0.3 * w;
    }
    EXPECT_NEAR(f[i], std::max(want, 0.0), 1e-12);
  }
}

TEST(ModelTest, IdenticalInputsGiveIdenticalFeatures) {
  const ScdnnModel model = build_model(5, Architecture::compact());
  std::mt19937_64 rng(5);
  const Tensor x = testing::random_tensor({1, 20, 32}, rng);
  EXPECT_TRUE(bitwise_equal(extract_features(model, x).values(),
                            extract_features(model, x).values()));
}

TEST(ModelTest, WrongSampleShapeIsShapeError) {
  const ScdnnModel model = build_model(5, Architecture::compact());
  EXPECT_THROW(extract_features(model, Tensor({1, 20, 31})), ShapeError);
  EXPECT_THROW(classify_labels(model, Tensor({17})), ShapeError);
  EXPECT_THROW(discriminate_domain(model, Tensor({17}), 1.0), ShapeError);
}

TEST(ModelTest, HeadsAreDistributions) {
  const ScdnnModel model = build_model(6, Architecture::compact());
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const Tensor f = extract_features(model, testing::random_tensor({1, 20, 32}, rng, -5, 5));
    double s = 0;
    const Tensor p = classify_labels(model, f);
    ASSERT_EQ(p.size(), 8u);
    for (double v : p.values()) s += v;
    EXPECT_NEAR(s, 1.0, 1e-9);
    const Tensor d = discriminate_domain(model, f, 0.5);
    ASSERT_EQ(d.size(), 2u);
    EXPECT_NEAR(d[0] + d[1], 1.0, 1e-9);
  }
}

TEST(ModelTest, ZeroWeightsGiveUniformLabels) {
  ScdnnModel model(Architecture::compact());
  const Tensor p = classify_labels(model, Tensor({model.architecture.feature_length()}, 1.0));
  for (double v : p.values()) EXPECT_DOUBLE_EQ(v, 0.125);
  EXPECT_EQ(predict(model, Tensor({1, 20, 32})), ActivityLabel::kLying);
}

TEST(ModelTest, DomainOutputIndependentOfLambda) {
  const ScdnnModel model = build_model(7, Architecture::compact());
  std::mt19937_64 rng(7);
  const Tensor f = extract_features(model, testing::random_tensor({1, 20, 32}, rng));
  const Tensor d0 = discriminate_domain(model, f, 0.0);
  EXPECT_TRUE(bitwise_equal(d0.values(), discriminate_domain(model, f, 0.5).values()));
  EXPECT_TRUE(bitwise_equal(d0.values(), discriminate_domain(model, f, 1.0).values()));
}

TEST(ModelTest, ArgmaxTieGoesToLowestIndex) {
  const std::vector<double> uniform(8, 0.125);
  EXPECT_EQ(argmax(uniform), 0u);
  std::vector<double> five(8, 0.0);
  five[4] = 1.0;
  five[6] = 1.0;
  EXPECT_EQ(activity_from_index(static_cast<int>(argmax(five))), ActivityLabel::kWaving);
}

TEST(ModelTest, PredictProbabilitiesMatchesPerSample) {
  const ScdnnModel model = build_model(8, Architecture::compact());
  std::mt19937_64 rng(8);
  const Tensor batch = testing::random_tensor({5, 1, 20, 32}, rng);
  const Tensor p = predict_probabilities(model, batch, 2);
  for (std::size_t n = 0; n < 5; ++n) {
    Tensor one({1, 20, 32}, std::vector<double>(batch.data() + n * 640, batch.data() + (n + 1) * 640));
    const Tensor q = classify_labels(model, extract_features(model, one));
    for (std::size_t c = 0; c < 8; ++c) EXPECT_NEAR(p[n * 8 + c], q[c], 1e-12);
    EXPECT_EQ(predict(model, one), activity_from_index(static_cast<int>(argmax(q.values()))));
  }
}

TEST(ModelTest, DomainGradientReachesExtractorWithFlippedSign) {
  const ScdnnModel model = build_model(9, Architecture::compact());
  std::mt19937_64 rng(9);
  const Tensor batch = testing::random_tensor({4, 1, 20, 32}, rng);
  const std::vector<int> domains{0, 0, 1, 1};
  auto grads = [&](bool reversed) {
    ad::Tape tape;
    const BoundModel m = bind(tape, model);
    ad::Var f = extract_features(m, tape.constant_ref(batch));
    if (reversed) f = nn::gradient_reversal(f, 1.0);
    ad::Var h = nn::relu(nn::dense(f, m.domain_fc1_w, m.domain_fc1_b));
    ad::Var p = nn::softmax(nn::dense(h, m.domain_out_w, m.domain_out_b));
    const ad::GradientMap g = tape.backward(nn::domain_bce_loss(p, domains));
    return std::vector<Tensor>{g.at(m.conv1_w), g.at(m.conv2_b), g.at(m.domain_fc1_w)};
  };
  const auto plain = grads(false);
  const auto flipped = grads(true);
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t i = 0; i < plain[k].size(); ++i) {
      EXPECT_NEAR(flipped[k][i], -plain[k][i], 1e-12);
    }
  }
  // The discriminator itself is trained normally.
  EXPECT_TRUE(bitwise_equal(plain[2].values(), flipped[2].values()));
}

}  // namespace
}  // namespace scdnn
