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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "scdnn/butterworth.hpp"
#include "scdnn/preprocess.hpp"

namespace scdnn {
namespace {

// Magnitude of an order-n Butterworth low-pass mapped through the bilinear
// transform with a prewarped cutoff: 1 / sqrt(1 + (tan(pi f/fs) / tan(pi fc/fs))^2n).
double analytic_magnitude(const FilterSpec& s, double f) {
  const double ratio = std::tan(std::numbers::pi * f / s.sample_rate_hz) /
                       std::tan(std::numbers::pi * s.cutoff_hz / s.sample_rate_hz);
  return 1.0 / std::sqrt(1.0 + std::pow(ratio, 2.0 * s.order));
}

// Steady-state output/input amplitude for a cosine at `f`, measured over
// the tail of a long run.
double measured_gain(const FilterSpec& spec, double f) {
  const std::size_t n = 4000;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::cos(2.0 * std::numbers::pi * f * static_cast<double>(i) / spec.sample_rate_hz);
  }
  const std::vector<double> y = butterworth_filter(x, spec);
  // Project the settled half onto cos/sin; 2000 samples span whole periods
  // for every frequency used here.
  double a = 0, b = 0;
  for (std::size_t i = n / 2; i < n; ++i) {
    const double ph = 2.0 * std::numbers::pi * f * static_cast<double>(i) / spec.sample_rate_hz;
    a += y[i] * std::cos(ph);
    b += y[i] * std::sin(ph);
  }
  const double m = static_cast<double>(n - n / 2);
  return std::hypot(2.0 * a / m, 2.0 * b / m);
}

RawFrame random_frame(std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(kSensorMinCelsius, kSensorMaxCelsius);
  RawFrame f;
  for (float& t : f.temperatures) t = u(rng);
  return f;
}

TEST(BackgroundSubtractTest, ConstantFrameBecomesZero) {
  RawFrame f;
  f.temperatures.fill(20.0f);
  for (float v : background_subtract(f).temperatures) EXPECT_EQ(v, 0.0f);
}

TEST(BackgroundSubtractTest, SingleColdCell) {
  RawFrame f;
  f.temperatures.fill(25.0f);
  f.at(3, 4) = 17.25f;
  const RawFrame g = background_subtract(f);
  for (std::size_t i = 0; i < kPixels; ++i) {
    EXPECT_EQ(g.temperatures[i], i == 3 * 8 + 4 ? 0.0f : 7.75f);
  }
}

TEST(BackgroundSubtractTest, MinimumIsExactlyZeroOnRandomFrames) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 1000; ++i) {
    const RawFrame g = background_subtract(random_frame(rng));
    EXPECT_EQ(*std::min_element(g.temperatures.begin(), g.temperatures.end()), 0.0f);
    for (float v : g.temperatures) EXPECT_GE(v, 0.0f);
  }
}

TEST(ButterworthTest, ConstantSeriesUnchanged) {
  const std::vector<double> x(200, 23.5);
  for (double v : butterworth_filter(x, {})) EXPECT_NEAR(v, 23.5, 1e-9);
}

TEST(ButterworthTest, EmptySeries) {
  EXPECT_TRUE(butterworth_filter(std::vector<double>{}, {}).empty());
}

TEST(ButterworthTest, DesignMatchesAnalyticMagnitude) {
  for (int order : {1, 2, 3, 4}) {
    const FilterSpec spec{order, 2.0, 20.0};
    const ButterworthLowpass filter(spec);
    for (double f = 0.0; f < 9.9; f += 0.25) {
      EXPECT_NEAR(filter.magnitude_at(f), analytic_magnitude(spec, f), 1e-12)
          << "order " << order << " f " << f;
    }
  }
}

TEST(ButterworthTest, DcGainAndCutoffAttenuation) {
  const FilterSpec spec;
  const ButterworthLowpass filter(spec);
  EXPECT_NEAR(filter.magnitude_at(0.0), 1.0, 1e-3);
  const double db = 20.0 * std::log10(filter.magnitude_at(spec.cutoff_hz));
  EXPECT_NEAR(db, 20.0 * std::log10(analytic_magnitude(spec, spec.cutoff_hz)), 1e-9);
  EXPECT_NEAR(db, -3.0103, 0.2);
}

TEST(ButterworthTest, SineAtCutoffIsHalfPower) {
  const FilterSpec spec;
  EXPECT_NEAR(measured_gain(spec, spec.cutoff_hz), 1.0 / std::numbers::sqrt2,
              0.02 / std::numbers::sqrt2);
}

TEST(ButterworthTest, NyquistIsSuppressed) {
  const FilterSpec spec;
  EXPECT_LT(measured_gain(spec, spec.sample_rate_hz / 2.0), 0.1);
}

TEST(ButterworthTest, InvalidSpecs) {
  EXPECT_THROW(ButterworthLowpass({0, 2, 20}), FilterConfigError);
  EXPECT_THROW(ButterworthLowpass({2, 10, 20}), FilterConfigError);
  EXPECT_THROW(ButterworthLowpass({2, 0, 20}), FilterConfigError);
  EXPECT_THROW(ButterworthLowpass({2, 2, -1}), FilterConfigError);
}

TEST(SegmentTest, FullDatasetCounts) {
  const std::vector<int> frames(72400);
  EXPECT_EQ(segment(frames, 10).size(), 7240u);
}

TEST(SegmentTest, TrailingFramesDropped) {
  std::vector<int> frames(35);
  for (int i = 0; i < 35; ++i) frames[i] = i;
  const auto w = segment(frames, 10);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w[2].front(), 20);
  EXPECT_EQ(w[2].back(), 29);
  EXPECT_TRUE(segment(std::vector<int>(9), 10).empty());
}

TEST(SegmentTest, ZeroWindowRejected) {
  EXPECT_THROW(segment(std::vector<int>(5), 0), std::invalid_argument);
}

TEST(ReshapeTest, MappingExamples) {
  EXPECT_EQ(sample_position(0, 0), (std::pair<std::size_t, std::size_t>{0, 0}));
  EXPECT_EQ(sample_position(0, 32), (std::pair<std::size_t, std::size_t>{1, 0}));
  EXPECT_EQ(sample_position(9, 63), (std::pair<std::size_t, std::size_t>{19, 31}));
}

TEST(ReshapeTest, PositionsCoverGridExactlyOnce) {
  std::vector<int> hits(kSampleSize, 0);
  for (std::size_t k = 0; k < kFramesPerSample; ++k) {
    for (std::size_t f = 0; f < kPixels; ++f) {
      const auto [r, c] = sample_position(k, f);
      ASSERT_LT(r, kSampleHeight);
      ASSERT_LT(c, kSampleWidth);
      ++hits[r * kSampleWidth + c];
    }
  }
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(ReshapeTest, RoundTripOnRandomWindows) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0, 3);
  for (int trial = 0; trial < 100; ++trial) {
    std::array<ProcessedFrame, kFramesPerSample> w;
    for (std::size_t k = 0; k < w.size(); ++k) {
      for (double& v : w[k].values) v = n(rng);
      w[k].timestamp_ms = 50 * k + trial;
    }
    const SampleTensor s = reshape_sample(w);
    const auto back = unreshape_sample(s);
    for (std::size_t k = 0; k < w.size(); ++k) {
      EXPECT_TRUE(bitwise_equal(std::span<const double>(w[k].values),
                                std::span<const double>(back[k].values)));
      EXPECT_EQ(back[k].timestamp_ms, w[k].timestamp_ms);
    }
  }
}

TEST(ReshapeTest, WrongWindowLength) {
  std::vector<ProcessedFrame> nine(9);
  EXPECT_THROW(reshape_sample(nine), std::invalid_argument);
}

TEST(PipelineTest, EmptyStream) {
  EXPECT_TRUE(preprocess_stream(std::vector<RawFrame>{}).empty());
}

TEST(PipelineTest, ConstantAmbientGivesZeroSamples) {
  std::vector<RawFrame> stream(100);
  for (auto& f : stream) f.temperatures.fill(21.0f);
  const auto samples = preprocess_stream(stream);
  ASSERT_EQ(samples.size(), 10u);
  for (const auto& s : samples) {
    for (double v : s.values) EXPECT_EQ(v, 0.0);
  }
}

TEST(PipelineTest, FullScaleCount) {
  std::mt19937_64 rng(1);
  std::vector<RawFrame> stream(72400);
  std::normal_distribution<float> n(22.0f, 0.5f);
  for (auto& f : stream) {
    for (float& t : f.temperatures) t = n(rng);
  }
  EXPECT_EQ(preprocess_stream(stream).size(), 7240u);
}

TEST(PipelineTest, IsCausal) {
  std::mt19937_64 rng(3);
  std::vector<RawFrame> stream(60);
  for (auto& f : stream) f = random_frame(rng);
  const auto before = preprocess_stream(stream);
  for (std::size_t t = 30; t < 60; ++t) stream[t] = random_frame(rng);
  const auto after = preprocess_stream(stream);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(before[i] == after[i]) << i;
  EXPECT_FALSE(before[3] == after[3]);
}

TEST(PipelineTest, DeterministicAndLabelled) {
  std::mt19937_64 rng(4);
  std::vector<RawFrame> stream(40);
  for (auto& f : stream) f = random_frame(rng);
  const auto a = preprocess_stream(stream, {}, 10, ActivityLabel::kSitting, DomainTag::kTarget);
  const auto b = preprocess_stream(stream, {}, 10, ActivityLabel::kSitting, DomainTag::kTarget);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(bitwise_equal(std::span<const double>(a[i].values),
                              std::span<const double>(b[i].values)));
    EXPECT_EQ(a[i].label, ActivityLabel::kSitting);
    EXPECT_EQ(a[i].domain, DomainTag::kTarget);
  }
}

TEST(PipelineTest, OnlyTenFrameWindows) {
  EXPECT_THROW(preprocess_stream(std::vector<RawFrame>(20), {}, 5), std::invalid_argument);
}

}  // namespace
}  // namespace scdnn
