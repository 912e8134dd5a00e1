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

// Raw thermal frames to network-ready samples:
//
//   per frame:  subtract the frame minimum (the ambient estimate)
//   per pixel:  causal Butterworth low-pass over time
//   per stream: cut into non-overlapping windows of m frames, dropping the
//               incomplete tail
//   per window: lay 10 frames of 8x8 out as a 1x20x32 sample, frame k on
//               rows 2k and 2k+1

#ifndef SCDNN_PREPROCESS_HPP_
#define SCDNN_PREPROCESS_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scdnn/activity.hpp"
#include "scdnn/butterworth.hpp"
#include "scdnn/tensor.hpp"

namespace scdnn {

inline constexpr std::size_t kGridSize = 8;
inline constexpr std::size_t kPixels = kGridSize * kGridSize;
inline constexpr std::size_t kFramesPerSample = 10;
inline constexpr float kSensorMinCelsius = -20.0f;
inline constexpr float kSensorMaxCelsius = 80.0f;
inline constexpr double kDefaultFrameRateHz = 20.0;

/// One 8x8 thermopile reading, row-major, in degrees Celsius.
struct RawFrame {
  std::array<float, kPixels> temperatures{};
  std::uint64_t timestamp_ms = 0;

  float at(std::size_t row, std::size_t col) const {
    return temperatures[row * kGridSize + col];
  }
  float& at(std::size_t row, std::size_t col) {
    return temperatures[row * kGridSize + col];
  }

  bool in_sensor_range() const {
    return std::all_of(temperatures.begin(), temperatures.end(), [](float t) {
      return t >= kSensorMinCelsius && t <= kSensorMaxCelsius;
    });
  }

  friend bool operator==(const RawFrame&, const RawFrame&) = default;
};

/// Frame after subtraction and filtering, kept in double precision.
struct ProcessedFrame {
  std::array<double, kPixels> values{};
  std::uint64_t timestamp_ms = 0;
};

/// One network input: ten frames laid out as a 1x20x32 grid.
struct SampleTensor {
  std::array<double, kSampleSize> values{};
  std::array<std::uint64_t, kFramesPerSample> source_frames{};
  std::optional<ActivityLabel> label;
  DomainTag domain = DomainTag::kSource;

  Tensor as_tensor() const {
    return Tensor({kSampleChannels, kSampleHeight, kSampleWidth},
                  std::vector<double>(values.begin(), values.end()));
  }

  friend bool operator==(const SampleTensor&, const SampleTensor&) = default;
};

/// Stacks samples into an (N,1,20,32) batch tensor.
inline Tensor stack_samples(std::span<const SampleTensor> samples) {
  if (samples.empty()) throw ShapeError("stack_samples: no samples");
  std::vector<double> values;
  values.reserve(samples.size() * kSampleSize);
  for (const SampleTensor& s : samples) {
    values.insert(values.end(), s.values.begin(), s.values.end());
  }
  return Tensor({samples.size(), kSampleChannels, kSampleHeight, kSampleWidth},
                std::move(values));
}

/// Subtracts the frame minimum from every cell; the result has minimum 0.
inline RawFrame background_subtract(const RawFrame& frame) {
  const float floor =
      *std::min_element(frame.temperatures.begin(), frame.temperatures.end());
  RawFrame out = frame;
  for (float& t : out.temperatures) t -= floor;
  return out;
}

/// Non-overlapping windows of m consecutive frames; the L mod m trailing
/// frames are dropped.
template <typename Frame>
std::vector<std::vector<Frame>> segment(std::span<const Frame> stream,
                                        std::size_t m) {
  if (m == 0) throw std::invalid_argument("segment: window length must be >= 1");
  std::vector<std::vector<Frame>> windows;
  windows.reserve(stream.size() / m);
  for (std::size_t begin = 0; begin + m <= stream.size(); begin += m) {
    windows.emplace_back(stream.begin() + static_cast<std::ptrdiff_t>(begin),
                         stream.begin() + static_cast<std::ptrdiff_t>(begin + m));
  }
  return windows;
}

template <typename Frame>
std::vector<std::vector<Frame>> segment(const std::vector<Frame>& stream,
                                        std::size_t m) {
  return segment(std::span<const Frame>(stream), m);
}

/// Output (row, col) of cell `flat` (= 8r + c) of frame k.
inline std::pair<std::size_t, std::size_t> sample_position(std::size_t frame,
                                                           std::size_t flat) {
  return {2 * frame + flat / kSampleWidth, flat % kSampleWidth};
}

/// Lays out a window of ten processed frames as a 1x20x32 sample.
inline SampleTensor reshape_sample(std::span<const ProcessedFrame> window) {
  if (window.size() != kFramesPerSample) {
    throw std::invalid_argument("reshape_sample: expected " +
                                std::to_string(kFramesPerSample) +
                                " frames, got " + std::to_string(window.size()));
  }
  SampleTensor out;
  for (std::size_t k = 0; k < kFramesPerSample; ++k) {
    for (std::size_t f = 0; f < kPixels; ++f) {
      const auto [row, col] = sample_position(k, f);
      out.values[row * kSampleWidth + col] = window[k].values[f];
    }
    out.source_frames[k] = window[k].timestamp_ms;
  }
  return out;
}

/// Inverse of reshape_sample.
inline std::array<ProcessedFrame, kFramesPerSample> unreshape_sample(
    const SampleTensor& sample) {
  std::array<ProcessedFrame, kFramesPerSample> frames{};
  for (std::size_t k = 0; k < kFramesPerSample; ++k) {
    for (std::size_t f = 0; f < kPixels; ++f) {
      const auto [row, col] = sample_position(k, f);
      frames[k].values[f] = sample.values[row * kSampleWidth + col];
    }
    frames[k].timestamp_ms = sample.source_frames[k];
  }
  return frames;
}

/// Background subtraction followed by per-pixel filtering, frame by frame.
inline std::vector<ProcessedFrame> filter_stream(std::span<const RawFrame> stream,
                                                 const FilterSpec& spec) {
  spec.validate();
  std::vector<ProcessedFrame> out(stream.size());
  if (stream.empty()) return out;
  std::vector<ButterworthLowpass> filters(kPixels, ButterworthLowpass(spec));
  for (std::size_t t = 0; t < stream.size(); ++t) {
    const RawFrame flat = background_subtract(stream[t]);
    out[t].timestamp_ms = flat.timestamp_ms;
    for (std::size_t p = 0; p < kPixels; ++p) {
      const double x = flat.temperatures[p];
      if (t == 0) filters[p].reset(x);
      out[t].values[p] = filters[p].step(x);
    }
  }
  return out;
}

/// Full pipeline: subtract, filter, segment into m-frame windows, reshape.
/// Only m = 10 maps onto the 1x20x32 layout.
inline std::vector<SampleTensor> preprocess_stream(
    std::span<const RawFrame> stream, const FilterSpec& spec = {},
    std::size_t m = kFramesPerSample,
    std::optional<ActivityLabel> label = std::nullopt,
    DomainTag domain = DomainTag::kSource) {
  if (m != kFramesPerSample) {
    throw std::invalid_argument("preprocess_stream: the 1x20x32 layout needs m = " +
                                std::to_string(kFramesPerSample) + ", got " +
                                std::to_string(m));
  }
  const std::vector<ProcessedFrame> filtered = filter_stream(stream, spec);
  std::vector<SampleTensor> samples;
  samples.reserve(filtered.size() / m);
  for (std::size_t begin = 0; begin + m <= filtered.size(); begin += m) {
    SampleTensor s = reshape_sample(
        std::span<const ProcessedFrame>(filtered.data() + begin, m));
    s.label = label;
    s.domain = domain;
    samples.push_back(s);
  }
  return samples;
}

}  // namespace scdnn

#endif  // SCDNN_PREPROCESS_HPP_
