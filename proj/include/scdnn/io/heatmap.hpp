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

#ifndef SCDNN_IO_HEATMAP_HPP_
#define SCDNN_IO_HEATMAP_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scdnn/io/text.hpp"
#include "scdnn/preprocess.hpp"

namespace scdnn::io {

/// 8-bit grayscale image, row-major.
struct Graymap {
  std::size_t width = 0, height = 0;
  std::vector<std::uint8_t> pixels;
};

/// Min-max normalization to 0..255; constant input maps to mid-gray 128.
inline Graymap normalize_graymap(std::span<const double> values, std::size_t height,
                                 std::size_t width) {
  if (values.size() != height * width || values.empty()) {
    throw std::invalid_argument("heatmap: " + std::to_string(values.size()) +
                                " values for a " + std::to_string(height) + "x" +
                                std::to_string(width) + " grid");
  }
  Graymap g{width, height, std::vector<std::uint8_t>(values.size(), 128)};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (range > 0.0) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      g.pixels[i] = static_cast<std::uint8_t>(std::lround((values[i] - *lo) / range * 255.0));
    }
  }
  return g;
}

inline Graymap frame_graymap(const RawFrame& frame) {
  std::vector<double> v(frame.temperatures.begin(), frame.temperatures.end());
  return normalize_graymap(v, kGridSize, kGridSize);
}

inline Graymap sample_graymap(const SampleTensor& sample) {
  return normalize_graymap(sample.values, kSampleHeight, kSampleWidth);
}

inline void write_pgm(std::ostream& out, const Graymap& g) {
  out << "P5\n" << g.width << ' ' << g.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(g.pixels.data()),
            static_cast<std::streamsize>(g.pixels.size()));
}

/// Writes `path` as a binary graymap and `path.csv` with the source values.
inline void emit_heatmap(const std::filesystem::path& path, std::span<const double> values,
                         std::size_t height, std::size_t width) {
  const Graymap g = normalize_graymap(values, height, width);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_pgm(out, g);
  std::ofstream csv(path.string() + ".csv");
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      if (c) csv << ',';
      csv << format_number(values[r * width + c]);
    }
    csv << '\n';
  }
  if (!out || !csv) throw std::runtime_error("cannot write heatmap " + path.string());
}

inline void emit_heatmap(const std::filesystem::path& path, const RawFrame& frame) {
  std::vector<double> v(frame.temperatures.begin(), frame.temperatures.end());
  emit_heatmap(path, v, kGridSize, kGridSize);
}

inline void emit_heatmap(const std::filesystem::path& path, const SampleTensor& sample) {
  emit_heatmap(path, sample.values, kSampleHeight, kSampleWidth);
}

}  // namespace scdnn::io

#endif  // SCDNN_IO_HEATMAP_HPP_
