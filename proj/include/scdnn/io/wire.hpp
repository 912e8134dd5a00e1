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

#ifndef SCDNN_IO_WIRE_HPP_
#define SCDNN_IO_WIRE_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scdnn/preprocess.hpp"

namespace scdnn::io {

// 64 little-endian int16 readings in quarter degrees, row-major, optionally
// followed by a little-endian u64 millisecond timestamp.
inline constexpr std::size_t kWireFrameBytes = 2 * kPixels;
inline constexpr std::size_t kWireFrameWithTimestampBytes = kWireFrameBytes + 8;
inline constexpr double kWireUnitCelsius = 0.25;

class WireFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rounds each temperature to the nearest quarter degree.
inline std::vector<std::uint8_t> encode_wire_frame(const RawFrame& frame,
                                                   bool with_timestamp = true) {
  std::vector<std::uint8_t> out;
  out.reserve(kWireFrameWithTimestampBytes);
  for (float t : frame.temperatures) {
    const long q = std::lround(static_cast<double>(t) / kWireUnitCelsius);
    if (q < INT16_MIN || q > INT16_MAX) {
      throw WireFormatError("encode_wire_frame: temperature " + std::to_string(t) +
                            " not representable");
    }
    const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(q));
    out.push_back(static_cast<std::uint8_t>(u & 0xff));
    out.push_back(static_cast<std::uint8_t>(u >> 8));
  }
  if (with_timestamp) {
    for (int i = 0; i < 8; ++i) {
      out.push_back(static_cast<std::uint8_t>(frame.timestamp_ms >> (8 * i)));
    }
  }
  return out;
}

/// Parses one datagram. The 128-byte form is stamped with `receive_ms`.
inline RawFrame decode_wire_frame(std::span<const std::uint8_t> payload,
                                  std::uint64_t receive_ms = 0) {
  if (payload.size() != kWireFrameBytes && payload.size() != kWireFrameWithTimestampBytes) {
    throw WireFormatError("wire frame: payload of " + std::to_string(payload.size()) +
                          " bytes, expected 128 or 136");
  }
  RawFrame frame;
  for (std::size_t i = 0; i < kPixels; ++i) {
    const auto raw = static_cast<std::uint16_t>(payload[2 * i] | (payload[2 * i + 1] << 8));
    const auto q = static_cast<std::int16_t>(raw);
    frame.temperatures[i] = static_cast<float>(q * kWireUnitCelsius);
  }
  if (!frame.in_sensor_range()) {
    throw WireFormatError("wire frame: temperature outside sensor range");
  }
  frame.timestamp_ms = receive_ms;
  if (payload.size() == kWireFrameWithTimestampBytes) {
    std::uint64_t ts = 0;
    for (int i = 7; i >= 0; --i) ts = (ts << 8) | payload[kWireFrameBytes + i];
    frame.timestamp_ms = ts;
  }
  return frame;
}

}  // namespace scdnn::io

#endif  // SCDNN_IO_WIRE_HPP_
