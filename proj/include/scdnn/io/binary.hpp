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

#ifndef SCDNN_IO_BINARY_HPP_
#define SCDNN_IO_BINARY_HPP_

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace scdnn::io {

/// Malformed or truncated input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename T>
T to_little(T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

}  // namespace detail

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void put(T v) {
    const T le = detail::to_little(v);
    out_.write(reinterpret_cast<const char*>(&le), sizeof(T));
  }

  template <typename T>
  void put_array(std::span<const T> values) {
    if constexpr (std::endian::native == std::endian::little) {
      out_.write(reinterpret_cast<const char*>(values.data()),
                 static_cast<std::streamsize>(values.size_bytes()));
    } else {
      for (const T& v : values) put(v);
    }
  }

  void put_bytes(std::string_view bytes) {
    out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }

  /// u32 length followed by the bytes.
  void put_string(std::string_view s) {
    put(static_cast<std::uint32_t>(s.size()));
    put_bytes(s);
  }

  void check(std::string_view what) const {
    if (!out_) throw std::runtime_error(std::string(what) + ": write failed");
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string context) : in_(in), context_(std::move(context)) {}

  template <typename T>
  T get(std::string_view what) {
    T v;
    read(reinterpret_cast<char*>(&v), sizeof(T), what);
    return detail::to_little(v);
  }

  template <typename T>
  void get_array(std::span<T> out, std::string_view what) {
    read(reinterpret_cast<char*>(out.data()), out.size_bytes(), what);
    if constexpr (std::endian::native != std::endian::little) {
      for (T& v : out) v = detail::to_little(v);
    }
  }

  std::string get_bytes(std::size_t n, std::string_view what) {
    std::string s(n, '\0');
    read(s.data(), n, what);
    return s;
  }

  std::string get_string(std::string_view what, std::size_t max_length = 1 << 20) {
    const auto n = get<std::uint32_t>(what);
    if (n > max_length) {
      throw FormatError(context_ + ": implausible length " + std::to_string(n) + " for " +
                        std::string(what));
    }
    return get_bytes(n, what);
  }

  /// Throws unless the stream is exhausted.
  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw FormatError(context_ + ": trailing bytes after last record");
    }
  }

  const std::string& context() const { return context_; }

 private:
  void read(char* dst, std::size_t n, std::string_view what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw FormatError(context_ + ": truncated while reading " + std::string(what));
    }
  }

  std::istream& in_;
  std::string context_;
};

/// 64-bit FNV-1a, used to fingerprint binary artifacts in their text twins.
inline std::uint64_t fnv1a(std::span<const unsigned char> bytes,
                           std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

template <typename T>
std::uint64_t fnv1a_values(std::span<const T> values, std::uint64_t hash = 0xcbf29ce484222325ULL) {
  return fnv1a({reinterpret_cast<const unsigned char*>(values.data()), values.size_bytes()},
               hash);
}

}  // namespace scdnn::io

#endif  // SCDNN_IO_BINARY_HPP_
