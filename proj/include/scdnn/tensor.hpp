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

#ifndef SCDNN_TENSOR_HPP_
#define SCDNN_TENSOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scdnn {

using Shape = std::vector<std::size_t>;

/// Raised when operand shapes are incompatible with an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ',';
    out << shape[i];
  }
  out << ')';
  return out.str();
}

/// Dense n-dimensional array of doubles in row-major order.
///
/// Scalars are represented with shape (1). Every dimension is positive.
class Tensor {
 public:
  Tensor() : shape_{1}, values_(1, 0.0) {}

  explicit Tensor(Shape shape, double fill = 0.0)
      : shape_(std::move(shape)) {
    validate_dims();
    values_.assign(shape_size(shape_), fill);
  }

  Tensor(Shape shape, std::vector<double> values)
      : shape_(std::move(shape)), values_(std::move(values)) {
    validate_dims();
    if (shape_size(shape_) != values_.size()) {
      throw ShapeError("tensor: shape " + to_string(shape_) + " holds " +
                       std::to_string(shape_size(shape_)) + " values, got " +
                       std::to_string(values_.size()));
    }
  }

  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return values_.size(); }
  bool is_scalar() const { return values_.size() == 1; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double item() const {
    if (!is_scalar()) {
      throw ShapeError("tensor: item() on non-scalar shape " +
                       to_string(shape_));
    }
    return values_.front();
  }

  /// Same values viewed under a new shape of equal size.
  Tensor reshaped(Shape shape) const {
    return Tensor(std::move(shape), values_);
  }

  void fill(double value) { std::fill(values_.begin(), values_.end(), value); }

  bool all_finite() const {
    for (double v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  void validate_dims() const {
    if (shape_.empty()) throw ShapeError("tensor: empty shape");
    // An empty batch (leading dimension 0) is allowed; inner dimensions
    // must be positive.
    for (std::size_t i = 1; i < shape_.size(); ++i) {
      if (shape_[i] == 0) {
        throw ShapeError("tensor: zero-length dimension in " +
                         to_string(shape_));
      }
    }
  }

  Shape shape_;
  std::vector<double> values_;
};

/// Bitwise comparison, distinguishing -0.0 from 0.0 and equal NaN payloads.
inline bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace scdnn

#endif  // SCDNN_TENSOR_HPP_
