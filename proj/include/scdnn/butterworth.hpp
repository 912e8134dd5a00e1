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

#ifndef SCDNN_BUTTERWORTH_HPP_
#define SCDNN_BUTTERWORTH_HPP_

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace scdnn {

/// Raised for filter parameters that cannot describe a low-pass design.
class FilterConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FilterSpec {
  int order = 2;
  double cutoff_hz = 2.0;
  double sample_rate_hz = 20.0;

  void validate() const {
    if (order < 1) throw FilterConfigError("filter: order must be >= 1");
    if (!(sample_rate_hz > 0.0)) {
      throw FilterConfigError("filter: sample rate must be positive");
    }
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate_hz / 2.0)) {
      throw FilterConfigError("filter: cutoff " + std::to_string(cutoff_hz) +
                              " Hz outside (0, " +
                              std::to_string(sample_rate_hz / 2.0) + ") Hz");
    }
  }
};

/// One second-order (or first-order, with b2 = a2 = 0) section in direct
/// form II transposed.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

/// Causal digital Butterworth low-pass designed by the bilinear transform
/// with a prewarped cutoff, realized as a cascade of biquads.
class ButterworthLowpass {
 public:
  explicit ButterworthLowpass(const FilterSpec& spec) : spec_(spec) {
    spec.validate();
    const int n = spec.order;
    const double k = std::tan(std::numbers::pi * spec.cutoff_hz / spec.sample_rate_hz);
    const double k2 = k * k;
    for (int i = 1; i <= n / 2; ++i) {
      // Pole pair damping 2 sin((2i-1) pi / 2n) of the analog prototype.
      const double q =
          2.0 * std::sin((2.0 * i - 1.0) * std::numbers::pi / (2.0 * n));
      const double norm = 1.0 + q * k + k2;
      Biquad s;
      s.b0 = k2 / norm;
      s.b1 = 2.0 * s.b0;
      s.b2 = s.b0;
      s.a1 = 2.0 * (k2 - 1.0) / norm;
      s.a2 = (1.0 - q * k + k2) / norm;
      sections_.push_back(s);
    }
    if (n % 2 == 1) {
      Biquad s;
      s.b0 = k / (1.0 + k);
      s.b1 = s.b0;
      s.a1 = (k - 1.0) / (k + 1.0);
      sections_.push_back(s);
    }
    state_.assign(sections_.size() * 2, 0.0);
  }

  const FilterSpec& spec() const { return spec_; }
  const std::vector<Biquad>& sections() const { return sections_; }

  /// Sets the internal state to the steady state for a constant input `x0`,
  /// so a series starting at x0 produces no startup transient.
  void reset(double x0) {
    for (std::size_t i = 0; i < sections_.size(); ++i) {
      const Biquad& s = sections_[i];
      // DC gain of every section is one, so each passes x0 unchanged.
      const double z2 = s.b2 * x0 - s.a2 * x0;
      const double z1 = s.b1 * x0 - s.a1 * x0 + z2;
      state_[2 * i] = z1;
      state_[2 * i + 1] = z2;
    }
  }

  double step(double x) {
    for (std::size_t i = 0; i < sections_.size(); ++i) {
      const Biquad& s = sections_[i];
      double& z1 = state_[2 * i];
      double& z2 = state_[2 * i + 1];
      const double y = s.b0 * x + z1;
      z1 = s.b1 * x - s.a1 * y + z2;
      z2 = s.b2 * x - s.a2 * y;
      x = y;
    }
    return x;
  }

  /// |H(e^{jw})| evaluated from the realized coefficients.
  double magnitude_at(double frequency_hz) const {
    const double w = 2.0 * std::numbers::pi * frequency_hz / spec_.sample_rate_hz;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    std::complex<double> h = 1.0;
    for (const Biquad& s : sections_) {
      h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    }
    return std::abs(h);
  }

 private:
  FilterSpec spec_;
  std::vector<Biquad> sections_;
  std::vector<double> state_;
};

/// Filters one time series, starting from the steady state of its first
/// sample.
inline std::vector<double> butterworth_filter(std::span<const double> series,
                                              const FilterSpec& spec) {
  ButterworthLowpass filter(spec);
  std::vector<double> out;
  out.reserve(series.size());
  if (series.empty()) return out;
  filter.reset(series.front());
  for (double x : series) out.push_back(filter.step(x));
  return out;
}

}  // namespace scdnn

#endif  // SCDNN_BUTTERWORTH_HPP_
