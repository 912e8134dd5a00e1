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

// Finite-difference cases covering every layer operation. Each case maps a
// random point to a scalar through the op, weighting outputs by a fixed
// random tensor so that no gradient is trivially uniform.

#ifndef SCDNN_TESTS_GRADIENT_CASES_HPP_
#define SCDNN_TESTS_GRADIENT_CASES_HPP_

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "scdnn/autodiff.hpp"
#include "scdnn/layers.hpp"
#include "test_util.hpp"

namespace scdnn::testing {

struct GradientCase {
  std::string name;
  std::function<Tensor(std::mt19937_64&)> point;
  ad::ScalarFunction f;
  ad::ScalarFunction reference = {};  // finite-difference target; empty means f

  double check(const Tensor& point, double step) const {
    return ad::finite_difference_check(f, reference ? reference : f, point, step);
  }
};

namespace detail {

// Weighted sum <y, r> with r held by the closure.
inline ad::Var weighted(ad::Tape& t, const ad::Var& y, const std::shared_ptr<Tensor>& r) {
  return ad::sum(ad::mul(y, t.constant_ref(*r)));
}

}  // namespace detail

inline std::vector<GradientCase> gradient_cases(std::uint64_t seed = 2026) {
  std::mt19937_64 rng(seed);
  auto fixed = [&rng](const Shape& s) {
    return std::make_shared<Tensor>(random_tensor(s, rng));
  };
  std::vector<GradientCase> cases;

  // conv2d, batched (2,2,6,7) with a (3,2,3,4) kernel -> (2,3,4,4).
  {
    auto w = fixed({3, 2, 3, 4});
    auto b = fixed({3});
    auto x = fixed({2, 2, 6, 7});
    auto r = fixed({2, 3, 4, 4});
    cases.push_back({"conv2d/input",
                     [](std::mt19937_64& g) { return random_tensor({2, 2, 6, 7}, g); },
                     [=](ad::Tape& t, const ad::Var& v) {
                       return detail::weighted(
                           t, nn::conv2d(v, t.constant_ref(*w), t.constant_ref(*b)), r);
                     }});
    cases.push_back({"conv2d/weights",
                     [](std::mt19937_64& g) { return random_tensor({3, 2, 3, 4}, g); },
                     [=](ad::Tape& t, const ad::Var& v) {
                       return detail::weighted(
                           t, nn::conv2d(t.constant_ref(*x), v, t.constant_ref(*b)), r);
                     }});
    cases.push_back({"conv2d/bias", [](std::mt19937_64& g) { return random_tensor({3}, g); },
                     [=](ad::Tape& t, const ad::Var& v) {
                       return detail::weighted(
                           t, nn::conv2d(t.constant_ref(*x), t.constant_ref(*w), v), r);
                     }});
  }
  {
    auto r = fixed({2, 3, 2, 3});
    cases.push_back({"maxpool2",
                     [](std::mt19937_64& g) { return distinct_values({2, 3, 4, 6}, g); },
                     [=](ad::Tape& t, const ad::Var& v) {
                       return detail::weighted(t, nn::maxpool2(v), r);
                     }});
  }
  {
    auto w = fixed({4, 6});
    auto b = fixed({4});
    auto x = fixed({3, 6});
    auto r = fixed({3, 4});
    cases.push_back({"dense/input", [](std::mt19937_64& g) { return random_tensor({3, 6}, g); },
                     [=](ad::Tape& t, const ad::Var& v) {
                       return detail::weighted(
                           t, nn::dense(v, t.constant_ref(*w), t.constant_ref(*b)), r);
                     }});
    cases.push_back({"dense/weights",
                     [](std::mt19937_64& g) { return random_tensor({4, 6}, g); },
                     [=](ad::Tape& t, const ad::Var& v) {
                       return detail::weighted(
                           t, nn::dense(t.constant_ref(*x), v, t.constant_ref(*b)), r);
                     }});
    cases.push_back({"dense/bias", [](std::mt19937_64& g) { return random_tensor({4}, g); },
                     [=](ad::Tape& t, const ad::Var& v) {
                       return detail::weighted(
                           t, nn::dense(t.constant_ref(*x), t.constant_ref(*w), v), r);
                     }});
  }
  {
    auto r = fixed({4, 5});
    cases.push_back({"relu",
                     [](std::mt19937_64& g) { return random_away_from_zero({4, 5}, g); },
                     [=](ad::Tape& t, const ad::Var& v) {
                       return detail::weighted(t, nn::relu(v), r);
                     }});
    cases.push_back({"sigmoid",
                     [](std::mt19937_64& g) { return random_tensor({4, 5}, g, -4, 4); },
                     [=](ad::Tape& t, const ad::Var& v) {
                       return detail::weighted(t, nn::sigmoid(v), r);
                     }});
    cases.push_back({"softmax",
                     [](std::mt19937_64& g) { return random_tensor({4, 5}, g, -3, 3); },
                     [=](ad::Tape& t, const ad::Var& v) {
                       return detail::weighted(t, nn::softmax(v), r);
                     }});
    // Reversal: the analytic gradient must match finite differences of
    // the forward scaled by -lambda.
    auto flipped = std::make_shared<Tensor>(*r);
    for (std::size_t i = 0; i < flipped->size(); ++i) (*flipped)[i] *= -0.7;
    cases.push_back({"grl",
                     [](std::mt19937_64& g) { return random_tensor({4, 5}, g); },
                     [=](ad::Tape& t, const ad::Var& v) {
                       return detail::weighted(t, nn::gradient_reversal(v, 0.7), r);
                     },
                     [=](ad::Tape& t, const ad::Var& v) {
                       return detail::weighted(t, v, flipped);
                     }});
  }
  {
    const std::vector<int> labels{3, 0, 7, 5};
    cases.push_back({"nll_class_loss",
                     [](std::mt19937_64& g) { return random_tensor({4, 8}, g, 0.05, 1.0); },
                     [=](ad::Tape&, const ad::Var& v) { return nn::nll_class_loss(v, labels); }});
    cases.push_back({"nll_class_loss/softmax",
                     [](std::mt19937_64& g) { return random_tensor({4, 8}, g, -3, 3); },
                     [=](ad::Tape&, const ad::Var& v) {
                       return nn::nll_class_loss(nn::softmax(v), labels);
                     }});
    const std::vector<int> domains{0, 1, 1, 0, 1};
    cases.push_back({"domain_bce_loss",
                     [](std::mt19937_64& g) { return random_tensor({5, 2}, g, 0.05, 1.0); },
                     [=](ad::Tape&, const ad::Var& v) { return nn::domain_bce_loss(v, domains); }});
    cases.push_back({"domain_bce_loss/softmax",
                     [](std::mt19937_64& g) { return random_tensor({5, 2}, g, -3, 3); },
                     [=](ad::Tape&, const ad::Var& v) {
                       return nn::domain_bce_loss(nn::softmax(v), domains);
                     }});
  }
  {
    auto other = fixed({3, 3});
    cases.push_back({"l2_regularizer",
                     [](std::mt19937_64& g) { return random_tensor({4, 3}, g); },
                     [=](ad::Tape& t, const ad::Var& v) {
                       const ad::Var ws[] = {v, t.constant_ref(*other)};
                       return nn::l2_regularizer(ws, 0.3);
                     }});
  }
  return cases;
}

}  // namespace scdnn::testing

#endif  // SCDNN_TESTS_GRADIENT_CASES_HPP_
