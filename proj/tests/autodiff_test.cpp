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
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "scdnn/autodiff.hpp"
#include "scdnn/layers.hpp"
#include "test_util.hpp"

namespace scdnn::ad {
namespace {

TEST(TensorTest, RejectsMismatchedValueCount) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  EXPECT_NO_THROW(Tensor({2, 3}, std::vector<double>(6)));
}

TEST(TensorTest, AllowsEmptyBatchOnly) {
  EXPECT_NO_THROW(Tensor(Shape{0, 4}));
  EXPECT_THROW(Tensor(Shape{4, 0}), ShapeError);
}

TEST(TapeTest, AddOfOnesIsTwo) {
  Tape tape;
  Var a = tape.constant(Tensor({2, 2}, 1.0));
  Var b = tape.constant(Tensor({2, 2}, 1.0));
  Var c = add(a, b);
  EXPECT_EQ(c.shape(), (Shape{2, 2}));
  for (double v : c.value().values()) EXPECT_EQ(v, 2.0);
}

TEST(TapeTest, MatmulOfOnesIsInnerLength) {
  Tape tape;
  Var c = matmul(tape.constant(Tensor({1, 3}, 1.0)), tape.constant(Tensor({3, 1}, 1.0)));
  EXPECT_EQ(c.shape(), (Shape{1, 1}));
  EXPECT_EQ(c.value()[0], 3.0);
}

TEST(TapeTest, MatmulInnerMismatchNamesShapes) {
  Tape tape;
  try {
    matmul(tape.constant(Tensor({2, 3})), tape.constant(Tensor({2, 3})));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("(2,3)"), std::string::npos) << e.what();
  }
}

TEST(TapeTest, InputsPrecedeTheirOperations) {
  Tape tape;
  Var x = tape.variable(Tensor({3}, 1.0));
  Var y = mul(x, x);
  Var z = sum(add(y, x));
  for (std::size_t id = 0; id <= z.id(); ++id) {
    for (std::size_t in : tape.inputs(id)) EXPECT_LT(in, id);
  }
}

TEST(BackwardTest, SumGivesOnes) {
  Tape tape;
  Var x = tape.variable(Tensor({4}, 0.5));
  const GradientMap g = tape.backward(sum(x));
  for (double v : g.at(x).values()) EXPECT_EQ(v, 1.0);
}

TEST(BackwardTest, SquareGivesTwiceX) {
  Tape tape;
  Var x = tape.variable(Tensor({1}, std::vector<double>{3.0}));
  const GradientMap g = tape.backward(sum(mul(x, x)));
  EXPECT_EQ(g.at(x)[0], 6.0);
}

TEST(BackwardTest, GradientReversalFlipsSign) {
  Tape tape;
  Var x = tape.variable(Tensor({1}, std::vector<double>{5.0}));
  const GradientMap g = tape.backward(sum(nn::gradient_reversal(x, 1.0)));
  EXPECT_EQ(g.at(x)[0], -1.0);
}

TEST(BackwardTest, FanOutAccumulates) {
  Tape tape;
  Var x = tape.variable(Tensor({2}, std::vector<double>{1.0, -2.0}));
  Var y = add(add(x, x), scale(x, 3.0));  // 5x
  const GradientMap g = tape.backward(sum(y));
  EXPECT_EQ(g.at(x)[0], 5.0);
  EXPECT_EQ(g.at(x)[1], 5.0);
}

TEST(BackwardTest, ConstantsHaveNoGradient) {
  Tape tape;
  Var c = tape.constant(Tensor({2}, 1.0));
  Var x = tape.variable(Tensor({2}, 2.0));
  const GradientMap g = tape.backward(sum(mul(c, x)));
  EXPECT_FALSE(g.contains(c));
  EXPECT_TRUE(g.contains(x));
  EXPECT_EQ(g.size(), 1u);
}

TEST(BackwardTest, GradientShapeMatchesLeafShape) {
  std::mt19937_64 rng(3);
  Tape tape;
  Var a = tape.variable(testing::random_tensor({3, 4}, rng));
  Var b = tape.variable(testing::random_tensor({4, 2}, rng));
  const GradientMap g = tape.backward(sum(matmul(a, b)));
  EXPECT_EQ(g.at(a).shape(), a.shape());
  EXPECT_EQ(g.at(b).shape(), b.shape());
}

TEST(BackwardTest, RepeatedCallsAreBitwiseIdentical) {
  std::mt19937_64 rng(4);
  Tape tape;
  Var a = tape.variable(testing::random_tensor({5, 6}, rng));
  Var b = tape.variable(testing::random_tensor({6, 3}, rng));
  Var loss = sum(mul(matmul(a, b), matmul(a, b)));
  const GradientMap g1 = tape.backward(loss);
  const GradientMap g2 = tape.backward(loss);
  EXPECT_TRUE(bitwise_equal(g1.at(a).values(), g2.at(a).values()));
  EXPECT_TRUE(bitwise_equal(g1.at(b).values(), g2.at(b).values()));
}

TEST(BackwardTest, RejectsNonScalarLoss) {
  Tape tape;
  Var x = tape.variable(Tensor({3}, 1.0));
  EXPECT_THROW(tape.backward(x), ShapeError);
}

TEST(BackwardTest, RejectsLossFromAnotherTape) {
  Tape a, b;
  Var x = a.variable(Tensor({1}, 1.0));
  EXPECT_THROW(b.backward(sum(x)), std::invalid_argument);
}

TEST(BackwardTest, SliceRowsRoutesGradientToRows) {
  Tape tape;
  Var x = tape.variable(Tensor({3, 2}, std::vector<double>{1, 2, 3, 4, 5, 6}));
  Var s = slice_rows(x, 1, 2);
  EXPECT_EQ(s.shape(), (Shape{2, 2}));
  EXPECT_EQ(s.value()[0], 3.0);
  const GradientMap g = tape.backward(sum(s));
  const std::vector<double> expected{0, 0, 1, 1, 1, 1};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(g.at(x)[i], expected[i]);
  EXPECT_THROW(slice_rows(x, 2, 2), ShapeError);
}

TEST(BackwardTest, ReferencesSurviveTapeGrowth) {
  Tape tape;
  Var x = tape.variable(Tensor({2}, 1.0));
  const Shape& s = x.shape();
  Var acc = x;
  for (int i = 0; i < 5000; ++i) acc = add(acc, x);
  EXPECT_EQ(s, (Shape{2}));
  EXPECT_EQ(tape.backward(sum(acc)).at(x)[0], 5001.0);
}

TEST(FiniteDifferenceTest, PolynomialIsExact) {
  const Tensor point({3}, std::vector<double>{1, 2, 3});
  const double err = finite_difference_check(
      [](Tape&, const Var& x) { return sum(mul(x, x)); }, point, 1e-5);
  EXPECT_LT(err, 1e-6);
}

TEST(FiniteDifferenceTest, SigmoidAtRandomPoint) {
  std::mt19937_64 rng(11);
  const double err = finite_difference_check(
      [](Tape&, const Var& x) { return sum(nn::sigmoid(x)); },
      testing::random_tensor({7}, rng, -3, 3), 1e-5);
  EXPECT_LT(err, 1e-5);
}

TEST(FiniteDifferenceTest, ConvOnSixBySix) {
  std::mt19937_64 rng(12);
  const Tensor kernel = testing::random_tensor({2, 1, 3, 3}, rng);
  const Tensor bias = testing::random_tensor({2}, rng);
  const double err = finite_difference_check(
      [&](Tape& t, const Var& x) {
        return sum(nn::conv2d(x, t.constant_ref(kernel), t.constant_ref(bias)));
      },
      testing::random_tensor({1, 6, 6}, rng), 1e-5);
  EXPECT_LT(err, 1e-5);
}

TEST(FiniteDifferenceTest, MissingGradientIsInfinite) {
  const double err = finite_difference_check(
      [](Tape& t, const Var&) { return sum(t.constant(Tensor({1}, 1.0))); }, Tensor({2}, 1.0),
      1e-5);
  EXPECT_TRUE(std::isinf(err));
}

TEST(FiniteDifferenceTest, RejectsNonPositiveStep) {
  auto f = [](Tape&, const Var& x) { return sum(x); };
  EXPECT_THROW(finite_difference_check(f, Tensor({1}), 0.0), std::invalid_argument);
  EXPECT_THROW(finite_difference_check(f, Tensor({1}), -1e-5), std::invalid_argument);
}

TEST(FiniteDifferenceTest, ElementaryOpsPass) {
  std::mt19937_64 rng(13);
  const Tensor other = testing::random_tensor({3, 4}, rng);
  const Tensor right = testing::random_tensor({4, 2}, rng);
  const std::vector<std::pair<const char*, ScalarFunction>> cases = {
      {"sub", [&](Tape& t, const Var& x) { return sum(mul(sub(x, t.constant_ref(other)), x)); }},
      {"scale", [](Tape&, const Var& x) { return sum(mul(scale(x, -2.5), x)); }},
      {"mean", [](Tape&, const Var& x) { return mean(mul(x, x)); }},
      {"reshape", [](Tape&, const Var& x) { return sum(mul(reshape(x, {12}), reshape(x, {12}))); }},
      {"matmul", [&](Tape& t, const Var& x) {
         Var y = matmul(x, t.constant_ref(right));
         return sum(mul(y, y));
       }},
  };
  for (const auto& [name, f] : cases) {
    for (int trial = 0; trial < 10; ++trial) {
      EXPECT_LT(finite_difference_check(f, testing::random_tensor({3, 4}, rng), 1e-5), 1e-6)
          << name;
    }
  }
}

}  // namespace
}  // namespace scdnn::ad
