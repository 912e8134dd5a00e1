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

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "scdnn/baselines.hpp"
#include "scdnn/synthgen.hpp"
#include "test_util.hpp"

namespace scdnn {
namespace {

LabeledSet random_set(std::size_t n, std::mt19937_64& rng) {
  LabeledSet s;
  s.samples = testing::random_tensor({n, kSampleChannels, kSampleHeight, kSampleWidth}, rng);
  std::uniform_int_distribution<int> cls(0, kNumActivities - 1);
  for (std::size_t i = 0; i < n; ++i) s.labels.push_back(cls(rng));
  return s;
}

// Constant-valued sample, so distances are easy to reason about.
LabeledSet constant_set(const std::vector<double>& levels, const std::vector<int>& labels) {
  LabeledSet s;
  s.samples = Tensor({levels.size(), kSampleChannels, kSampleHeight, kSampleWidth});
  for (std::size_t i = 0; i < levels.size(); ++i) {
    std::fill_n(s.samples.data() + i * kSampleSize, kSampleSize, levels[i]);
  }
  s.labels = labels;
  return s;
}

TEST(KnnTest, NearestNeighbourWins) {
  const LabeledSet train = constant_set({0.0, 1.0, 5.0}, {0, 3, 6});
  const KnnModel m = knn_fit(train, 1);
  const std::vector<double> q(kSampleSize, 4.2);
  EXPECT_EQ(knn_classify(m, q), ActivityLabel::kStooping);
  const std::vector<double> q2(kSampleSize, 0.9);
  EXPECT_EQ(knn_classify(m, q2), ActivityLabel::kStanding);
}

TEST(KnnTest, MajorityOfThree) {
  const LabeledSet train = constant_set({0.0, 0.1, 0.2, 3.0, 3.1}, {2, 2, 5, 5, 5});
  const KnnModel m = knn_fit(train, 3);
  const std::vector<double> q(kSampleSize, 0.05);
  EXPECT_EQ(knn_classify(m, q), ActivityLabel::kSitting);
  const auto votes = knn_votes(m, q);
  EXPECT_EQ(votes[2], 2u);
  EXPECT_EQ(votes[5], 1u);
}

TEST(KnnTest, VoteTieGoesToLowerClass) {
  const LabeledSet train = constant_set({1.0, -1.0}, {4, 1});
  const KnnModel m = knn_fit(train, 2);
  const std::vector<double> q(kSampleSize, 0.0);
  EXPECT_EQ(knn_classify(m, q), ActivityLabel::kSquatting);
}

TEST(KnnTest, MatchesFullSortOracle) {
  std::mt19937_64 rng(31);
  const LabeledSet train = random_set(60, rng);
  const LabeledSet queries = random_set(20, rng);
  const KnnModel m = knn_fit(train, 7);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < train.size(); ++i) {
      double d = 0;
      for (std::size_t j = 0; j < kSampleSize; ++j) {
        d += std::pow(train.row(i)[j] - queries.row(q)[j], 2);
      }
      all.push_back({d, i});
    }
    std::sort(all.begin(), all.end());
    std::array<std::size_t, kNumActivities> want{};
    for (std::size_t i = 0; i < 7; ++i) ++want[static_cast<std::size_t>(train.labels[all[i].second])];
    EXPECT_EQ(knn_votes(m, queries.row(q)), want);
  }
}

TEST(KnnTest, DuplicatedTrainingSetWithDoubleK) {
  std::mt19937_64 rng(32);
  const LabeledSet train = random_set(40, rng);
  const LabeledSet queries = random_set(15, rng);
  const LabeledSet* twice[] = {&train, &train};
  const KnnModel once = knn_fit(train, 3);
  const KnnModel doubled = knn_fit(twice, 6);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    auto a = knn_votes(once, queries.row(q));
    for (auto& v : a) v *= 2;
    EXPECT_EQ(knn_votes(doubled, queries.row(q)), a);
  }
}

TEST(KnnTest, ScoresAreVoteFractions) {
  std::mt19937_64 rng(33);
  const LabeledSet train = random_set(30, rng);
  const LabeledSet queries = random_set(10, rng);
  const Tensor s = knn_scores(knn_fit(train, 5), queries);
  ASSERT_EQ(s.shape(), (Shape{10, kNumActivities}));
  for (std::size_t i = 0; i < 10; ++i) {
    double sum = 0;
    for (std::size_t c = 0; c < kNumActivities; ++c) sum += s[i * kNumActivities + c];
    EXPECT_DOUBLE_EQ(sum, 1.0);
  }
}

TEST(KnnTest, Errors) {
  std::mt19937_64 rng(34);
  const LabeledSet train = random_set(3, rng);
  EXPECT_THROW(knn_fit(train, 0), std::invalid_argument);
  EXPECT_THROW(knn_fit(train, 4), std::invalid_argument);
  const KnnModel m = knn_fit(train, 1);
  const std::vector<double> short_query(10, 0.0);
  EXPECT_THROW(knn_votes(m, short_query), ShapeError);
  LabeledSet unlabeled = train;
  unlabeled.labels.clear();
  EXPECT_THROW(knn_fit(unlabeled, 1), std::invalid_argument);
}

TEST(KnnTest, SeparatesSyntheticSourceData) {
  const auto train = make_set(preprocess_streams(generate_dataset(DomainSpec::source(), 40, 3)));
  const auto test = make_set(preprocess_streams(generate_dataset(DomainSpec::source(), 10, 4)));
  // Empty rooms are trivially recognised; the rest still clear chance.
  EXPECT_GT(evaluate(knn_fit(train, 5), test).accuracy, 0.3);
}

TrainConfig tiny_config(std::size_t epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 16;
  c.learning_rate = 0.005;
  c.architecture = {2, 3, 8, 6, 8};
  c.seed = 9;
  return c;
}

TEST(SourceOnlyTest, DomainHeadUntouchedAndDeterministic) {
  const auto src = make_set(preprocess_streams(generate_dataset(DomainSpec::source(), 6, 5)));
  const TrainConfig c = tiny_config(2);
  const TrainResult a = train_source_only(src, c);
  const TrainResult b = train_source_only(src, c);
  EXPECT_TRUE(a.model == b.model);
  const ScdnnModel init = build_model(c.seed, c.architecture);
  EXPECT_TRUE(bitwise_equal(a.model.domain_fc1.weights.values(), init.domain_fc1.weights.values()));
  EXPECT_FALSE(bitwise_equal(a.model.conv1.weights.values(),
                             init.conv1.weights.values()));
  EXPECT_THROW(train_source_only(LabeledSet{}, c), ConfigError);
}

TEST(SourceOnlyTest, FitsItsTrainingData) {
  const auto src = make_set(preprocess_streams(generate_dataset(DomainSpec::source(), 12, 6)));
  TrainConfig c = tiny_config(40);
  c.architecture = {4, 6, 16, 12, 8};
  c.learning_rate = 0.01;
  const TrainResult r = train_source_only(src, c, &src);
  EXPECT_GT(r.history.epochs.back().test->accuracy, 0.5);
}

TEST(CompareTest, RunsAllMethods) {
  const auto src = preprocess_streams(generate_dataset(DomainSpec::source(), 6, 7));
  const auto tgt = preprocess_streams(generate_dataset(DomainSpec::target(), 8, 8));
  const DataSplit split = make_split(src, tgt, {2, 16, 24}, 3);
  const auto results = compare_methods(split, tiny_config(1), 3);
  ASSERT_EQ(results.size(), 4u);
  const char* names[] = {"knn", "source-only", "dann", "scdnn"};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(results[i].method, names[i]);
    EXPECT_EQ(results[i].report.confusion.total(), 24u);
  }
}

}  // namespace
}  // namespace scdnn
