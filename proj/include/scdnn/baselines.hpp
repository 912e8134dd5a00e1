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

#ifndef SCDNN_BASELINES_HPP_
#define SCDNN_BASELINES_HPP_

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scdnn/activity.hpp"
#include "scdnn/autodiff.hpp"
#include "scdnn/layers.hpp"
#include "scdnn/metrics.hpp"
#include "scdnn/model.hpp"
#include "scdnn/trainer.hpp"

namespace scdnn {

/// k-nearest-neighbour classifier over flattened 640-value samples.
struct KnnModel {
  std::vector<double> samples;  // row-major, kSampleSize per row
  std::vector<int> labels;
  std::size_t k = 5;

  std::size_t size() const { return labels.size(); }
};

inline KnnModel knn_fit(std::span<const LabeledSet* const> sets, std::size_t k = 5) {
  KnnModel m;
  m.k = k;
  for (const LabeledSet* s : sets) {
    detail::check_labeled("knn training set", *s);
    const auto v = s->samples.values();
    m.samples.insert(m.samples.end(), v.begin(), v.end());
    m.labels.insert(m.labels.end(), s->labels.begin(), s->labels.end());
  }
  if (k == 0) throw std::invalid_argument("knn: k must be positive");
  if (k > m.size()) {
    throw std::invalid_argument("knn: k = " + std::to_string(k) + " exceeds " +
                                std::to_string(m.size()) + " training samples");
  }
  return m;
}

inline KnnModel knn_fit(const LabeledSet& set, std::size_t k = 5) {
  const LabeledSet* sets[] = {&set};
  return knn_fit(sets, k);
}

/// Votes of the k nearest stored samples (Euclidean). Equal distances are
/// ordered by storage index.
inline std::array<std::size_t, kNumActivities> knn_votes(const KnnModel& model,
                                                         std::span<const double> sample) {
  if (model.size() == 0) throw std::invalid_argument("knn: empty model");
  if (sample.size() != kSampleSize) {
    throw ShapeError("knn: expected " + std::to_string(kSampleSize) + " values, got " +
                     std::to_string(sample.size()));
  }
  std::vector<std::pair<double, std::size_t>> dist(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    const double* row = model.samples.data() + i * kSampleSize;
    double d = 0.0;
    for (std::size_t j = 0; j < kSampleSize; ++j) {
      const double diff = row[j] - sample[j];
      d += diff * diff;
    }
    dist[i] = {d, i};
  }
  const std::size_t k = std::min(model.k, model.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::array<std::size_t, kNumActivities> votes{};
  for (std::size_t i = 0; i < k; ++i) {
    ++votes[static_cast<std::size_t>(model.labels[dist[i].second])];
  }
  return votes;
}

/// Majority vote; ties go to the lowest class index.
inline ActivityLabel knn_classify(const KnnModel& model, std::span<const double> sample) {
  const auto votes = knn_votes(model, sample);
  return activity_from_index(
      static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin()));
}

/// Vote fractions as an (N, 8) score matrix.
inline Tensor knn_scores(const KnnModel& model, const LabeledSet& queries) {
  Tensor out({queries.size(), kNumActivities});
  const double inv = 1.0 / static_cast<double>(std::min(model.k, model.size()));
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto votes = knn_votes(model, queries.row(i));
    for (std::size_t c = 0; c < kNumActivities; ++c) {
      out[i * kNumActivities + c] = static_cast<double>(votes[c]) * inv;
    }
  }
  return out;
}

inline metrics::MetricsReport evaluate(const KnnModel& model, const LabeledSet& test) {
  if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
  return metrics::make_report(knn_scores(model, test), test.labels);
}

/// Supervised training of the feature extractor and label classifier on
/// source data only: source NLL + L2, no domain head, no target data.
/// Shares initialization and batch order with train_scdnn for the same seed.
inline TrainResult train_source_only(const LabeledSet& source, const TrainConfig& config,
                                     const LabeledSet* test = nullptr,
                                     const EpochCallback& on_epoch = {}) {
  config.validate();
  if (source.empty()) throw ConfigError("train: empty source split");
  detail::check_labeled("source set", source);

  TrainResult result{build_model(config.seed, config.architecture), {}};
  ScdnnModel& model = result.model;
  std::vector<Tensor*> params;
  for (const auto& p : model.parameters()) params.push_back(p.tensor);
  std::vector<std::vector<double>> velocity;
  for (Tensor* p : params) velocity.emplace_back(p->size(), 0.0);

  const std::size_t n = source.size();
  const std::size_t steps = (n + config.batch_size - 1) / config.batch_size;
  auto rng = detail::rng_stream(config.seed, detail::kSourceStream);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = config.learning_rate_at(epoch);
    EpochRecord rec;
    rec.epoch = epoch + 1;
    for (std::size_t step = 0; step < steps; ++step) {
      const std::size_t begin = step * config.batch_size;
      const std::size_t b = std::min(config.batch_size, n - begin);
      std::vector<double> data;
      std::vector<int> labels;
      data.reserve(b * kSampleSize);
      for (std::size_t i = begin; i < begin + b; ++i) {
        const auto r = source.row(order[i]);
        data.insert(data.end(), r.begin(), r.end());
        labels.push_back(source.labels[order[i]]);
      }
      const Tensor batch({b, kSampleChannels, kSampleHeight, kSampleWidth}, std::move(data));

      ad::Tape tape;
      const BoundModel m = bind(tape, model);
      const ad::Var probs =
          classify_labels(m, extract_features(m, tape.constant_ref(batch)));
      const ad::Var nll = nn::nll_class_loss(probs, labels);
      const std::vector<ad::Var> weights = m.regularized_weights();
      const ad::Var reg = nn::l2_regularizer(weights, config.l2);
      const ad::Var loss = ad::add(nll, reg);
      detail::check_finite(loss.value().item(), "source-only loss", epoch + 1, step + 1);
      rec.source_label_loss += nll.value().item();
      rec.regularizer += reg.value().item();

      const ad::GradientMap grads = tape.backward(loss);
      const std::vector<ad::Var> vars = m.all();
      for (std::size_t k = 0; k < params.size(); ++k) {
        if (!grads.contains(vars[k])) continue;  // domain head stays at init
        const auto g = grads.at(vars[k]).values();
        double* w = params[k]->data();
        std::vector<double>& v = velocity[k];
        for (std::size_t i = 0; i < v.size(); ++i) {
          v[i] = config.momentum * v[i] + g[i];
          w[i] -= lr * v[i];
        }
      }
    }
    rec.source_label_loss /= static_cast<double>(steps);
    rec.regularizer /= static_cast<double>(steps);
    if (test && config.evaluate_each_epoch && !test->empty()) {
      rec.test = summarize(evaluate(model, *test));
    }
    result.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

/// SCDNN without the few-shot branch: unsupervised adversarial adaptation.
inline TrainResult train_dann_mode(DataSplit split, const TrainConfig& config,
                                   const EpochCallback& on_epoch = {}) {
  split.target_labeled = LabeledSet{};
  return train_scdnn(split, config, on_epoch);
}

struct MethodResult {
  std::string method;
  metrics::MetricsReport report;
  double seconds = 0;
};

/// Trains and evaluates KNN, source-only, DANN mode and SCDNN on one split.
/// KNN stores the source set plus the few-shot target samples.
inline std::vector<MethodResult> compare_methods(const DataSplit& split,
                                                 const TrainConfig& config,
                                                 std::size_t knn_k = 5) {
  TrainConfig quiet = config;
  quiet.evaluate_each_epoch = false;
  std::vector<MethodResult> out;
  auto timed = [&out](std::string name, auto&& run) {
    const auto start = std::chrono::steady_clock::now();
    metrics::MetricsReport report = run();
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    out.push_back({std::move(name), std::move(report), took.count()});
  };
  timed("knn", [&] {
    const LabeledSet* sets[] = {&split.source_labeled, &split.target_labeled};
    return evaluate(knn_fit(sets, knn_k), split.target_test);
  });
  timed("source-only", [&] {
    return evaluate(train_source_only(split.source_labeled, quiet).model, split.target_test);
  });
  timed("dann", [&] {
    return evaluate(train_dann_mode(split, quiet).model, split.target_test);
  });
  timed("scdnn", [&] { return evaluate(train_scdnn(split, quiet).model, split.target_test); });
  return out;
}

}  // namespace scdnn

#endif  // SCDNN_BASELINES_HPP_
