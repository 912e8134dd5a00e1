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

#ifndef SCDNN_TRAINER_HPP_
#define SCDNN_TRAINER_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "scdnn/activity.hpp"
#include "scdnn/autodiff.hpp"
#include "scdnn/layers.hpp"
#include "scdnn/metrics.hpp"
#include "scdnn/model.hpp"
#include "scdnn/preprocess.hpp"

namespace scdnn {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a training loss becomes NaN or infinite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 2 / (1 + exp(-10 p)) - 1: rises from 0 at p = 0 towards 1.
inline double grl_lambda_schedule(double progress) {
  if (!(progress >= 0.0 && progress <= 1.0)) {
    throw std::domain_error("grl_lambda_schedule: progress " +
                            std::to_string(progress) + " outside [0, 1]");
  }
  return 2.0 / (1.0 + std::exp(-10.0 * progress)) - 1.0;
}

struct GrlSchedule {
  enum class Kind { kProgressive, kConstant };
  Kind kind = Kind::kProgressive;
  double constant = 1.0;

  static GrlSchedule progressive() { return {}; }
  static GrlSchedule fixed(double lambda) { return {Kind::kConstant, lambda}; }

  double at(double progress) const {
    return kind == Kind::kConstant ? constant : grl_lambda_schedule(progress);
  }
  std::string name() const {
    return kind == Kind::kConstant ? "constant:" + std::to_string(constant)
                                   : "progressive";
  }
};

/// Step size per epoch. Constant keeps the base rate; cooldown drops it
/// tenfold for the last tenth of training so the final weights settle.
struct LrSchedule {
  enum class Kind { kConstant, kCooldown };
  Kind kind = Kind::kConstant;

  static LrSchedule constant() { return {}; }
  static LrSchedule cooldown() { return {Kind::kCooldown}; }

  double at(double base, double progress) const {
    if (kind == Kind::kCooldown && progress >= 0.9) return 0.1 * base;
    return base;
  }
  std::string name() const { return kind == Kind::kConstant ? "constant" : "cooldown"; }
};

struct TrainConfig {
  std::size_t epochs = 1000;
  std::size_t batch_size = 128;
  double learning_rate = 0.001;
  double l2 = 1e-4;
  double momentum = 0.9;
  GrlSchedule grl_schedule;
  LrSchedule lr_schedule;
  std::uint64_t seed = 1;
  Architecture architecture = Architecture::reference();
  bool evaluate_each_epoch = true;

  void validate() const {
    if (batch_size == 0) throw ConfigError("train: batch size must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate must be positive");
    if (!(l2 >= 0.0)) throw ConfigError("train: l2 coefficient must be non-negative");
    if (!(momentum >= 0.0 && momentum < 1.0)) {
      throw ConfigError("train: momentum must lie in [0, 1)");
    }
    if (grl_schedule.kind == GrlSchedule::Kind::kConstant && grl_schedule.constant < 0.0) {
      throw ConfigError("train: constant GRL coefficient must be non-negative");
    }
  }

  double learning_rate_at(std::size_t epoch) const {
    return lr_schedule.at(learning_rate,
                          static_cast<double>(epoch) / static_cast<double>(epochs));
  }
};

/// Samples stacked as (N,1,20,32) with one label per row. Unlabeled sets
/// keep `labels` empty.
struct LabeledSet {
  Tensor samples{Shape{0, kSampleChannels, kSampleHeight, kSampleWidth}};
  std::vector<int> labels;

  std::size_t size() const { return samples.dim(0); }
  bool empty() const { return size() == 0; }
  std::span<const double> row(std::size_t i) const {
    return samples.values().subspan(i * kSampleSize, kSampleSize);
  }
};

/// Stacks samples; labels are kept when every sample carries one.
inline LabeledSet make_set(std::span<const SampleTensor> samples, bool keep_labels = true) {
  LabeledSet set;
  if (samples.empty()) return set;
  set.samples = stack_samples(samples);
  if (keep_labels) {
    for (const SampleTensor& s : samples) {
      if (!s.label) throw std::invalid_argument("make_set: sample without label");
      set.labels.push_back(index_of(*s.label));
    }
  }
  return set;
}

/// Rows of `set` at `indices`, in that order.
inline LabeledSet gather(const LabeledSet& set, std::span<const std::size_t> indices) {
  LabeledSet out;
  std::vector<double> data;
  data.reserve(indices.size() * kSampleSize);
  for (std::size_t i : indices) {
    const auto r = set.row(i);
    data.insert(data.end(), r.begin(), r.end());
    if (!set.labels.empty()) out.labels.push_back(set.labels[i]);
  }
  out.samples = Tensor({indices.size(), kSampleChannels, kSampleHeight, kSampleWidth},
                       std::move(data));
  return out;
}

struct DataSplit {
  LabeledSet source_labeled;
  LabeledSet target_unlabeled;  // labels stripped
  LabeledSet target_labeled;    // few-shot
  LabeledSet target_test;

  /// Throws unless the three target sets share no sample.
  void check_disjoint() const {
    std::unordered_set<std::string> seen;
    const LabeledSet* sets[] = {&target_unlabeled, &target_labeled, &target_test};
    for (const LabeledSet* s : sets) {
      std::unordered_set<std::string> mine;
      for (std::size_t i = 0; i < s->size(); ++i) {
        const auto r = s->row(i);
        std::string key(reinterpret_cast<const char*>(r.data()), r.size_bytes());
        if (seen.count(key)) {
          throw ConfigError("split: target sets overlap");
        }
        mine.insert(std::move(key));
      }
      seen.merge(mine);
    }
  }
};

struct SplitSizes {
  std::size_t labeled_per_class = 4;
  std::size_t unlabeled = 1500;
  std::size_t test = 1000;
};

/// Partitions target samples into few-shot, test and unlabeled subsets.
/// Few-shot samples are drawn per class, the test set is class-balanced
/// (test / 8 per class, remainder to the lowest classes) and the unlabeled
/// pool comes from what is left, with labels removed.
inline DataSplit make_split(std::span<const SampleTensor> source,
                            std::span<const SampleTensor> target, const SplitSizes& sizes,
                            std::uint64_t seed) {
  DataSplit split;
  split.source_labeled = make_set(source);
  const LabeledSet all = make_set(target);
  std::mt19937_64 rng(seed);

  std::vector<std::vector<std::size_t>> by_class(kNumActivities);
  for (std::size_t i = 0; i < all.size(); ++i) {
    by_class[static_cast<std::size_t>(all.labels[i])].push_back(i);
  }
  std::vector<std::size_t> labeled, test, rest;
  for (std::size_t c = 0; c < kNumActivities; ++c) {
    auto& idx = by_class[c];
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t want_test =
        sizes.test / kNumActivities + (c < sizes.test % kNumActivities ? 1 : 0);
    if (idx.size() < sizes.labeled_per_class + want_test) {
      throw ConfigError("split: class " + std::string(name_of(activity_from_index(
                                              static_cast<int>(c)))) +
                        " has too few target samples");
    }
    labeled.insert(labeled.end(), idx.begin(), idx.begin() + sizes.labeled_per_class);
    auto t = idx.begin() + sizes.labeled_per_class;
    test.insert(test.end(), t, t + want_test);
    rest.insert(rest.end(), t + want_test, idx.end());
  }
  std::shuffle(rest.begin(), rest.end(), rng);
  if (rest.size() < sizes.unlabeled) {
    throw ConfigError("split: " + std::to_string(sizes.unlabeled) +
                      " unlabeled requested, " + std::to_string(rest.size()) + " available");
  }
  rest.resize(sizes.unlabeled);
  std::shuffle(test.begin(), test.end(), rng);

  split.target_labeled = gather(all, labeled);
  split.target_test = gather(all, test);
  split.target_unlabeled = gather(all, rest);
  split.target_unlabeled.labels.clear();
  return split;
}

/// First `per_class` few-shot samples of each class, in stored order.
inline LabeledSet select_per_class(const LabeledSet& set, std::size_t per_class) {
  std::vector<std::size_t> count(kNumActivities, 0), picked;
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto& n = count[static_cast<std::size_t>(set.labels[i])];
    if (n < per_class) {
      picked.push_back(i);
      ++n;
    }
  }
  for (std::size_t c = 0; c < kNumActivities; ++c) {
    if (count[c] < per_class) {
      throw ConfigError("sweep: only " + std::to_string(count[c]) +
                        " labeled samples for class " + std::to_string(c) + ", " +
                        std::to_string(per_class) + " requested");
    }
  }
  return gather(set, picked);
}

/// Test-set summary kept per epoch.
struct TestSummary {
  double accuracy = 0;
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double grl_lambda = 0;
  double source_label_loss = 0;
  double target_label_loss = 0;
  double domain_loss = 0;
  double domain_accuracy = 0;
  double regularizer = 0;
  std::optional<TestSummary> test;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  ScdnnModel model;
  TrainingHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Class probabilities for a whole set, MetricsReport against its labels.
inline metrics::MetricsReport evaluate(const ScdnnModel& model, const LabeledSet& test) {
  if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
  if (test.labels.size() != test.size()) {
    throw std::invalid_argument("evaluate: test set needs one label per sample");
  }
  return metrics::make_report(predict_probabilities(model, test.samples), test.labels);
}

inline TestSummary summarize(const metrics::MetricsReport& r) {
  return {r.accuracy, r.scores.macro_precision, r.scores.macro_recall, r.scores.macro_f1};
}

namespace detail {

/// Independent random stream `stream` derived from `seed`.
inline std::mt19937_64 rng_stream(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

inline constexpr std::uint32_t kSourceStream = 1;
inline constexpr std::uint32_t kTargetStream = 2;

/// Endless reshuffled cursor over [0, n).
class Cursor {
 public:
  Cursor(std::size_t n, std::mt19937_64 rng) : order_(n), rng_(std::move(rng)) {
    for (std::size_t i = 0; i < n; ++i) order_[i] = i;
  }

  void reshuffle() {
    std::shuffle(order_.begin(), order_.end(), rng_);
    pos_ = 0;
  }

  std::vector<std::size_t> take(std::size_t count) {
    std::vector<std::size_t> out;
    out.reserve(count);
    while (out.size() < count) {
      if (pos_ == order_.size()) reshuffle();
      out.push_back(order_[pos_++]);
    }
    return out;
  }

  const std::vector<std::size_t>& order() const { return order_; }

 private:
  std::vector<std::size_t> order_;
  std::mt19937_64 rng_;
  std::size_t pos_ = 0;
};

/// Classical momentum: v = mu v + g, w -= lr v.
class MomentumSgd {
 public:
  MomentumSgd(ScdnnModel& model, double learning_rate, double momentum)
      : lr_(learning_rate), mu_(momentum) {
    for (const auto& p : model.parameters()) {
      params_.push_back(p.tensor);
      velocity_.emplace_back(p.tensor->size(), 0.0);
    }
  }

  void set_learning_rate(double lr) { lr_ = lr; }

  /// `vars` must follow the parameter order; parameters without a
  /// gradient in `grads` receive a zero gradient.
  void step(const std::vector<ad::Var>& vars, const ad::GradientMap& grads) {
    for (std::size_t k = 0; k < params_.size(); ++k) {
      std::vector<double>& v = velocity_[k];
      double* w = params_[k]->data();
      if (grads.contains(vars[k])) {
        const auto g = grads.at(vars[k]).values();
        for (std::size_t i = 0; i < v.size(); ++i) {
          v[i] = mu_ * v[i] + g[i];
          w[i] -= lr_ * v[i];
        }
      } else {
        for (std::size_t i = 0; i < v.size(); ++i) {
          v[i] = mu_ * v[i];
          w[i] -= lr_ * v[i];
        }
      }
    }
  }

 private:
  double lr_, mu_;
  std::vector<Tensor*> params_;
  std::vector<std::vector<double>> velocity_;
};

inline void check_finite(double value, std::string_view what, std::size_t epoch,
                         std::size_t step) {
  if (!std::isfinite(value)) {
    throw DivergenceError("training diverged: " + std::string(what) + " = " +
                          std::to_string(value) + " at epoch " + std::to_string(epoch) +
                          ", step " + std::to_string(step));
  }
}

/// Concatenates row groups into one (N,1,20,32) tensor.
inline Tensor stack_rows(std::initializer_list<std::pair<const LabeledSet*,
                                                         const std::vector<std::size_t>*>>
                             parts) {
  std::size_t n = 0;
  for (const auto& [set, idx] : parts) n += idx ? idx->size() : set->size();
  std::vector<double> data;
  data.reserve(n * kSampleSize);
  for (const auto& [set, idx] : parts) {
    if (idx) {
      for (std::size_t i : *idx) {
        const auto r = set->row(i);
        data.insert(data.end(), r.begin(), r.end());
      }
    } else {
      const auto v = set->samples.values();
      data.insert(data.end(), v.begin(), v.end());
    }
  }
  return Tensor({n, kSampleChannels, kSampleHeight, kSampleWidth}, std::move(data));
}

inline std::vector<int> pick_labels(const LabeledSet& set,
                                    const std::vector<std::size_t>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(set.labels[i]);
  return out;
}

inline void check_labeled(std::string_view what, const LabeledSet& set) {
  if (set.labels.size() != set.size()) {
    throw ConfigError("train: " + std::string(what) + " needs one label per sample");
  }
}

}  // namespace detail

/// Joint training of the feature extractor, label classifier and domain
/// discriminator. Each step draws a source batch and an equal-size batch of
/// unlabeled target samples and minimizes
///   source NLL + domain BCE (through the GRL) + few-shot NLL + L2,
/// with the few-shot term over the whole labeled target set. Without
/// unlabeled target data the domain term is dropped; without labeled
/// target data the few-shot term is dropped.
inline TrainResult train_scdnn(const DataSplit& split, const TrainConfig& config,
                               const EpochCallback& on_epoch = {}) {
  config.validate();
  if (split.source_labeled.empty()) throw ConfigError("train: empty source split");
  detail::check_labeled("source set", split.source_labeled);
  detail::check_labeled("few-shot target set", split.target_labeled);

  TrainResult result{build_model(config.seed, config.architecture), {}};
  ScdnnModel& model = result.model;
  detail::MomentumSgd optimizer(model, config.learning_rate, config.momentum);

  const std::size_t n_source = split.source_labeled.size();
  const std::size_t steps = (n_source + config.batch_size - 1) / config.batch_size;
  const bool adapt = !split.target_unlabeled.empty();
  const bool few_shot = !split.target_labeled.empty();
  const bool test = config.evaluate_each_epoch && !split.target_test.empty();

  detail::Cursor source(n_source, detail::rng_stream(config.seed, detail::kSourceStream));
  detail::Cursor target(split.target_unlabeled.size(),
                        detail::rng_stream(config.seed, detail::kTargetStream));
  if (adapt) target.reshuffle();

  const std::vector<int> few_shot_labels = split.target_labeled.labels;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lambda = config.grl_schedule.at(
        static_cast<double>(epoch) / static_cast<double>(config.epochs));
    optimizer.set_learning_rate(config.learning_rate_at(epoch));
    source.reshuffle();
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.grl_lambda = lambda;
    std::size_t domain_correct = 0, domain_total = 0;

    for (std::size_t step = 0; step < steps; ++step) {
      const std::size_t begin = step * config.batch_size;
      const std::size_t b = std::min(config.batch_size, n_source - begin);
      const std::vector<std::size_t> src_idx(source.order().begin() + begin,
                                             source.order().begin() + begin + b);
      const std::vector<std::size_t> tgt_idx =
          adapt ? target.take(b) : std::vector<std::size_t>{};

      const Tensor batch = detail::stack_rows(
          {{&split.source_labeled, &src_idx},
           {&split.target_unlabeled, &tgt_idx},
           {&split.target_labeled, nullptr}});
      const std::vector<int> src_labels = detail::pick_labels(split.source_labeled, src_idx);

      ad::Tape tape;
      const BoundModel m = bind(tape, model);
      const ad::Var all = extract_features(m, tape.constant_ref(batch));
      const std::size_t total = batch.dim(0);

      ad::Var src_features = ad::slice_rows(all, 0, b);
      ad::Var loss = nn::nll_class_loss(classify_labels(m, src_features), src_labels);
      rec.source_label_loss += loss.value().item();
      detail::check_finite(loss.value().item(), "source label loss", epoch + 1, step + 1);

      if (adapt) {
        std::vector<int> domains(2 * b, static_cast<int>(DomainTag::kSource));
        std::fill(domains.begin() + static_cast<std::ptrdiff_t>(b), domains.end(),
                  static_cast<int>(DomainTag::kTarget));
        const ad::Var probs = discriminate_domain(m, ad::slice_rows(all, 0, 2 * b), lambda);
        const ad::Var d = nn::domain_bce_loss(probs, domains);
        detail::check_finite(d.value().item(), "domain loss", epoch + 1, step + 1);
        rec.domain_loss += d.value().item();
        for (std::size_t i = 0; i < 2 * b; ++i) {
          const double* p = probs.value().data() + 2 * i;
          const int guess = p[1] > p[0] ? 1 : 0;
          domain_correct += guess == domains[i];
        }
        domain_total += 2 * b;
        loss = ad::add(loss, d);
      }
      if (few_shot) {
        const ad::Var f = ad::slice_rows(all, adapt ? 2 * b : b, total - (adapt ? 2 * b : b));
        const ad::Var t = nn::nll_class_loss(classify_labels(m, f), few_shot_labels);
        detail::check_finite(t.value().item(), "target label loss", epoch + 1, step + 1);
        rec.target_label_loss += t.value().item();
        loss = ad::add(loss, t);
      }
      const std::vector<ad::Var> weights = m.regularized_weights();
      const ad::Var reg = nn::l2_regularizer(weights, config.l2);
      rec.regularizer += reg.value().item();
      loss = ad::add(loss, reg);
      detail::check_finite(loss.value().item(), "total loss", epoch + 1, step + 1);

      optimizer.step(m.all(), tape.backward(loss));
    }

    const double inv = 1.0 / static_cast<double>(steps);
    rec.source_label_loss *= inv;
    rec.target_label_loss *= inv;
    rec.domain_loss *= inv;
    rec.regularizer *= inv;
    rec.domain_accuracy = domain_total == 0 ? 0.0
                                            : static_cast<double>(domain_correct) /
                                                  static_cast<double>(domain_total);
    if (test) rec.test = summarize(evaluate(model, split.target_test));
    result.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

struct SweepRow {
  std::size_t count = 0;
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double seconds = 0;
};

namespace detail {

inline SweepRow sweep_row(std::size_t count, const DataSplit& split, const TrainConfig& config,
                          const std::function<void(const ScdnnModel&)>& on_model) {
  const auto start = std::chrono::steady_clock::now();
  TrainConfig quiet = config;
  quiet.evaluate_each_epoch = false;
  const TrainResult r = train_scdnn(split, quiet);
  const metrics::MetricsReport report = evaluate(r.model, split.target_test);
  if (on_model) on_model(r.model);
  const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
  return {count,
          report.accuracy,
          report.scores.macro_precision,
          report.scores.macro_recall,
          report.scores.macro_f1,
          took.count()};
}

}  // namespace detail

using ModelCallback = std::function<void(const ScdnnModel&)>;

/// Retrains with the first `count` unlabeled target samples for each count,
/// keeping `labeled_per_class` few-shot samples per class.
inline std::vector<SweepRow> sweep_unlabeled(std::span<const std::size_t> counts,
                                             const DataSplit& base, const TrainConfig& config,
                                             std::size_t labeled_per_class = 4,
                                             const ModelCallback& on_model = {}) {
  for (std::size_t c : counts) {
    if (c > base.target_unlabeled.size()) {
      throw ConfigError("sweep_unlabeled: count " + std::to_string(c) + " exceeds pool of " +
                        std::to_string(base.target_unlabeled.size()));
    }
  }
  std::vector<SweepRow> rows;
  for (std::size_t c : counts) {
    DataSplit split = base;
    std::vector<std::size_t> first(c);
    for (std::size_t i = 0; i < c; ++i) first[i] = i;
    split.target_unlabeled = gather(base.target_unlabeled, first);
    split.target_labeled = labeled_per_class == 0
                               ? LabeledSet{}
                               : select_per_class(base.target_labeled, labeled_per_class);
    rows.push_back(detail::sweep_row(c, split, config, on_model));
  }
  return rows;
}

/// Retrains with the first `count` few-shot samples of each class for each
/// count. The unlabeled pool stays fixed.
inline std::vector<SweepRow> sweep_labeled(std::span<const std::size_t> per_class_counts,
                                           const DataSplit& base, const TrainConfig& config,
                                           const ModelCallback& on_model = {}) {
  for (std::size_t c : per_class_counts) (void)select_per_class(base.target_labeled, c);
  std::vector<SweepRow> rows;
  for (std::size_t c : per_class_counts) {
    DataSplit split = base;
    split.target_labeled =
        c == 0 ? LabeledSet{} : select_per_class(base.target_labeled, c);
    rows.push_back(detail::sweep_row(c, split, config, on_model));
  }
  return rows;
}

}  // namespace scdnn

#endif  // SCDNN_TRAINER_HPP_
