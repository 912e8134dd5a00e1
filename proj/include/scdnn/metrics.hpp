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

#ifndef SCDNN_METRICS_HPP_
#define SCDNN_METRICS_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scdnn/activity.hpp"
#include "scdnn/tensor.hpp"

namespace scdnn::metrics {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = kNumActivities)
      : classes_(classes), counts_(classes * classes, 0) {}

  std::size_t classes() const { return classes_; }
  std::uint64_t& at(std::size_t truth, std::size_t predicted) {
    return counts_.at(truth * classes_ + predicted);
  }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const {
    return counts_.at(truth * classes_ + predicted);
  }

  std::uint64_t total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
  }
  std::uint64_t trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < classes_; ++i) t += at(i, i);
    return t;
  }
  std::uint64_t row_sum(std::size_t truth) const {
    std::uint64_t s = 0;
    for (std::size_t j = 0; j < classes_; ++j) s += at(truth, j);
    return s;
  }
  std::uint64_t col_sum(std::size_t predicted) const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < classes_; ++i) s += at(i, predicted);
    return s;
  }

  double accuracy() const {
    const std::uint64_t n = total();
    return n == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(n);
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
};

inline ConfusionMatrix confusion(std::span<const int> labels,
                                 std::span<const int> predictions,
                                 std::size_t classes = kNumActivities) {
  if (labels.size() != predictions.size()) {
    throw std::invalid_argument("confusion: " + std::to_string(labels.size()) +
                                " labels vs " + std::to_string(predictions.size()) +
                                " predictions");
  }
  if (labels.empty()) throw std::invalid_argument("confusion: no samples");
  ConfusionMatrix m(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || predictions[i] < 0 ||
        static_cast<std::size_t>(labels[i]) >= classes ||
        static_cast<std::size_t>(predictions[i]) >= classes) {
      throw std::out_of_range("confusion: class index out of range");
    }
    ++m.at(static_cast<std::size_t>(labels[i]), static_cast<std::size_t>(predictions[i]));
  }
  return m;
}

/// Per-class and macro-averaged precision, recall and F1. Undefined ratios
/// (zero denominators) are reported as 0 and listed in `notes`.
struct ClassScores {
  std::vector<double> precision, recall, f1;
  double macro_precision = 0, macro_recall = 0, macro_f1 = 0;
  std::vector<std::string> notes;
};

inline ClassScores prf1(const ConfusionMatrix& m) {
  const std::size_t k = m.classes();
  ClassScores s;
  s.precision.assign(k, 0.0);
  s.recall.assign(k, 0.0);
  s.f1.assign(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    const double tp = static_cast<double>(m.at(c, c));
    const std::uint64_t predicted = m.col_sum(c);
    const std::uint64_t actual = m.row_sum(c);
    if (predicted == 0) {
      s.notes.push_back("precision undefined for class " + std::to_string(c) +
                        " (never predicted); reported as 0");
    } else {
      s.precision[c] = tp / static_cast<double>(predicted);
    }
    if (actual == 0) {
      s.notes.push_back("recall undefined for class " + std::to_string(c) +
                        " (absent from labels); reported as 0");
    } else {
      s.recall[c] = tp / static_cast<double>(actual);
    }
    const double denom = s.precision[c] + s.recall[c];
    s.f1[c] = denom > 0 ? 2.0 * s.precision[c] * s.recall[c] / denom : 0.0;
  }
  const double inv = 1.0 / static_cast<double>(k);
  for (std::size_t c = 0; c < k; ++c) {
    s.macro_precision += s.precision[c] * inv;
    s.macro_recall += s.recall[c] * inv;
    s.macro_f1 += s.f1[c] * inv;
  }
  return s;
}

struct CurvePoint {
  double x = 0, y = 0;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// (false positive rate, true positive rate) points from (0,0) to (1,1).
struct RocCurve {
  std::vector<CurvePoint> points;
  double auc = 0;
};

/// (recall, precision) points, one per distinct threshold.
struct PrCurve {
  std::vector<CurvePoint> points;
  double average_precision = 0;
};

namespace detail {

// Cumulative (tp, fp) after admitting every score >= each distinct
// threshold, thresholds in decreasing order.
inline std::vector<std::pair<std::uint64_t, std::uint64_t>> threshold_counts(
    std::span<const double> scores, std::span<const std::uint8_t> positive) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (positive[order[i]]) ++tp; else ++fp;
    if (i + 1 == order.size() || scores[order[i + 1]] != scores[order[i]]) {
      out.emplace_back(tp, fp);
    }
  }
  return out;
}

inline void check_binary_inputs(std::string_view op, std::span<const double> scores,
                                std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) {
    throw std::invalid_argument(std::string(op) + ": scores and labels differ in length");
  }
}

}  // namespace detail

/// One-vs-rest ROC over every distinct score threshold, trapezoidal area.
/// Empty when either class is absent.
inline std::optional<RocCurve> roc_curve(std::span<const double> scores,
                                         std::span<const std::uint8_t> positive) {
  detail::check_binary_inputs("roc_curve", scores, positive);
  const auto pos = static_cast<std::uint64_t>(
      std::count_if(positive.begin(), positive.end(), [](auto p) { return p != 0; }));
  const std::uint64_t neg = positive.size() - pos;
  if (pos == 0 || neg == 0) return std::nullopt;
  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  for (const auto& [tp, fp] : detail::threshold_counts(scores, positive)) {
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos)});
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const CurvePoint& a = curve.points[i - 1];
    const CurvePoint& b = curve.points[i];
    curve.auc += (b.x - a.x) * (a.y + b.y) / 2.0;
  }
  return curve;
}

/// Precision-recall curve with step-interpolated average precision
/// sum_k (R_k - R_{k-1}) P_k. Empty when there are no positives.
inline std::optional<PrCurve> pr_curve(std::span<const double> scores,
                                       std::span<const std::uint8_t> positive) {
  detail::check_binary_inputs("pr_curve", scores, positive);
  const auto pos = static_cast<std::uint64_t>(
      std::count_if(positive.begin(), positive.end(), [](auto p) { return p != 0; }));
  if (pos == 0) return std::nullopt;
  PrCurve curve;
  double prev_recall = 0.0;
  for (const auto& [tp, fp] : detail::threshold_counts(scores, positive)) {
    const double recall = static_cast<double>(tp) / static_cast<double>(pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    curve.points.push_back({recall, precision});
    curve.average_precision += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return curve;
}

namespace detail {

inline void check_scores(std::string_view op, const Tensor& scores,
                         std::span<const int> labels) {
  if (scores.rank() != 2 || scores.dim(0) != labels.size()) {
    throw ShapeError(std::string(op) + ": expected (N,K) scores for " +
                     std::to_string(labels.size()) + " labels, got " +
                     to_string(scores.shape()));
  }
}

inline std::pair<std::vector<double>, std::vector<std::uint8_t>> one_vs_rest(
    const Tensor& scores, std::span<const int> labels, std::size_t cls) {
  const std::size_t n = scores.dim(0), k = scores.dim(1);
  std::vector<double> s(n);
  std::vector<std::uint8_t> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = scores[i * k + cls];
    p[i] = static_cast<std::size_t>(labels[i]) == cls;
  }
  return {std::move(s), std::move(p)};
}

inline std::pair<std::vector<double>, std::vector<std::uint8_t>> pooled(
    const Tensor& scores, std::span<const int> labels) {
  const std::size_t n = scores.dim(0), k = scores.dim(1);
  std::vector<double> s(scores.values().begin(), scores.values().end());
  std::vector<std::uint8_t> p(n * k, 0);
  for (std::size_t i = 0; i < n; ++i) p[i * k + static_cast<std::size_t>(labels[i])] = 1;
  return {std::move(s), std::move(p)};
}

}  // namespace detail

struct RocReport {
  std::vector<std::optional<RocCurve>> per_class;
  std::optional<RocCurve> micro;
};

struct PrReport {
  std::vector<std::optional<PrCurve>> per_class;
  std::optional<PrCurve> micro;
};

/// Per-class one-vs-rest ROC curves plus the micro average over all
/// (sample, class) decisions. `scores` is (N, K).
inline RocReport roc_auc(const Tensor& scores, std::span<const int> labels) {
  detail::check_scores("roc_auc", scores, labels);
  RocReport r;
  for (std::size_t c = 0; c < scores.dim(1); ++c) {
    const auto [s, p] = detail::one_vs_rest(scores, labels, c);
    r.per_class.push_back(roc_curve(s, p));
  }
  const auto [s, p] = detail::pooled(scores, labels);
  r.micro = roc_curve(s, p);
  return r;
}

inline PrReport pr_ap(const Tensor& scores, std::span<const int> labels) {
  detail::check_scores("pr_ap", scores, labels);
  PrReport r;
  for (std::size_t c = 0; c < scores.dim(1); ++c) {
    const auto [s, p] = detail::one_vs_rest(scores, labels, c);
    r.per_class.push_back(pr_curve(s, p));
  }
  const auto [s, p] = detail::pooled(scores, labels);
  r.micro = pr_curve(s, p);
  return r;
}

/// Everything reported for one evaluation pass.
struct MetricsReport {
  ConfusionMatrix confusion{kNumActivities};
  double accuracy = 0;
  ClassScores scores;
  RocReport roc;
  PrReport pr;
};

/// Builds a report from (N, 8) class probabilities and true labels;
/// predictions are the per-row argmax with ties to the lowest index.
inline MetricsReport make_report(const Tensor& probabilities,
                                 std::span<const int> labels) {
  detail::check_scores("make_report", probabilities, labels);
  const std::size_t n = probabilities.dim(0), k = probabilities.dim(1);
  std::vector<int> predicted(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = probabilities.data() + i * k;
    predicted[i] = static_cast<int>(std::max_element(row, row + k) - row);
  }
  MetricsReport r;
  r.confusion = confusion(labels, predicted, k);
  r.accuracy = r.confusion.accuracy();
  r.scores = prf1(r.confusion);
  r.roc = roc_auc(probabilities, labels);
  r.pr = pr_ap(probabilities, labels);
  return r;
}

}  // namespace scdnn::metrics

#endif  // SCDNN_METRICS_HPP_
