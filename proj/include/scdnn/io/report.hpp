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

#ifndef SCDNN_IO_REPORT_HPP_
#define SCDNN_IO_REPORT_HPP_

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scdnn/activity.hpp"
#include "scdnn/baselines.hpp"
#include "scdnn/io/text.hpp"
#include "scdnn/metrics.hpp"
#include "scdnn/trainer.hpp"

namespace scdnn::io {

namespace detail {

inline std::ofstream open_text(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

inline std::string optional_number(const std::optional<double>& v) {
  return v ? format_number(*v) : "";
}

inline std::string class_name(std::size_t c) {
  return std::string(name_of(activity_from_index(static_cast<int>(c))));
}

}  // namespace detail

inline void write_confusion_csv(std::ostream& out, const metrics::ConfusionMatrix& m) {
  out << "true\\predicted";
  for (std::size_t c = 0; c < m.classes(); ++c) out << ',' << detail::class_name(c);
  out << '\n';
  for (std::size_t r = 0; r < m.classes(); ++r) {
    out << detail::class_name(r);
    for (std::size_t c = 0; c < m.classes(); ++c) out << ',' << m.at(r, c);
    out << '\n';
  }
}

inline void write_curve_csv(std::ostream& out, const std::vector<metrics::CurvePoint>& points,
                            std::string_view x, std::string_view y) {
  out << x << ',' << y << '\n';
  for (const auto& p : points) out << format_number(p.x) << ',' << format_number(p.y) << '\n';
}

/// Writes confusion.csv, summary.csv, notes.txt and one ROC and PR curve
/// file per class (plus micro) into `dir`.
inline void write_report(const std::filesystem::path& dir, const metrics::MetricsReport& r) {
  std::filesystem::create_directories(dir);
  {
    auto out = detail::open_text(dir / "confusion.csv");
    write_confusion_csv(out, r.confusion);
  }
  {
    auto out = detail::open_text(dir / "summary.csv");
    out << "class,precision,recall,f1,auc,ap\n";
    for (std::size_t c = 0; c < r.confusion.classes(); ++c) {
      std::optional<double> auc, ap;
      if (r.roc.per_class[c]) auc = r.roc.per_class[c]->auc;
      if (r.pr.per_class[c]) ap = r.pr.per_class[c]->average_precision;
      out << detail::class_name(c) << ',' << format_number(r.scores.precision[c]) << ','
          << format_number(r.scores.recall[c]) << ',' << format_number(r.scores.f1[c]) << ','
          << detail::optional_number(auc) << ',' << detail::optional_number(ap) << '\n';
    }
    out << "macro," << format_number(r.scores.macro_precision) << ','
        << format_number(r.scores.macro_recall) << ',' << format_number(r.scores.macro_f1)
        << ",,\n";
    std::optional<double> auc, ap;
    if (r.roc.micro) auc = r.roc.micro->auc;
    if (r.pr.micro) ap = r.pr.micro->average_precision;
    out << "micro,,,," << detail::optional_number(auc) << ',' << detail::optional_number(ap)
        << '\n';
    out << "accuracy," << format_number(r.accuracy) << ",,,,\n";
  }
  {
    auto out = detail::open_text(dir / "notes.txt");
    for (const auto& n : r.scores.notes) out << n << '\n';
  }
  auto curves = [&](const std::string& label, const std::optional<metrics::RocCurve>& roc,
                    const std::optional<metrics::PrCurve>& pr) {
    if (roc) {
      auto out = detail::open_text(dir / ("roc_" + label + ".csv"));
      write_curve_csv(out, roc->points, "fpr", "tpr");
    }
    if (pr) {
      auto out = detail::open_text(dir / ("pr_" + label + ".csv"));
      write_curve_csv(out, pr->points, "recall", "precision");
    }
  };
  for (std::size_t c = 0; c < r.confusion.classes(); ++c) {
    curves(detail::class_name(c), r.roc.per_class[c], r.pr.per_class[c]);
  }
  curves("micro", r.roc.micro, r.pr.micro);
}

/// One JSON object per line for every epoch record.
inline nlohmann::ordered_json epoch_json(const EpochRecord& rec) {
  nlohmann::ordered_json j;
  j["epoch"] = rec.epoch;
  j["grl_lambda"] = rec.grl_lambda;
  j["source_label_loss"] = rec.source_label_loss;
  j["target_label_loss"] = rec.target_label_loss;
  j["domain_loss"] = rec.domain_loss;
  j["domain_accuracy"] = rec.domain_accuracy;
  j["regularizer"] = rec.regularizer;
  if (rec.test) {
    j["test"] = {{"accuracy", rec.test->accuracy},
                 {"macro_precision", rec.test->macro_precision},
                 {"macro_recall", rec.test->macro_recall},
                 {"macro_f1", rec.test->macro_f1}};
  } else {
    j["test"] = nullptr;
  }
  return j;
}

inline void write_trainlog(std::ostream& out, const TrainingHistory& history) {
  for (const auto& rec : history.epochs) out << epoch_json(rec).dump() << '\n';
}

inline void write_sweep_csv(std::ostream& out, std::string_view count_column,
                            const std::vector<SweepRow>& rows) {
  out << count_column << ",accuracy,precision,recall,f1\n";
  for (const auto& r : rows) {
    out << r.count << ',' << format_number(r.accuracy) << ',' << format_number(r.precision)
        << ',' << format_number(r.recall) << ',' << format_number(r.f1) << '\n';
  }
}

inline void write_comparison_csv(std::ostream& out, const std::vector<MethodResult>& rows) {
  out << "method,accuracy,precision,recall,f1,micro_auc\n";
  for (const auto& r : rows) {
    out << r.method << ',' << format_number(r.report.accuracy) << ','
        << format_number(r.report.scores.macro_precision) << ','
        << format_number(r.report.scores.macro_recall) << ','
        << format_number(r.report.scores.macro_f1) << ','
        << (r.report.roc.micro ? format_number(r.report.roc.micro->auc) : "") << '\n';
  }
}

}  // namespace scdnn::io

#endif  // SCDNN_IO_REPORT_HPP_
