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

#ifndef SCDNN_IO_DATASET_HPP_
#define SCDNN_IO_DATASET_HPP_

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scdnn/activity.hpp"
#include "scdnn/io/binary.hpp"
#include "scdnn/preprocess.hpp"
#include "scdnn/synthgen.hpp"

namespace scdnn::io {

inline constexpr char kDatasetMagic[8] = {'S', 'C', 'D', 'N', 'N', 'D', 'S', '\0'};
inline constexpr std::uint32_t kDatasetVersion = 1;

struct LabeledFrame {
  RawFrame frame;
  std::optional<ActivityLabel> label;

  friend bool operator==(const LabeledFrame&, const LabeledFrame&) = default;
};

/// Either raw frames (as captured or generated) or preprocessed samples.
struct Dataset {
  enum class Kind : std::uint8_t { kFrames = 1, kSamples = 2 };

  Kind kind = Kind::kSamples;
  double frame_rate_hz = kDefaultFrameRateHz;
  std::string domain_name = "source";
  DomainTag domain = DomainTag::kSource;
  std::vector<std::string> label_table{kActivityNames.begin(), kActivityNames.end()};
  std::vector<LabeledFrame> frames;
  std::vector<SampleTensor> samples;

  std::size_t record_count() const {
    return kind == Kind::kFrames ? frames.size() : samples.size();
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

namespace detail {

inline std::int32_t encode_label(const std::optional<ActivityLabel>& label) {
  return label ? index_of(*label) : -1;
}

inline std::optional<ActivityLabel> decode_label(std::int32_t v, const std::string& ctx) {
  if (v == -1) return std::nullopt;
  if (v < 0 || v >= static_cast<std::int32_t>(kNumActivities)) {
    throw FormatError(ctx + ": label index " + std::to_string(v) + " out of range");
  }
  return activity_from_index(v);
}

inline DomainTag decode_domain(std::uint8_t v, const std::string& ctx) {
  if (v > 1) throw FormatError(ctx + ": domain tag " + std::to_string(v) + " invalid");
  return static_cast<DomainTag>(v);
}

}  // namespace detail

inline void write_dataset(std::ostream& out, const Dataset& ds) {
  Writer w(out);
  w.put_bytes({kDatasetMagic, sizeof kDatasetMagic});
  w.put(kDatasetVersion);
  w.put(static_cast<std::uint8_t>(ds.kind));
  w.put(ds.frame_rate_hz);
  w.put_string(ds.domain_name);
  w.put(static_cast<std::uint8_t>(ds.domain));
  w.put(static_cast<std::uint32_t>(ds.label_table.size()));
  for (const auto& name : ds.label_table) w.put_string(name);
  w.put(static_cast<std::uint64_t>(ds.record_count()));
  if (ds.kind == Dataset::Kind::kFrames) {
    for (const LabeledFrame& f : ds.frames) {
      w.put(f.frame.timestamp_ms);
      w.put(detail::encode_label(f.label));
      w.put_array(std::span<const float>(f.frame.temperatures));
    }
  } else {
    for (const SampleTensor& s : ds.samples) {
      w.put(detail::encode_label(s.label));
      w.put(static_cast<std::uint8_t>(s.domain));
      w.put_array(std::span<const std::uint64_t>(s.source_frames));
      w.put_array(std::span<const double>(s.values));
    }
  }
  w.check("write_dataset");
}

inline Dataset read_dataset(std::istream& in, const std::string& context = "dataset") {
  Reader r(in, context);
  const std::string magic = r.get_bytes(sizeof kDatasetMagic, "magic");
  if (magic != std::string_view(kDatasetMagic, sizeof kDatasetMagic)) {
    throw FormatError(context + ": not a dataset file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kDatasetVersion) {
    throw FormatError(context + ": unsupported version " + std::to_string(version));
  }
  Dataset ds;
  const auto kind = r.get<std::uint8_t>("record kind");
  if (kind != 1 && kind != 2) {
    throw FormatError(context + ": unknown record kind " + std::to_string(kind));
  }
  ds.kind = static_cast<Dataset::Kind>(kind);
  ds.frame_rate_hz = r.get<double>("frame rate");
  ds.domain_name = r.get_string("domain name");
  ds.domain = detail::decode_domain(r.get<std::uint8_t>("domain tag"), context);
  const auto labels = r.get<std::uint32_t>("label count");
  ds.label_table.clear();
  for (std::uint32_t i = 0; i < labels; ++i) ds.label_table.push_back(r.get_string("label"));
  if (ds.label_table != std::vector<std::string>(kActivityNames.begin(), kActivityNames.end())) {
    throw FormatError(context + ": activity label table differs from this build's");
  }
  const auto count = r.get<std::uint64_t>("record count");
  if (ds.kind == Dataset::Kind::kFrames) {
    ds.frames.resize(count);
    for (LabeledFrame& f : ds.frames) {
      f.frame.timestamp_ms = r.get<std::uint64_t>("frame timestamp");
      f.label = detail::decode_label(r.get<std::int32_t>("frame label"), context);
      r.get_array(std::span<float>(f.frame.temperatures), "frame values");
    }
  } else {
    ds.samples.resize(count);
    for (SampleTensor& s : ds.samples) {
      s.label = detail::decode_label(r.get<std::int32_t>("sample label"), context);
      s.domain = detail::decode_domain(r.get<std::uint8_t>("sample domain"), context);
      r.get_array(std::span<std::uint64_t>(s.source_frames), "sample frame stamps");
      r.get_array(std::span<double>(s.values), "sample values");
    }
  }
  r.expect_end();
  return ds;
}

/// JSON summary written next to a dataset: header fields, per-label counts
/// and a content hash.
inline nlohmann::ordered_json dataset_summary(const Dataset& ds) {
  nlohmann::ordered_json j;
  j["kind"] = ds.kind == Dataset::Kind::kFrames ? "frames" : "samples";
  j["version"] = kDatasetVersion;
  j["frame_rate_hz"] = ds.frame_rate_hz;
  j["domain"] = ds.domain_name;
  j["domain_tag"] = static_cast<int>(ds.domain);
  j["labels"] = ds.label_table;
  j["records"] = ds.record_count();
  std::array<std::size_t, kNumActivities + 1> counts{};
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto tally = [&counts](const std::optional<ActivityLabel>& l) {
    ++counts[l ? static_cast<std::size_t>(index_of(*l)) : kNumActivities];
  };
  if (ds.kind == Dataset::Kind::kFrames) {
    for (const auto& f : ds.frames) {
      tally(f.label);
      hash = fnv1a_values(std::span<const float>(f.frame.temperatures), hash);
    }
  } else {
    for (const auto& s : ds.samples) {
      tally(s.label);
      hash = fnv1a_values(std::span<const double>(s.values), hash);
    }
  }
  nlohmann::ordered_json per_label;
  for (std::size_t c = 0; c < kNumActivities; ++c) per_label[ds.label_table[c]] = counts[c];
  per_label["unlabeled"] = counts[kNumActivities];
  j["per_label"] = per_label;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  j["fnv1a64"] = buf;
  return j;
}

/// Writes `path` and its `path.json` summary twin.
inline void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_dataset(out, ds);
  std::ofstream twin(path.string() + ".json");
  twin << dataset_summary(ds).dump(2) << '\n';
  if (!twin) throw std::runtime_error("cannot write " + path.string() + ".json");
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset(in, path.string());
}

/// Frame dataset holding the generated streams back to back.
inline Dataset dataset_from_streams(const std::vector<LabeledStream>& streams,
                                    const DomainSpec& domain,
                                    double frame_rate_hz = kDefaultFrameRateHz) {
  Dataset ds;
  ds.kind = Dataset::Kind::kFrames;
  ds.frame_rate_hz = frame_rate_hz;
  ds.domain_name = domain.name;
  ds.domain = domain.tag;
  for (const LabeledStream& s : streams) {
    for (const RawFrame& f : s.frames) ds.frames.push_back({f, s.label});
  }
  return ds;
}

/// Splits a frame dataset into streams at every label change.
inline std::vector<LabeledStream> streams_from_dataset(const Dataset& ds) {
  if (ds.kind != Dataset::Kind::kFrames) {
    throw std::invalid_argument("streams_from_dataset: dataset holds samples, not frames");
  }
  std::vector<LabeledStream> out;
  std::optional<std::optional<ActivityLabel>> current;
  for (const LabeledFrame& f : ds.frames) {
    if (!current || *current != f.label) {
      LabeledStream s;
      s.label = f.label.value_or(ActivityLabel::kEmpty);
      s.domain = ds.domain;
      out.push_back(std::move(s));
      current = f.label;
    }
    out.back().frames.push_back(f.frame);
  }
  return out;
}

/// Preprocesses a frame dataset into a sample dataset. Unlabeled frames
/// yield unlabeled samples.
inline Dataset preprocess_dataset(const Dataset& frames, const FilterSpec& spec = {}) {
  Dataset out = frames;
  out.kind = Dataset::Kind::kSamples;
  out.frames.clear();
  std::optional<std::optional<ActivityLabel>> current;
  std::vector<RawFrame> run;
  auto flush = [&] {
    if (run.empty()) return;
    auto samples = preprocess_stream(run, spec, kFramesPerSample, *current, frames.domain);
    out.samples.insert(out.samples.end(), samples.begin(), samples.end());
    run.clear();
  };
  for (const LabeledFrame& f : frames.frames) {
    if (current && *current != f.label) flush();
    current = f.label;
    run.push_back(f.frame);
  }
  flush();
  return out;
}

}  // namespace scdnn::io

#endif  // SCDNN_IO_DATASET_HPP_
