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

#ifndef SCDNN_IO_CHECKPOINT_HPP_
#define SCDNN_IO_CHECKPOINT_HPP_

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scdnn/activity.hpp"
#include "scdnn/io/binary.hpp"
#include "scdnn/model.hpp"

namespace scdnn::io {

inline constexpr char kCheckpointMagic[8] = {'S', 'C', 'D', 'N', 'N', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Free-form training metadata stored alongside the parameters.
using Metadata = std::map<std::string, std::string>;

struct Checkpoint {
  ScdnnModel model;
  Metadata metadata;
};

// Layout: magic, version, five u64 architecture widths, u64 seed, class
// table, metadata pairs, then for each parameter its name, rank, dims and
// f64 values.
inline void write_checkpoint(std::ostream& out, const ScdnnModel& model,
                             const Metadata& metadata = {}) {
  Writer w(out);
  w.put_bytes({kCheckpointMagic, sizeof kCheckpointMagic});
  w.put(kCheckpointVersion);
  const Architecture& a = model.architecture;
  for (std::size_t v : {a.conv1_channels, a.conv2_channels, a.label_hidden1, a.label_hidden2,
                        a.domain_hidden}) {
    w.put(static_cast<std::uint64_t>(v));
  }
  w.put(model.seed);
  w.put(static_cast<std::uint32_t>(kNumActivities));
  for (std::string_view name : kActivityNames) w.put_string(name);
  w.put(static_cast<std::uint32_t>(metadata.size()));
  for (const auto& [k, v] : metadata) {
    w.put_string(k);
    w.put_string(v);
  }
  const auto params = model.parameters();
  w.put(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.put_string(p.name);
    w.put(static_cast<std::uint32_t>(p.tensor->rank()));
    for (std::size_t d : p.tensor->shape()) w.put(static_cast<std::uint64_t>(d));
    w.put_array(p.tensor->values());
  }
  w.check("write_checkpoint");
}

inline Checkpoint read_checkpoint(std::istream& in, const std::string& context = "checkpoint") {
  Reader r(in, context);
  if (r.get_bytes(sizeof kCheckpointMagic, "magic") !=
      std::string_view(kCheckpointMagic, sizeof kCheckpointMagic)) {
    throw FormatError(context + ": not a checkpoint (bad magic)");
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError(context + ": unsupported version " + std::to_string(version));
  }
  Architecture a;
  a.conv1_channels = r.get<std::uint64_t>("architecture");
  a.conv2_channels = r.get<std::uint64_t>("architecture");
  a.label_hidden1 = r.get<std::uint64_t>("architecture");
  a.label_hidden2 = r.get<std::uint64_t>("architecture");
  a.domain_hidden = r.get<std::uint64_t>("architecture");
  if (a.conv1_channels == 0 || a.conv2_channels == 0 || a.label_hidden1 == 0 ||
      a.label_hidden2 == 0 || a.domain_hidden == 0 || a.conv1_channels > 1u << 16 ||
      a.conv2_channels > 1u << 16 || a.label_hidden1 > 1u << 20 ||
      a.label_hidden2 > 1u << 20 || a.domain_hidden > 1u << 20) {
    throw FormatError(context + ": implausible architecture");
  }
  Checkpoint ck{ScdnnModel(a), {}};
  ck.model.seed = r.get<std::uint64_t>("seed");
  const auto classes = r.get<std::uint32_t>("class count");
  if (classes != kNumActivities) {
    throw FormatError(context + ": " + std::to_string(classes) + " classes, expected 8");
  }
  for (std::string_view expected : kActivityNames) {
    const std::string name = r.get_string("class name");
    if (name != expected) {
      throw FormatError(context + ": class encoding differs (found '" + name +
                        "', expected '" + std::string(expected) + "')");
    }
  }
  const auto meta = r.get<std::uint32_t>("metadata count");
  for (std::uint32_t i = 0; i < meta; ++i) {
    std::string k = r.get_string("metadata key");
    ck.metadata[k] = r.get_string("metadata value");
  }
  auto params = ck.model.parameters();
  const auto count = r.get<std::uint32_t>("parameter count");
  if (count != params.size()) {
    throw FormatError(context + ": " + std::to_string(count) + " parameter tensors, expected " +
                      std::to_string(params.size()));
  }
  for (auto& p : params) {
    const std::string name = r.get_string("parameter name");
    if (name != p.name) {
      throw FormatError(context + ": parameter '" + name + "' where '" + std::string(p.name) +
                        "' was expected");
    }
    const auto rank = r.get<std::uint32_t>("rank");
    Shape shape;
    for (std::uint32_t d = 0; d < rank && d < 8; ++d) {
      shape.push_back(r.get<std::uint64_t>("dimension"));
    }
    if (shape != p.tensor->shape()) {
      throw FormatError(context + ": " + name + " has shape " + to_string(shape) +
                        ", architecture requires " + to_string(p.tensor->shape()));
    }
    r.get_array(std::span<double>(p.tensor->data(), p.tensor->size()), name);
  }
  r.expect_end();
  return ck;
}

/// Human-readable twin: architecture, metadata and per-tensor fingerprints.
inline nlohmann::ordered_json checkpoint_summary(const ScdnnModel& model,
                                                 const Metadata& metadata) {
  nlohmann::ordered_json j;
  j["version"] = kCheckpointVersion;
  const Architecture& a = model.architecture;
  j["architecture"] = {{"conv1_channels", a.conv1_channels},
                       {"conv2_channels", a.conv2_channels},
                       {"label_hidden1", a.label_hidden1},
                       {"label_hidden2", a.label_hidden2},
                       {"domain_hidden", a.domain_hidden},
                       {"feature_length", a.feature_length()}};
  j["seed"] = model.seed;
  j["classes"] = std::vector<std::string>(kActivityNames.begin(), kActivityNames.end());
  j["metadata"] = metadata;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  for (const auto& p : model.parameters()) {
    double sum = 0, sq = 0;
    for (double v : p.tensor->values()) {
      sum += v;
      sq += v * v;
    }
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a_values(p.tensor->values())));
    tensors.push_back({{"name", p.name},
                       {"shape", p.tensor->shape()},
                       {"sum", sum},
                       {"sum_of_squares", sq},
                       {"fnv1a64", hash}});
  }
  j["tensors"] = tensors;
  return j;
}

inline void save_checkpoint(const std::filesystem::path& path, const ScdnnModel& model,
                            const Metadata& metadata = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_checkpoint(out, model, metadata);
  std::ofstream twin(path.string() + ".json");
  twin << checkpoint_summary(model, metadata).dump(2) << '\n';
  if (!twin) throw std::runtime_error("cannot write " + path.string() + ".json");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_checkpoint(in, path.string());
}

}  // namespace scdnn::io

#endif  // SCDNN_IO_CHECKPOINT_HPP_
