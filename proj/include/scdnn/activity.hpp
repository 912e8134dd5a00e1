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

#ifndef SCDNN_ACTIVITY_HPP_
#define SCDNN_ACTIVITY_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace scdnn {

/// The eight recognized activities. The integer encoding is persisted in
/// checkpoints and dataset files and must never be reordered.
enum class ActivityLabel : int {
  kLying = 0,
  kSquatting = 1,
  kSitting = 2,
  kStanding = 3,
  kWaving = 4,
  kWalking = 5,
  kStooping = 6,
  kEmpty = 7,
};

inline constexpr std::size_t kNumActivities = 8;

inline constexpr std::array<std::string_view, kNumActivities> kActivityNames = {
    "lying", "squatting", "sitting", "standing",
    "waving", "walking", "stooping", "empty"};

inline constexpr std::array<ActivityLabel, kNumActivities> kAllActivities = {
    ActivityLabel::kLying,    ActivityLabel::kSquatting, ActivityLabel::kSitting,
    ActivityLabel::kStanding, ActivityLabel::kWaving,    ActivityLabel::kWalking,
    ActivityLabel::kStooping, ActivityLabel::kEmpty};

inline constexpr int index_of(ActivityLabel label) { return static_cast<int>(label); }

inline ActivityLabel activity_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kNumActivities)) {
    throw std::out_of_range("activity index " + std::to_string(index) +
                            " outside 0..7");
  }
  return static_cast<ActivityLabel>(index);
}

inline std::string_view name_of(ActivityLabel label) {
  return kActivityNames[static_cast<std::size_t>(label)];
}

inline std::optional<ActivityLabel> activity_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumActivities; ++i) {
    if (kActivityNames[i] == name) return static_cast<ActivityLabel>(i);
  }
  return std::nullopt;
}

/// Layout of one network input sample.
inline constexpr std::size_t kSampleChannels = 1;
inline constexpr std::size_t kSampleHeight = 20;
inline constexpr std::size_t kSampleWidth = 32;
inline constexpr std::size_t kSampleSize = kSampleHeight * kSampleWidth;

inline constexpr std::size_t kNumDomains = 2;

/// Which environment a sample was recorded in.
enum class DomainTag : int { kSource = 0, kTarget = 1 };

inline std::string_view name_of(DomainTag tag) {
  return tag == DomainTag::kSource ? "source" : "target";
}

}  // namespace scdnn

#endif  // SCDNN_ACTIVITY_HPP_
