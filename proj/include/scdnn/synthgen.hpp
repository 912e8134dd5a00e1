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

// Synthetic 8x8 thermal scenes for the eight activities.
//
// A person is modelled as one or two anisotropic Gaussian heat blobs on top
// of a uniform ambient floor, observed through a ceiling-mounted 60 degree
// field of view. Geometry is specified in metres and converted to grid cells
// through the sensor height, so two rooms with different mounting heights see
// the same activity at different apparent sizes. The blob contrast scales
// with the gap between apparent body temperature and ambient, so a warmer
// room yields fainter people.

#ifndef SCDNN_SYNTHGEN_HPP_
#define SCDNN_SYNTHGEN_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "scdnn/activity.hpp"
#include "scdnn/preprocess.hpp"

namespace scdnn {

/// Apparent surface temperature of a clothed person seen from the ceiling.
inline constexpr double kApparentBodyCelsius = 30.0;
inline constexpr double kFieldOfViewRad = std::numbers::pi / 3.0;

/// Recording environment.
struct DomainSpec {
  std::string name = "source";
  DomainTag tag = DomainTag::kSource;
  double room_length_m = 3.3;
  double room_width_m = 2.0;
  double sensor_height_m = 3.0;
  double ambient_celsius = 20.0;
  double noise_std_celsius = 0.15;
  double blob_gain = 1.0;  // emissivity and clothing factor

  static DomainSpec source() { return {}; }

  static DomainSpec target() {
    DomainSpec d;
    d.name = "target";
    d.tag = DomainTag::kTarget;
    d.room_length_m = 3.5;
    d.room_width_m = 3.3;
    d.sensor_height_m = 2.6;
    d.ambient_celsius = 23.0;
    d.blob_gain = 0.8;
    return d;
  }

  /// Floor distance covered by one grid cell directly below the sensor.
  double cell_pitch_m() const {
    return 2.0 * sensor_height_m * std::tan(kFieldOfViewRad / 2.0) /
           static_cast<double>(kGridSize);
  }

  /// Peak temperature rise of a blob with unit relative intensity.
  double contrast_celsius() const {
    return blob_gain * (kApparentBodyCelsius - ambient_celsius);
  }

  void validate() const {
    if (!(room_length_m > 0 && room_width_m > 0 && sensor_height_m > 0)) {
      throw std::invalid_argument("domain " + name + ": dimensions must be positive");
    }
    if (ambient_celsius < kSensorMinCelsius || ambient_celsius > kSensorMaxCelsius) {
      throw std::invalid_argument("domain " + name + ": ambient outside sensor range");
    }
    if (noise_std_celsius < 0 || blob_gain < 0) {
      throw std::invalid_argument("domain " + name + ": negative noise or gain");
    }
  }
};

enum class MotionPattern { kStatic, kOscillating, kTranslating };

/// One activity instance as seen by the sensor, in grid-cell units.
struct ActivityModel {
  ActivityLabel activity = ActivityLabel::kEmpty;
  int blob_count = 0;
  double blob_sigma = 1.0;        // cells, across the heading
  double elongation = 1.0;        // sigma along heading / sigma across
  double blob_peak_delta_celsius = 0.0;
  MotionPattern motion_pattern = MotionPattern::kStatic;
  double motion_rate_hz = 0.0;    // oscillation frequency
  double motion_amplitude = 0.0;  // cells (oscillation) or cells/s (walking)
  // Secondary blob (raised arm) for oscillating motion.
  double arm_sigma = 0.0;
  double arm_peak_delta_celsius = 0.0;
  // Placement.
  double row = 3.5, col = 3.5;
  double heading_rad = 0.0;
};

namespace detail {

// Relative blob geometry per activity, in metres at the reference contrast.
struct Signature {
  double sigma_m;
  double elongation;
  double intensity;
  MotionPattern motion;
};

inline const std::array<Signature, kNumActivities>& signatures() {
  static const std::array<Signature, kNumActivities> table = {{
      {0.30, 3.2, 0.55, MotionPattern::kStatic},       // lying
      {0.28, 1.0, 0.85, MotionPattern::kStatic},       // squatting
      {0.30, 1.5, 0.75, MotionPattern::kStatic},       // sitting
      {0.15, 1.0, 1.00, MotionPattern::kStatic},       // standing
      {0.15, 1.0, 1.00, MotionPattern::kOscillating},  // waving
      {0.14, 2.6, 1.00, MotionPattern::kTranslating},  // walking
      {0.38, 1.5, 0.65, MotionPattern::kStatic},       // stooping
      {0.0, 1.0, 0.0, MotionPattern::kStatic},         // empty
  }};
  return table;
}

inline double gaussian_blob(double dr, double dc, double heading,
                            double sigma_along, double sigma_across) {
  const double ch = std::cos(heading), sh = std::sin(heading);
  const double along = dc * ch + dr * sh;
  const double across = -dc * sh + dr * ch;
  return std::exp(-0.5 * (along * along / (sigma_along * sigma_along) +
                          across * across / (sigma_across * sigma_across)));
}

// Reflects x into [lo, hi].
inline double reflect(double x, double lo, double hi) {
  const double span = hi - lo;
  double u = std::fmod(x - lo, 2.0 * span);
  if (u < 0) u += 2.0 * span;
  return lo + (u <= span ? u : 2.0 * span - u);
}

inline constexpr int kSubsamples = 4;
// Blob centres stay a cell away from the border so the body is in view.
inline constexpr double kGridLo = 1.0;
inline constexpr double kGridHi = static_cast<double>(kGridSize) - 2.0;

}  // namespace detail

/// Nominal model of `activity` in `domain`, centered under the sensor.
inline ActivityModel nominal_activity_model(ActivityLabel activity,
                                            const DomainSpec& domain) {
  const auto& sig = detail::signatures()[static_cast<std::size_t>(activity)];
  const double pitch = domain.cell_pitch_m();
  ActivityModel m;
  m.activity = activity;
  if (activity == ActivityLabel::kEmpty) return m;
  m.blob_count = 1;
  m.blob_sigma = sig.sigma_m / pitch;
  m.elongation = sig.elongation;
  m.blob_peak_delta_celsius = sig.intensity * domain.contrast_celsius();
  m.motion_pattern = sig.motion;
  if (sig.motion == MotionPattern::kOscillating) {
    m.blob_count = 2;
    m.motion_rate_hz = 1.0;
    m.motion_amplitude = 0.3 / pitch;
    m.arm_sigma = 0.14 / pitch;
    m.arm_peak_delta_celsius = 0.8 * domain.contrast_celsius();
  } else if (sig.motion == MotionPattern::kTranslating) {
    m.motion_amplitude = 0.5 / pitch;  // 0.5 m/s
  }
  return m;
}

/// Random instance: position uniform over the part of the room in view,
/// random heading, +-7% jitter on size and intensity.
inline ActivityModel sample_activity_model(ActivityLabel activity,
                                           const DomainSpec& domain,
                                           std::mt19937_64& rng) {
  ActivityModel m = nominal_activity_model(activity, domain);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double pitch = domain.cell_pitch_m();
  const double centre = (static_cast<double>(kGridSize) - 1.0) / 2.0;
  const double reach = centre - detail::kGridLo;
  const double half_x = std::min(0.5 * domain.room_length_m / pitch, reach);
  const double half_y = std::min(0.5 * domain.room_width_m / pitch, reach);
  m.col = centre + (2.0 * unit(rng) - 1.0) * half_x;
  m.row = centre + (2.0 * unit(rng) - 1.0) * half_y;
  m.heading_rad = unit(rng) * std::numbers::pi;
  const double size_jitter = 0.93 + 0.14 * unit(rng);
  const double heat_jitter = 0.93 + 0.14 * unit(rng);
  m.blob_sigma *= size_jitter;
  m.arm_sigma *= size_jitter;
  m.blob_peak_delta_celsius *= heat_jitter;
  m.arm_peak_delta_celsius *= heat_jitter;
  return m;
}

/// Blob centre at time t.
inline std::pair<double, double> blob_position(const ActivityModel& m, double t) {
  if (m.motion_pattern != MotionPattern::kTranslating) return {m.row, m.col};
  const double dist = m.motion_amplitude * t;
  return {detail::reflect(m.row + dist * std::sin(m.heading_rad), detail::kGridLo,
                          detail::kGridHi),
          detail::reflect(m.col + dist * std::cos(m.heading_rad), detail::kGridLo,
                          detail::kGridHi)};
}

/// One frame at time t (seconds). Cell (r, c) is centred at grid coordinate
/// (r, c). Noise draws come from `rng`; everything else is deterministic.
inline RawFrame generate_frame(const DomainSpec& domain, const ActivityModel& model,
                               double t, std::mt19937_64& rng) {
  if (t < 0) throw std::invalid_argument("generate_frame: negative time");
  RawFrame frame;
  frame.timestamp_ms = static_cast<std::uint64_t>(std::llround(t * 1000.0));
  const auto [br, bc] = blob_position(model, t);
  const double sigma_across = model.blob_sigma;
  const double sigma_along = model.blob_sigma * model.elongation;
  double arm_r = 0, arm_c = 0;
  if (model.blob_count > 1) {
    const double swing = model.motion_amplitude *
                         std::sin(2.0 * std::numbers::pi * model.motion_rate_hz * t);
    // Arm sits beside the body, swinging along the heading.
    arm_r = br + 0.8 * model.motion_amplitude * std::cos(model.heading_rad) +
            swing * std::sin(model.heading_rad);
    arm_c = bc - 0.8 * model.motion_amplitude * std::sin(model.heading_rad) +
            swing * std::cos(model.heading_rad);
  }
  // Each cell reports the mean over its footprint, approximated by a
  // kSubsamples x kSubsamples grid; a point-sampled Gaussian narrower than a
  // cell would otherwise swing with sub-cell position.
  std::array<double, kPixels> heat{};
  if (model.blob_count > 0) {
    constexpr int kSubsamples = detail::kSubsamples;
    constexpr double step = 1.0 / kSubsamples;
    for (std::size_t r = 0; r < kGridSize; ++r) {
      for (std::size_t c = 0; c < kGridSize; ++c) {
        double sum = 0.0;
        for (int i = 0; i < kSubsamples; ++i) {
          const double y = static_cast<double>(r) - 0.5 + (i + 0.5) * step;
          for (int j = 0; j < kSubsamples; ++j) {
            const double x = static_cast<double>(c) - 0.5 + (j + 0.5) * step;
            sum += model.blob_peak_delta_celsius *
                   detail::gaussian_blob(y - br, x - bc, model.heading_rad,
                                         sigma_along, sigma_across);
            if (model.blob_count > 1) {
              sum += model.arm_peak_delta_celsius *
                     detail::gaussian_blob(y - arm_r, x - arm_c, 0.0, model.arm_sigma,
                                           model.arm_sigma);
            }
          }
        }
        heat[r * kGridSize + c] = sum / (kSubsamples * kSubsamples);
      }
    }
  }
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t r = 0; r < kGridSize; ++r) {
    for (std::size_t c = 0; c < kGridSize; ++c) {
      double value = domain.ambient_celsius + heat[r * kGridSize + c];
      const double n = noise(rng);
      value += domain.noise_std_celsius * n;
      frame.at(r, c) = static_cast<float>(
          std::clamp<double>(value, kSensorMinCelsius, kSensorMaxCelsius));
    }
  }
  return frame;
}

/// Continuous frame stream of one activity in one domain.
struct LabeledStream {
  ActivityLabel label = ActivityLabel::kEmpty;
  DomainTag domain = DomainTag::kSource;
  std::vector<RawFrame> frames;
};

struct GeneratorOptions {
  double frame_rate_hz = kDefaultFrameRateHz;
  std::size_t frames_per_episode = 20;  // person re-placed every second
};

/// Stream of `sample_count` * 10 frames for one activity. The person is
/// re-placed at random every `frames_per_episode` frames.
inline LabeledStream generate_stream(const DomainSpec& domain, ActivityLabel activity,
                                     std::size_t sample_count, std::uint64_t seed,
                                     const GeneratorOptions& options = {}) {
  domain.validate();
  LabeledStream stream;
  stream.label = activity;
  stream.domain = domain.tag;
  const std::size_t total = sample_count * kFramesPerSample;
  stream.frames.reserve(total);
  std::mt19937_64 rng(seed);
  ActivityModel model;
  double episode_start = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const double t = static_cast<double>(i) / options.frame_rate_hz;
    if (i % options.frames_per_episode == 0) {
      model = sample_activity_model(activity, domain, rng);
      episode_start = t;
    }
    // Motion restarts with every episode; timestamps keep running.
    RawFrame frame = generate_frame(domain, model, t - episode_start, rng);
    frame.timestamp_ms = static_cast<std::uint64_t>(std::llround(t * 1000.0));
    stream.frames.push_back(frame);
  }
  return stream;
}

/// Per-activity seed derived from the dataset seed, so activities can be
/// generated independently.
inline std::uint64_t activity_seed(std::uint64_t seed, ActivityLabel activity,
                                   DomainTag domain) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index_of(activity)),
                    static_cast<std::uint32_t>(domain)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

/// One stream per activity, each long enough for `per_activity_samples`
/// samples. Empty when the count is zero.
inline std::vector<LabeledStream> generate_dataset(const DomainSpec& domain,
                                                   std::size_t per_activity_samples,
                                                   std::uint64_t seed,
                                                   const GeneratorOptions& options = {}) {
  std::vector<LabeledStream> streams;
  if (per_activity_samples == 0) return streams;
  for (ActivityLabel a : kAllActivities) {
    streams.push_back(generate_stream(domain, a, per_activity_samples,
                                      activity_seed(seed, a, domain.tag), options));
  }
  return streams;
}

/// Preprocesses every stream and concatenates the labeled samples.
inline std::vector<SampleTensor> preprocess_streams(
    const std::vector<LabeledStream>& streams, const FilterSpec& spec = {}) {
  std::vector<SampleTensor> out;
  for (const LabeledStream& s : streams) {
    auto samples = preprocess_stream(s.frames, spec, kFramesPerSample, s.label, s.domain);
    out.insert(out.end(), samples.begin(), samples.end());
  }
  return out;
}

}  // namespace scdnn

#endif  // SCDNN_SYNTHGEN_HPP_
