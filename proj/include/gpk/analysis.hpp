// Copyright 2026 The GroundPrior Kit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Distribution statistics comparing ground depth against plane attitude:
// per-object depth and per-pixel attitude histograms, v-row scatter series
// under camera mount disturbance, and their overlap.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gpk/dataset_io.hpp"

namespace gpk {

class Histogram {
 public:
  // Uniform bins over [lo, hi]; values equal to hi land in the last bin.
  Histogram(double lo, double hi, std::size_t bins);

  // Range taken from the samples. A constant sample set gets a small
  // symmetric range around its value.
  static Histogram fit(std::span<const double> samples, std::size_t bins);

  void add(double x);
  // Both histograms must share their edges.
  void merge(const Histogram& other);

  std::size_t bins() const noexcept { return counts_.size(); }
  double edge(std::size_t i) const;
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t underflow() const noexcept { return underflow_; }
  std::uint64_t overflow() const noexcept { return overflow_; }
  std::uint64_t total() const noexcept { return total_; }
  double mean() const;

  std::size_t occupied_bins() const;
  // Span from the first to the last non-empty bin edge; 0 when empty.
  double occupied_width() const;
  // occupied_width / |mean|.
  double relative_support() const;

 private:
  double lo_, hi_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t underflow_ = 0, overflow_ = 0, total_ = 0;
  double sum_ = 0.0;
};

enum class Quantity { kDepth, kRoll, kPitch };

std::string_view to_string(Quantity q);
Quantity parse_quantity(std::string_view name);

enum class Condition { kClean, kPerturbed };

std::string_view to_string(Condition c);

struct ScatterPoint {
  std::string frame_id;
  double v = 0.0;
  double value = 0.0;
};

struct ScatterSeries {
  Quantity quantity = Quantity::kDepth;
  Condition condition = Condition::kClean;
  std::vector<ScatterPoint> points;
};

struct MountOffset {
  double droll = 0.0;
  double dpitch = 0.0;
};

struct ImageSize {
  std::size_t height = 0;
  std::size_t width = 0;
};

// Per-object camera depth of the ground contact point (bottom center z).
std::vector<double> object_depths(std::span<const FrameRecord> frames);

Histogram depth_histogram(std::span<const FrameRecord> frames, std::size_t bins,
                          std::optional<std::pair<double, double>> range = std::nullopt);

struct AttitudeSamples {
  std::vector<double> roll;
  std::vector<double> pitch;
  std::vector<double> height;
};

// Attitude of every pixel of one frame's refined plane map, sampled on a
// grid `stride` times coarser than the image.
AttitudeSamples attitude_samples(const FrameRecord& frame, ImageSize image, int stride = 16);

struct AttitudeHistograms {
  Histogram roll;
  Histogram pitch;
  Histogram height;
};

// attitude_samples pooled over frames.
AttitudeHistograms attitude_histograms(std::span<const FrameRecord> frames, std::size_t bins,
                                       ImageSize image, int stride = 16);

// (v, quantity) per annotated object. With offsets (one per frame) the
// camera mount is rotated and objects are re-projected through the rotated
// camera; objects that leave the image are dropped in both conditions.
ScatterSeries v_correlation_series(std::span<const FrameRecord> frames, Quantity quantity,
                                   ImageSize image,
                                   std::optional<std::span<const MountOffset>> offsets = std::nullopt);

// Normalized 2D histogram intersection over the joint (v, value) support.
double overlap_coefficient(const ScatterSeries& a, const ScatterSeries& b, std::size_t bins = 32);

// One offset per frame, each component N(0, sigma) truncated at 3 sigma.
std::vector<MountOffset> sample_mount_offsets(std::size_t frames, double sigma, std::uint64_t seed);

std::string histogram_csv(const Histogram& h);
std::string scatter_csv(std::span<const ScatterSeries> series);

std::string histogram_svg(const Histogram& h, std::string_view title);
std::string scatter_svg(std::span<const ScatterSeries> series, std::string_view title);

}  // namespace gpk
