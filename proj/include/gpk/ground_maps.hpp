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

// Dense ground representations on the image grid: per-pixel ground depth and
// per-pixel plane equations (global and annotation-refined).

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gpk/geometry.hpp"

namespace gpk {

// Per-pixel depth of the viewing ray's ground intersection. Pixels at or
// above the horizon are invalid and carry no depth.
class GroundDepthMap {
 public:
  GroundDepthMap(std::size_t height, std::size_t width);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }

  bool valid(std::size_t row, std::size_t col) const { return valid_[index(row, col)] != 0; }
  std::optional<double> depth(std::size_t row, std::size_t col) const;

  void set(std::size_t row, std::size_t col, double depth);
  void invalidate(std::size_t row, std::size_t col);

  // Raw depth; invalid pixels hold 0.
  std::span<const double> values() const noexcept { return data_; }
  std::span<const unsigned char> mask() const noexcept { return valid_; }
  std::size_t valid_count() const;

 private:
  std::size_t index(std::size_t row, std::size_t col) const { return row * width_ + col; }

  std::size_t height_, width_;
  std::vector<double> data_;
  std::vector<unsigned char> valid_;
};

// Per-pixel plane equation (alpha, beta, gamma, d). Every pixel holds a valid
// normalized plane at all times.
class DenormMap {
 public:
  static constexpr std::size_t kChannels = 4;

  DenormMap(std::size_t height, std::size_t width, const GroundPlane& fill);

  // Adopts stored values as is (e.g. float32 data read back from disk).
  // Throws FormatError when a pixel is not a plausible normalized plane
  // (unit normal within 1e-6, d > 0).
  static DenormMap from_values(std::size_t height, std::size_t width, std::vector<double> values);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }

  GroundPlane at(std::size_t row, std::size_t col) const;
  void set(std::size_t row, std::size_t col, const GroundPlane& g);
  double channel(std::size_t row, std::size_t col, std::size_t ch) const {
    return data_[(row * width_ + col) * kChannels + ch];
  }

  // Row-major, channel-interleaved.
  std::span<const double> values() const noexcept { return data_; }

  friend bool operator==(const DenormMap&, const DenormMap&) = default;

 private:
  std::size_t height_, width_;
  std::vector<double> data_;
};

struct TriangleRegion {
  std::array<Pixel, 3> vertices;
  std::array<Vec3, 3> ground_points;
  GroundPlane plane;
};

struct Triangulation {
  std::vector<TriangleRegion> triangles;
  std::size_t degenerate_skipped = 0;  // collinear / origin-plane triples
  std::size_t unusable_points = 0;     // behind the camera or duplicate pixels
};

// Ground depth sampled at pixel centers (col + 0.5, row + 0.5).
GroundDepthMap build_ground_depth_map(const CameraIntrinsics& k, const GroundPlane& g,
                                      std::size_t height, std::size_t width);

DenormMap build_global_denorm_map(const GroundPlane& g_initial, std::size_t height,
                                  std::size_t width);

// Delaunay triangulation of the points' projections, one fitted plane per
// triangle. Throws kInsufficientPoints (< 3 usable) or kAllDegenerate.
Triangulation triangulate_ground_points(std::span<const Vec3> points, const CameraIntrinsics& k);

// True when the pixel center (px, py) is covered under the top-left fill rule.
bool covers_pixel_center(const std::array<Pixel, 3>& tri, double px, double py);

// Number of pixels written.
std::size_t rasterize_triangle(DenormMap& map, const TriangleRegion& tri);

struct RefinementReport {
  std::size_t points = 0;
  std::size_t triangles = 0;
  std::size_t degenerate_skipped = 0;
  bool insufficient_points = false;
};

DenormMap build_refined_denorm_map(const GroundPlane& g_initial, std::span<const BBox3D> boxes,
                                   const CameraIntrinsics& k, std::size_t height,
                                   std::size_t width, RefinementReport* report = nullptr);

// Mean absolute difference over all height * width * 4 entries.
double denorm_l1_loss(const DenormMap& pred, const DenormMap& label);

}  // namespace gpk
