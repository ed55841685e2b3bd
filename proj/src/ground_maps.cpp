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

#include "gpk/ground_maps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpk/delaunay.hpp"

namespace gpk {

GroundDepthMap::GroundDepthMap(std::size_t height, std::size_t width)
    : height_(height), width_(width), data_(height * width, 0.0), valid_(height * width, 0) {}

std::optional<double> GroundDepthMap::depth(std::size_t row, std::size_t col) const {
  const std::size_t i = index(row, col);
  if (valid_[i] == 0) return std::nullopt;
  return data_[i];
}

void GroundDepthMap::set(std::size_t row, std::size_t col, double depth) {
  const std::size_t i = index(row, col);
  data_[i] = depth;
  valid_[i] = 1;
}

void GroundDepthMap::invalidate(std::size_t row, std::size_t col) {
  const std::size_t i = index(row, col);
  data_[i] = 0.0;
  valid_[i] = 0;
}

std::size_t GroundDepthMap::valid_count() const {
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), 1));
}

DenormMap::DenormMap(std::size_t height, std::size_t width, const GroundPlane& fill)
    : height_(height), width_(width), data_(height * width * kChannels) {
  for (std::size_t i = 0; i < height * width; ++i) {
    data_[i * kChannels + 0] = fill.alpha();
    data_[i * kChannels + 1] = fill.beta();
    data_[i * kChannels + 2] = fill.gamma();
    data_[i * kChannels + 3] = fill.d();
  }
}

DenormMap DenormMap::from_values(std::size_t height, std::size_t width,
                                 std::vector<double> values) {
  if (values.size() != height * width * kChannels) {
    throw FormatError("denorm map payload has " + std::to_string(values.size()) +
                      " values, expected " + std::to_string(height * width * kChannels));
  }
  for (std::size_t i = 0; i < height * width; ++i) {
    const double* p = values.data() + i * kChannels;
    const double norm = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-6 || !(p[3] > 0.0)) {
      throw FormatError("pixel " + std::to_string(i) + " is not a normalized plane");
    }
  }
  DenormMap map(0, 0, GroundPlane::from_raw(0.0, -1.0, 0.0, 1.0));
  map.height_ = height;
  map.width_ = width;
  map.data_ = std::move(values);
  return map;
}

GroundPlane DenormMap::at(std::size_t row, std::size_t col) const {
  const double* p = data_.data() + (row * width_ + col) * kChannels;
  return GroundPlane::from_raw(p[0], p[1], p[2], p[3]);
}

void DenormMap::set(std::size_t row, std::size_t col, const GroundPlane& g) {
  double* p = data_.data() + (row * width_ + col) * kChannels;
  p[0] = g.alpha();
  p[1] = g.beta();
  p[2] = g.gamma();
  p[3] = g.d();
}

GroundDepthMap build_ground_depth_map(const CameraIntrinsics& k, const GroundPlane& g,
                                      std::size_t height, std::size_t width) {
  GroundDepthMap map(height, width);
  for (std::size_t row = 0; row < height; ++row) {
    for (std::size_t col = 0; col < width; ++col) {
      const Pixel center{static_cast<double>(col) + 0.5, static_cast<double>(row) + 0.5};
      try {
        map.set(row, col, ground_depth_at_pixel(center, k, g));
      } catch (const GeometryError&) {
        map.invalidate(row, col);
      }
    }
  }
  return map;
}

DenormMap build_global_denorm_map(const GroundPlane& g_initial, std::size_t height,
                                  std::size_t width) {
  return {height, width, g_initial};
}

Triangulation triangulate_ground_points(std::span<const Vec3> points, const CameraIntrinsics& k) {
  Triangulation out;
  std::vector<Vec3> usable;
  std::vector<Vec2> pixels;
  usable.reserve(points.size());
  pixels.reserve(points.size());
  for (const auto& p : points) {
    if (!(p.z() > 0.0) || !p.allFinite()) {
      ++out.unusable_points;
      continue;
    }
    const Pixel px = project_point(p, k);
    const Vec2 q(px.u, px.v);
    if (std::find(pixels.begin(), pixels.end(), q) != pixels.end()) {
      ++out.unusable_points;
      continue;
    }
    usable.push_back(p);
    pixels.push_back(q);
  }
  if (usable.size() < 3) {
    throw GeometryError(GeometryErrc::kInsufficientPoints,
                        std::to_string(usable.size()) + " usable ground points");
  }

  const auto tris = delaunay_triangulate(pixels);
  if (tris.empty()) {
    throw GeometryError(GeometryErrc::kAllDegenerate, "projected points are collinear");
  }
  for (const auto& t : tris) {
    try {
      const GroundPlane plane = plane_from_three_points(usable[t[0]], usable[t[1]], usable[t[2]]);
      TriangleRegion region{
          {Pixel{pixels[t[0]].x(), pixels[t[0]].y()}, Pixel{pixels[t[1]].x(), pixels[t[1]].y()},
           Pixel{pixels[t[2]].x(), pixels[t[2]].y()}},
          {usable[t[0]], usable[t[1]], usable[t[2]]},
          plane};
      out.triangles.push_back(region);
    } catch (const GeometryError&) {
      ++out.degenerate_skipped;
    }
  }
  if (out.triangles.empty()) {
    throw GeometryError(GeometryErrc::kAllDegenerate, "every triangle is degenerate");
  }
  return out;
}

namespace {

double edge_function(const Pixel& a, const Pixel& b, double px, double py) {
  return (b.u - a.u) * (py - a.v) - (b.v - a.v) * (px - a.u);
}

// With vertices ordered so that interior edge functions are positive, an edge
// is "top" when horizontal with the interior below it (image y grows down)
// and "left" when it runs upward.
bool is_top_left(const Pixel& a, const Pixel& b) {
  const double dx = b.u - a.u;
  const double dy = b.v - a.v;
  return (dy == 0.0 && dx > 0.0) || dy < 0.0;
}

bool edge_covers(const Pixel& a, const Pixel& b, double px, double py) {
  const double e = edge_function(a, b, px, py);
  return e > 0.0 || (e == 0.0 && is_top_left(a, b));
}

}  // namespace

bool covers_pixel_center(const std::array<Pixel, 3>& tri, double px, double py) {
  Pixel a = tri[0], b = tri[1], c = tri[2];
  const double area = edge_function(a, b, c.u, c.v);
  if (area == 0.0 || !std::isfinite(area)) return false;
  if (area < 0.0) std::swap(b, c);
  return edge_covers(a, b, px, py) && edge_covers(b, c, px, py) && edge_covers(c, a, px, py);
}

std::size_t rasterize_triangle(DenormMap& map, const TriangleRegion& tri) {
  const auto& v = tri.vertices;
  if (map.height() == 0 || map.width() == 0) return 0;
  const double umin = std::min({v[0].u, v[1].u, v[2].u});
  const double umax = std::max({v[0].u, v[1].u, v[2].u});
  const double vmin = std::min({v[0].v, v[1].v, v[2].v});
  const double vmax = std::max({v[0].v, v[1].v, v[2].v});
  if (!std::isfinite(umin + umax + vmin + vmax)) return 0;

  // Pixel col covers center col + 0.5, so candidates satisfy
  // umin - 0.5 <= col <= umax - 0.5.
  const auto clamp_index = [](double x, std::size_t n) {
    return static_cast<std::ptrdiff_t>(std::clamp(x, -1.0, static_cast<double>(n)));
  };
  const std::ptrdiff_t c0 = std::max<std::ptrdiff_t>(0, clamp_index(std::floor(umin - 0.5), map.width()));
  const std::ptrdiff_t c1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(map.width()) - 1,
                                                     clamp_index(std::ceil(umax - 0.5), map.width()));
  const std::ptrdiff_t r0 = std::max<std::ptrdiff_t>(0, clamp_index(std::floor(vmin - 0.5), map.height()));
  const std::ptrdiff_t r1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(map.height()) - 1,
                                                     clamp_index(std::ceil(vmax - 0.5), map.height()));

  std::size_t written = 0;
  for (std::ptrdiff_t row = r0; row <= r1; ++row) {
    for (std::ptrdiff_t col = c0; col <= c1; ++col) {
      if (covers_pixel_center(v, static_cast<double>(col) + 0.5, static_cast<double>(row) + 0.5)) {
        map.set(static_cast<std::size_t>(row), static_cast<std::size_t>(col), tri.plane);
        ++written;
      }
    }
  }
  return written;
}

DenormMap build_refined_denorm_map(const GroundPlane& g_initial, std::span<const BBox3D> boxes,
                                   const CameraIntrinsics& k, std::size_t height,
                                   std::size_t width, RefinementReport* report) {
  DenormMap map = build_global_denorm_map(g_initial, height, width);
  RefinementReport local;
  std::vector<Vec3> points;
  points.reserve(boxes.size());
  for (const auto& b : boxes) points.push_back(bottom_center(b, g_initial));
  local.points = points.size();

  try {
    const Triangulation tri = triangulate_ground_points(points, k);
    local.triangles = tri.triangles.size();
    local.degenerate_skipped = tri.degenerate_skipped;
    for (const auto& region : tri.triangles) rasterize_triangle(map, region);
  } catch (const GeometryError& e) {
    if (e.code() == GeometryErrc::kInsufficientPoints) local.insufficient_points = true;
    else if (e.code() != GeometryErrc::kAllDegenerate) throw;
  }
  if (report != nullptr) *report = local;
  return map;
}

double denorm_l1_loss(const DenormMap& pred, const DenormMap& label) {
  if (pred.height() != label.height() || pred.width() != label.width()) {
    throw DimensionMismatch("denorm maps differ in size: " + std::to_string(pred.height()) + "x" +
                            std::to_string(pred.width()) + " vs " +
                            std::to_string(label.height()) + "x" +
                            std::to_string(label.width()));
  }
  const auto a = pred.values();
  const auto b = label.values();
  if (a.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

}  // namespace gpk
