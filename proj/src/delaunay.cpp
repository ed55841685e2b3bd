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

#include "gpk/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

#include <Eigen/Geometry>

namespace gpk {

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

namespace {

// Positive when d lies strictly inside the circumcircle of CCW (a, b, c).
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return ad * (bdx * cdy - cdx * bdy) + bd * (cdx * ady - adx * cdy) +
         cd * (adx * bdy - bdx * ady);
}

using Edge = std::pair<std::size_t, std::size_t>;

Edge edge_key(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

class SweepTriangulator {
 public:
  explicit SweepTriangulator(std::span<const Vec2> points) : pts_(points) {
    Eigen::AlignedBox2d box;
    for (const auto& p : pts_) box.extend(p);
    const double extent = pts_.empty() ? 0.0 : box.diagonal().norm();
    orient_tol_ = 1e-12 * extent * extent;
    incircle_tol_ = 1e-10 * extent * extent * extent * extent;
  }

  std::vector<TriangleIndices> run() {
    std::vector<std::size_t> order = sorted_unique();
    if (order.size() < 3) return {};

    std::size_t k = 2;
    while (k < order.size() &&
           std::abs(orient2d(pts_[order[0]], pts_[order[1]], pts_[order[k]])) <= orient_tol_) {
      ++k;
    }
    if (k == order.size()) return {};

    seed_fan(order, k);
    for (std::size_t j = k + 1; j < order.size(); ++j) insert(order[j]);
    legalize();
    return tris_;
  }

 private:
  std::vector<std::size_t> sorted_unique() const {
    std::vector<std::size_t> order(pts_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& pa = pts_[a];
      const auto& pb = pts_[b];
      return pa.x() < pb.x() || (pa.x() == pb.x() && pa.y() < pb.y());
    });
    order.erase(std::unique(order.begin(), order.end(),
                            [&](std::size_t a, std::size_t b) { return pts_[a] == pts_[b]; }),
                order.end());
    return order;
  }

  void add_triangle(std::size_t a, std::size_t b, std::size_t c) {
    if (orient2d(pts_[a], pts_[b], pts_[c]) < 0.0) std::swap(b, c);
    tris_.push_back({a, b, c});
  }

  // Initial collinear chain order[0..k-1] fanned to order[k].
  void seed_fan(const std::vector<std::size_t>& order, std::size_t k) {
    const std::size_t apex = order[k];
    for (std::size_t i = 0; i + 1 < k; ++i) add_triangle(order[i], order[i + 1], apex);

    const bool apex_left = orient2d(pts_[order[0]], pts_[order[k - 1]], pts_[apex]) > 0.0;
    if (apex_left) {
      hull_.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
      hull_.push_back(apex);
    } else {
      hull_ = {order[0], apex};
      for (std::size_t i = k - 1; i >= 1; --i) hull_.push_back(order[i]);
    }
  }

  void insert(std::size_t p) {
    const std::size_t m = hull_.size();
    std::vector<bool> visible(m, false);
    bool any = false;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t a = hull_[i];
      const std::size_t b = hull_[(i + 1) % m];
      visible[i] = orient2d(pts_[a], pts_[b], pts_[p]) < -orient_tol_;
      any = any || visible[i];
    }
    if (!any) return;  // numerically on the hull boundary; skipped

    // Visible edges form one circular run; find its first edge.
    std::size_t start = 0;
    while (!(visible[start] && !visible[(start + m - 1) % m])) ++start;
    std::size_t count = 0;
    while (count < m && visible[(start + count) % m]) {
      const std::size_t i = (start + count) % m;
      add_triangle(hull_[(i + 1) % m], hull_[i], p);
      ++count;
    }

    // Drop the interior vertices of the visible chain and splice p in.
    std::vector<std::size_t> next;
    next.reserve(m + 1);
    const std::size_t first = hull_[start];
    for (std::size_t s = 0; s < m; ++s) {
      const std::size_t idx = (start + count + s) % m;  // walks from chain end round to start
      next.push_back(hull_[idx]);
      if (hull_[idx] == first) break;
    }
    next.push_back(p);
    hull_ = std::move(next);
  }

  void legalize() {
    const std::size_t max_passes = 4 * tris_.size() + 16;
    for (std::size_t pass = 0; pass < max_passes; ++pass) {
      std::map<Edge, std::vector<std::pair<std::size_t, std::size_t>>> edges;
      for (std::size_t t = 0; t < tris_.size(); ++t) {
        const auto& tri = tris_[t];
        for (std::size_t e = 0; e < 3; ++e) {
          edges[edge_key(tri[e], tri[(e + 1) % 3])].emplace_back(t, tri[(e + 2) % 3]);
        }
      }
      std::vector<bool> touched(tris_.size(), false);
      bool flipped = false;
      for (const auto& [edge, sides] : edges) {
        if (sides.size() != 2) continue;
        const auto [t1, c] = sides[0];
        const auto [t2, d] = sides[1];
        if (touched[t1] || touched[t2]) continue;
        // Orient the shared edge as it appears (CCW) in t1.
        std::size_t a = edge.first, b = edge.second;
        if (orient2d(pts_[a], pts_[b], pts_[c]) < 0.0) std::swap(a, b);
        if (incircle(pts_[a], pts_[b], pts_[c], pts_[d]) <= incircle_tol_) continue;
        if (orient2d(pts_[a], pts_[d], pts_[c]) <= orient_tol_ ||
            orient2d(pts_[d], pts_[b], pts_[c]) <= orient_tol_) {
          continue;
        }
        tris_[t1] = {a, d, c};
        tris_[t2] = {d, b, c};
        touched[t1] = touched[t2] = true;
        flipped = true;
      }
      if (!flipped) return;
    }
  }

  std::span<const Vec2> pts_;
  double orient_tol_ = 0.0;
  double incircle_tol_ = 0.0;
  std::vector<TriangleIndices> tris_;
  std::vector<std::size_t> hull_;  // counter-clockwise
};

}  // namespace

std::vector<TriangleIndices> delaunay_triangulate(std::span<const Vec2> points) {
  return SweepTriangulator(points).run();
}

}  // namespace gpk
