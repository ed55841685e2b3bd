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

// Independent reference computations used to check the library. These are
// written from first principles and do not call the code under test.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// K * p as an explicit 3x3 product, then divide by the third component.
inline std::array<double, 2> project(const std::array<double, 3>& p, double fx, double fy,
                                     double cx, double cy) {
  const double k[3][3] = {{fx, 0.0, cx}, {0.0, fy, cy}, {0.0, 0.0, 1.0}};
  double q[3] = {0.0, 0.0, 0.0};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) q[r] += k[r][c] * p[static_cast<std::size_t>(c)];
  }
  return {q[0] / q[2], q[1] / q[2]};
}

// Ground point seen at pixel (u, v): solve the 3x3 linear system
//   fx X + (cx - u) Z = 0,  fy Y + (cy - v) Z = 0,  a X + b Y + c Z = -d
// with full-pivot LU and return Z. Empty when the system is singular.
inline std::optional<double> ray_plane_depth(double u, double v, double fx, double fy, double cx,
                                             double cy, const std::array<double, 4>& plane) {
  Eigen::Matrix3d m;
  m << fx, 0.0, cx - u, 0.0, fy, cy - v, plane[0], plane[1], plane[2];
  Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
  if (!lu.isInvertible()) return std::nullopt;
  const Eigen::Vector3d x = lu.solve(Eigen::Vector3d(0.0, 0.0, -plane[3]));
  return x.z();
}

// Plane through three points from the cross product of two edges, scaled to
// a unit normal with d > 0.
inline std::array<double, 4> plane_through(const Eigen::Vector3d& p1, const Eigen::Vector3d& p2,
                                           const Eigen::Vector3d& p3) {
  Eigen::Vector3d n = (p2 - p1).cross(p3 - p1);
  double d = -n.dot(p1);
  const double s = (d < 0.0 ? -1.0 : 1.0) / n.norm();
  n *= s;
  d *= s;
  return {n.x(), n.y(), n.z(), d};
}

struct Point2 {
  double x, y;
};

// Coverage of a pixel center by a triangle from barycentric coordinates.
// Centers strictly inside are covered. Centers on an edge are covered when
// the edge is a "top" edge (horizontal, interior below in image rows) or a
// "left" edge (interior toward +x). Degenerate triangles cover nothing.
inline bool barycentric_covers(const std::array<Point2, 3>& t, double px, double py) {
  const double det = (t[1].x - t[0].x) * (t[2].y - t[0].y) - (t[2].x - t[0].x) * (t[1].y - t[0].y);
  if (det == 0.0) return false;
  // lambda_i is the weight of vertex i; it vanishes on the opposite edge.
  std::array<double, 3> lambda{};
  for (int i = 0; i < 3; ++i) {
    const Point2& a = t[static_cast<std::size_t>((i + 1) % 3)];
    const Point2& b = t[static_cast<std::size_t>((i + 2) % 3)];
    lambda[static_cast<std::size_t>(i)] = ((b.x - a.x) * (py - a.y) - (px - a.x) * (b.y - a.y)) / det;
  }
  for (int i = 0; i < 3; ++i) {
    const double l = lambda[static_cast<std::size_t>(i)];
    if (l < 0.0) return false;
    if (l > 0.0) continue;
    const Point2& a = t[static_cast<std::size_t>((i + 1) % 3)];
    const Point2& b = t[static_cast<std::size_t>((i + 2) % 3)];
    const Point2& c = t[static_cast<std::size_t>(i)];
    // Inward normal of edge (a, b): perpendicular pointing toward c.
    double nx = -(b.y - a.y), ny = b.x - a.x;
    if (nx * (c.x - a.x) + ny * (c.y - a.y) < 0.0) {
      nx = -nx;
      ny = -ny;
    }
    const bool top = a.y == b.y && ny > 0.0;
    const bool left = nx > 0.0;
    if (!top && !left) return false;
  }
  return true;
}

// One attention head group by explicit loops: queries x (C), keys x (C),
// projection matrices (in x out) with bias rows. Returns the output and the
// head-averaged attention map.
struct LinearParams {
  Eigen::MatrixXd w;
  Eigen::RowVectorXd b;
};

inline Eigen::MatrixXd linear(const Eigen::MatrixXd& x, const LinearParams& p) {
  Eigen::MatrixXd y(x.rows(), p.w.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index o = 0; o < p.w.cols(); ++o) {
      double acc = p.b(o);
      for (Eigen::Index i = 0; i < x.cols(); ++i) acc += x(r, i) * p.w(i, o);
      y(r, o) = acc;
    }
  }
  return y;
}

inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> attention(
    const Eigen::MatrixXd& queries, const Eigen::MatrixXd& keys, const LinearParams& wq,
    const LinearParams& wk, const LinearParams& wv, const LinearParams& wo, int heads) {
  const Eigen::Index c = wq.w.cols();
  const Eigen::Index dh = c / heads;
  const Eigen::MatrixXd q = linear(queries, wq);
  const Eigen::MatrixXd k = linear(keys, wk);
  const Eigen::MatrixXd v = linear(keys, wv);
  Eigen::MatrixXd concat = Eigen::MatrixXd::Zero(queries.rows(), c);
  Eigen::MatrixXd map = Eigen::MatrixXd::Zero(queries.rows(), keys.rows());
  for (int h = 0; h < heads; ++h) {
    for (Eigen::Index n = 0; n < queries.rows(); ++n) {
      std::vector<double> logits(static_cast<std::size_t>(keys.rows()));
      for (Eigen::Index t = 0; t < keys.rows(); ++t) {
        double dot = 0.0;
        for (Eigen::Index j = 0; j < dh; ++j) dot += q(n, h * dh + j) * k(t, h * dh + j);
        logits[static_cast<std::size_t>(t)] = dot / std::sqrt(static_cast<double>(c));
      }
      const double mx = *std::max_element(logits.begin(), logits.end());
      double z = 0.0;
      for (double& l : logits) z += (l = std::exp(l - mx));
      for (Eigen::Index t = 0; t < keys.rows(); ++t) {
        const double a = logits[static_cast<std::size_t>(t)] / z;
        map(n, t) += a / heads;
        for (Eigen::Index j = 0; j < dh; ++j) concat(n, h * dh + j) += a * v(t, h * dh + j);
      }
    }
  }
  return {linear(concat, wo), map};
}

inline Eigen::MatrixXd relu_ffn(const Eigen::MatrixXd& x, const LinearParams& a,
                                const LinearParams& b) {
  Eigen::MatrixXd h = linear(x, a);
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    for (Eigen::Index c = 0; c < h.cols(); ++c) h(r, c) = h(r, c) > 0.0 ? h(r, c) : 0.0;
  }
  return linear(h, b);
}

// Area of an axis-aligned integer box by counting unit cells.
inline long grid_area(int l, int t, int r, int b) {
  long n = 0;
  for (int y = t; y < b; ++y) {
    for (int x = l; x < r; ++x) ++n;
  }
  return n;
}

// GIoU on integer boxes from cell counts.
inline double giou_by_counting(const std::array<int, 4>& a, const std::array<int, 4>& b) {
  long inter = 0;
  for (int y = std::min(a[1], b[1]); y < std::max(a[3], b[3]); ++y) {
    for (int x = std::min(a[0], b[0]); x < std::max(a[2], b[2]); ++x) {
      const bool in_a = x >= a[0] && x < a[2] && y >= a[1] && y < a[3];
      const bool in_b = x >= b[0] && x < b[2] && y >= b[1] && y < b[3];
      inter += in_a && in_b;
    }
  }
  const long uni = grid_area(a[0], a[1], a[2], a[3]) + grid_area(b[0], b[1], b[2], b[3]) - inter;
  const long hull = grid_area(std::min(a[0], b[0]), std::min(a[1], b[1]), std::max(a[2], b[2]),
                              std::max(a[3], b[3]));
  return static_cast<double>(inter) / static_cast<double>(uni) -
         static_cast<double>(hull - uni) / static_cast<double>(hull);
}

// Central difference derivative.
template <typename F>
double central_difference(F&& f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / scale;
}

}  // namespace oracle
