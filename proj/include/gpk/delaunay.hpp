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

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace gpk {

using Vec2 = Eigen::Vector2d;

// Vertex indices into the input point list, counter-clockwise in (x, y).
using TriangleIndices = std::array<std::size_t, 3>;

// Twice the signed area of (a, b, c); positive when counter-clockwise.
double orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

// Delaunay triangulation of a 2D point set.
//
// Points are inserted in lexicographic order (sweep hull), which produces a
// triangulation of the exact convex hull; Lawson edge flips then make it
// Delaunay. Duplicate points are ignored (the first occurrence is used).
// Returns an empty list when fewer than three distinct points exist or all
// of them are collinear.
std::vector<TriangleIndices> delaunay_triangulate(std::span<const Vec2> points);

}  // namespace gpk
