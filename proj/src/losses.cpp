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

#include "gpk/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gpk {

namespace {

void check_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("probability must lie in (0, 1)");
}

void check_target(int target) {
  if (target != 0 && target != 1) throw DomainError("focal target must be 0 or 1");
}

void check_box(const Box2D& b) {
  if (!(b.right > b.left) || !(b.bottom > b.top)) {
    throw DomainError("2D box needs right > left and bottom > top");
  }
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

double focal_loss(double p, int target, double gamma, double alpha) {
  check_probability(p);
  check_target(target);
  if (target == 1) return -alpha * std::pow(1.0 - p, gamma) * std::log(p);
  return -(1.0 - alpha) * std::pow(p, gamma) * std::log(1.0 - p);
}

double focal_loss_grad(double p, int target, double gamma, double alpha) {
  check_probability(p);
  check_target(target);
  if (target == 1) {
    const double q = 1.0 - p;
    return alpha * (gamma * std::pow(q, gamma - 1.0) * std::log(p) - std::pow(q, gamma) / p);
  }
  return -(1.0 - alpha) *
         (gamma * std::pow(p, gamma - 1.0) * std::log(1.0 - p) - std::pow(p, gamma) / (1.0 - p));
}

double l1_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw DimensionMismatch("L1 operands differ in length");
  if (pred.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - target[i]);
  return sum / static_cast<double>(pred.size());
}

std::vector<double> l1_loss_grad(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw DimensionMismatch("L1 operands differ in length");
  std::vector<double> g(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    g[i] = sign(pred[i] - target[i]) / static_cast<double>(pred.size());
  }
  return g;
}

double box_area(const Box2D& b) {
  return std::max(0.0, b.right - b.left) * std::max(0.0, b.bottom - b.top);
}

double generalized_iou(const Box2D& a, const Box2D& b) {
  check_box(a);
  check_box(b);
  const Box2D inter{std::max(a.left, b.left), std::max(a.top, b.top), std::min(a.right, b.right),
                    std::min(a.bottom, b.bottom)};
  const Box2D hull{std::min(a.left, b.left), std::min(a.top, b.top), std::max(a.right, b.right),
                   std::max(a.bottom, b.bottom)};
  const double i = box_area(inter);
  const double u = box_area(a) + box_area(b) - i;
  const double c = box_area(hull);
  return i / u - (c - u) / c;
}

double giou_loss_2d(const Box2D& a, const Box2D& b) { return 1.0 - generalized_iou(a, b); }

LaplaceLoss laplace_depth_loss(double d_pred, double d_gt, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be positive");
  const double delta = d_gt - d_pred;
  const double abs_delta = std::abs(delta);
  return {2.0 / sigma * abs_delta + std::log(sigma), -2.0 / sigma * sign(delta),
          -2.0 * abs_delta / (sigma * sigma) + 1.0 / sigma};
}

double angle_l1_loss(double pred, double gt) {
  // wrap_angle maps into [-pi, pi); the absolute value is the same on (-pi, pi].
  return std::abs(wrap_angle(pred - gt));
}

void LossWeights::validate() const {
  for (double x : w) {
    if (!std::isfinite(x) || x < 0.0) throw ConfigError("loss weights must be finite and >= 0");
  }
}

double total_loss(const LossComponents& c, const LossWeights& w) {
  const auto v = c.as_array();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += w.w[i] * v[i];
  return sum;
}

LossComponents frame_losses(std::span<const ObjectLabel> pred, std::span<const ObjectLabel> label,
                            const CameraIntrinsics& k, const FrameLossOptions& opt) {
  if (pred.size() != label.size()) {
    throw DimensionMismatch("prediction has " + std::to_string(pred.size()) + " objects, label has " +
                            std::to_string(label.size()));
  }
  LossComponents sum;
  if (pred.empty()) return sum;

  // Projected 3D center and its distances to the 2D box edges (l, r, t, b).
  const auto center_terms = [&k](const ObjectLabel& o) {
    const Pixel c = project_point(Vec3(o.box.x, o.box.y, o.box.z), k);
    return std::pair{std::array{c.u, c.v},
                     std::array{c.u - o.box2d.left, o.box2d.right - c.u, c.v - o.box2d.top,
                                o.box2d.bottom - c.v}};
  };

  for (std::size_t i = 0; i < pred.size(); ++i) {
    const ObjectLabel& p = pred[i];
    const ObjectLabel& g = label[i];
    const int target = p.category == g.category ? 1 : 0;
    if (p.score) {
      sum.cls += focal_loss(*p.score, target, opt.gamma, opt.alpha);
    } else if (target == 0) {
      throw DomainError("prediction " + std::to_string(i) +
                        " has no score and a wrong category; focal loss diverges");
    }
    const auto [pc, pe] = center_terms(p);
    const auto [gc, ge] = center_terms(g);
    sum.size2d += l1_loss(pe, ge);
    sum.xy3d += l1_loss(pc, gc);
    sum.giou += giou_loss_2d(p.box2d, g.box2d);
    const std::array ps{p.box.h, p.box.w, p.box.l};
    const std::array gs{g.box.h, g.box.w, g.box.l};
    sum.size3d += l1_loss(ps, gs);
    sum.angle += angle_l1_loss(p.box.theta, g.box.theta);
    sum.depth += laplace_depth_loss(p.box.z, g.box.z, opt.depth_sigma).value;
  }
  const double n = static_cast<double>(pred.size());
  return {sum.cls / n,   sum.size2d / n, sum.xy3d / n,  sum.giou / n,
          sum.size3d / n, sum.angle / n,  sum.depth / n, 0.0};
}

}  // namespace gpk
