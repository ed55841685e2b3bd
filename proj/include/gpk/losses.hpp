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

// Detection training losses with analytic gradients where the network
// output is a scalar.

#pragma once

#include <array>
#include <span>
#include <vector>

#include "gpk/dataset_io.hpp"

namespace gpk {

// Binary focal loss for predicted probability p of the positive class.
// Throws DomainError unless 0 < p < 1.
double focal_loss(double p, int target, double gamma = 2.0, double alpha = 0.25);
double focal_loss_grad(double p, int target, double gamma = 2.0, double alpha = 0.25);

// Mean absolute difference. Throws DimensionMismatch on length mismatch.
double l1_loss(std::span<const double> pred, std::span<const double> target);
// d/d pred[i]: sign(pred[i] - target[i]) / n, 0 at ties.
std::vector<double> l1_loss_grad(std::span<const double> pred, std::span<const double> target);

double box_area(const Box2D& b);
// Generalized IoU in (-1, 1]. Throws DomainError for boxes with
// right <= left or bottom <= top.
double generalized_iou(const Box2D& a, const Box2D& b);
// 1 - GIoU, in [0, 2).
double giou_loss_2d(const Box2D& a, const Box2D& b);

struct LaplaceLoss {
  double value = 0.0;
  double d_dpred = 0.0;
  double d_dsigma = 0.0;
};

// (2 / sigma) |d_gt - d_pred| + log(sigma). Throws DomainError for sigma <= 0.
LaplaceLoss laplace_depth_loss(double d_pred, double d_gt, double sigma);

// |wrap(pred - gt)| with the difference wrapped into (-pi, pi].
double angle_l1_loss(double pred, double gt);

struct LossComponents {
  double cls = 0.0;
  double size2d = 0.0;
  double xy3d = 0.0;
  double giou = 0.0;
  double size3d = 0.0;
  double angle = 0.0;
  double depth = 0.0;
  double denorm = 0.0;

  std::array<double, 8> as_array() const {
    return {cls, size2d, xy3d, giou, size3d, angle, depth, denorm};
  }
};

struct LossWeights {
  std::array<double, 8> w = {2.0, 10.0, 5.0, 2.0, 1.0, 1.0, 1.0, 1.0};

  // Throws ConfigError for negative or non-finite weights.
  void validate() const;
};

// w1 cls + w2 size2d + w3 xy3d + w4 giou + w5 size3d + w6 angle + w7 depth
// + w8 denorm, summed in that order.
double total_loss(const LossComponents& c, const LossWeights& w = {});

struct FrameLossOptions {
  double depth_sigma = 1.0;
  double gamma = 2.0;
  double alpha = 0.25;
};

// Index-matched predictions against labels of one frame, each component
// averaged over objects; denorm is left at 0 for the caller. A prediction
// without a score counts as certain (class loss 0) when its category
// matches and is a DomainError otherwise. Throws DimensionMismatch when the
// object counts differ.
LossComponents frame_losses(std::span<const ObjectLabel> pred, std::span<const ObjectLabel> label,
                            const CameraIntrinsics& k, const FrameLossOptions& opt = {});

}  // namespace gpk
