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

#include <doctest.h>

#include <numbers>
#include <random>

#include "gpk/errors.hpp"
#include "gpk/losses.hpp"
#include "oracles.hpp"

using namespace gpk;

TEST_CASE("laplace depth loss values") {
  const LaplaceLoss zero = laplace_depth_loss(30.0, 30.0, 1.0);
  CHECK(zero.value == 0.0);
  const LaplaceLoss one = laplace_depth_loss(31.0, 30.0, 1.0);
  CHECK(one.value == 2.0);
  CHECK(one.d_dsigma == -1.0);
  CHECK(one.d_dpred == 2.0);
  CHECK(laplace_depth_loss(29.0, 30.0, 1.0).d_dpred == -2.0);
  CHECK_THROWS_AS(laplace_depth_loss(1, 2, 0.0), DomainError);
  CHECK_THROWS_AS(laplace_depth_loss(1, 2, -1.0), DomainError);
}

TEST_CASE("laplace loss is minimized over sigma at 2|delta|") {
  for (double delta : {0.3, 1.0, 7.5}) {
    const double best = 2.0 * delta;
    const double at = laplace_depth_loss(10.0 + delta, 10.0, best).value;
    CHECK(std::abs(laplace_depth_loss(10.0 + delta, 10.0, best).d_dsigma) < 1e-12);
    CHECK(laplace_depth_loss(10.0 + delta, 10.0, best * 0.9).value > at);
    CHECK(laplace_depth_loss(10.0 + delta, 10.0, best * 1.1).value > at);
  }
}

TEST_CASE("analytic gradients match central differences") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> depth(5, 150), off(-20, 20), sig(0.2, 5), prob(0.02, 0.98);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double gt = depth(rng);
    double d = off(rng);
    if (std::abs(d) < 1e-3) d = 1e-3;  // stay away from the kink
    const double pred = gt + d;
    const double sigma = sig(rng);
    const LaplaceLoss l = laplace_depth_loss(pred, gt, sigma);
    const double num_pred = oracle::central_difference(
        [&](double x) { return laplace_depth_loss(x, gt, sigma).value; }, pred);
    const double num_sigma = oracle::central_difference(
        [&](double s) { return laplace_depth_loss(pred, gt, s).value; }, sigma);
    worst = std::max({worst, oracle::relative_error(l.d_dpred, num_pred),
                      oracle::relative_error(l.d_dsigma, num_sigma)});

    const double p = prob(rng);
    for (int target : {0, 1}) {
      const double num = oracle::central_difference([&](double x) { return focal_loss(x, target); }, p, 1e-6);
      worst = std::max(worst, oracle::relative_error(focal_loss_grad(p, target), num));
    }

    const std::vector<double> a{pred, gt, sigma}, b{gt, pred - 0.5, sigma + 0.25};
    const auto g = l1_loss_grad(a, b);
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double num = oracle::central_difference(
          [&](double x) {
            auto m = a;
            m[k] = x;
            return l1_loss(m, b);
          },
          a[k]);
      worst = std::max(worst, oracle::relative_error(g[k], num));
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("focal loss") {
  CHECK(focal_loss(0.9, 1) == doctest::Approx(-0.25 * 0.01 * std::log(0.9)));
  CHECK(focal_loss(0.1, 0) == doctest::Approx(-0.75 * 0.01 * std::log(0.9)));
  CHECK(focal_loss(0.5, 1, 0.0, 1.0) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(focal_loss(0.0, 1), DomainError);
  CHECK_THROWS_AS(focal_loss(1.0, 0), DomainError);
  CHECK_THROWS_AS(focal_loss(0.5, 2), DomainError);
}

TEST_CASE("L1 loss") {
  const std::vector<double> a{1, 2, 3}, b{1, 0, 4};
  CHECK(l1_loss(a, b) == 1.0);
  CHECK(l1_loss(a, a) == 0.0);
  const std::vector<double> c{1};
  CHECK_THROWS_AS(l1_loss(a, c), DimensionMismatch);
}

TEST_CASE("GIoU against integer-grid counting") {
  const Box2D a{10, 10, 50, 40};
  CHECK(giou_loss_2d(a, a) == 0.0);
  CHECK(box_area(a) == 1200.0);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> pos(0, 60), len(1, 30);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int l1 = pos(rng), t1 = pos(rng), l2 = pos(rng), t2 = pos(rng);
    const std::array<int, 4> ia{l1, t1, l1 + len(rng), t1 + len(rng)};
    const std::array<int, 4> ib{l2, t2, l2 + len(rng), t2 + len(rng)};
    const Box2D ba{double(ia[0]), double(ia[1]), double(ia[2]), double(ia[3])};
    const Box2D bb{double(ib[0]), double(ib[1]), double(ib[2]), double(ib[3])};
    const double ref = oracle::giou_by_counting(ia, ib);
    worst = std::max(worst, std::abs(generalized_iou(ba, bb) - ref));
    const double loss = giou_loss_2d(ba, bb);
    CHECK(loss >= 0.0);
    CHECK(loss < 2.0);
  }
  CHECK(worst < 1e-12);
  // Far-apart small boxes approach the upper bound.
  CHECK(giou_loss_2d({0, 0, 1, 1}, {1000, 1000, 1001, 1001}) > 1.99);
  CHECK_THROWS_AS(giou_loss_2d({0, 0, 0, 1}, a), DomainError);
}

TEST_CASE("angle loss wraps") {
  CHECK(angle_l1_loss(0.1, -0.1) == doctest::Approx(0.2));
  CHECK(angle_l1_loss(std::numbers::pi - 0.05, -std::numbers::pi + 0.05) == doctest::Approx(0.1));
}

TEST_CASE("total loss") {
  CHECK(total_loss({}) == 0.0);
  const LossComponents unit{1, 1, 1, 1, 1, 1, 1, 1};
  CHECK(total_loss(unit) == 23.0);
  // Linear in each component.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 3);
  for (int i = 0; i < 50; ++i) {
    LossComponents c{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
    const double base = total_loss(c);
    LossComponents d = c;
    d.xy3d += 1.0;
    CHECK(total_loss(d) == doctest::Approx(base + 5.0));
  }
  LossWeights bad;
  bad.w[2] = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("frame losses of identical predictions are zero") {
  const CameraIntrinsics k(400, 400, 464, 256);
  ObjectLabel o;
  o.category = "Car";
  o.box2d = {400, 250, 520, 300};
  o.box = {1.0, 4.0, 30.0, 4.2, 1.8, 1.5, 0.3};
  const std::vector<ObjectLabel> labels{o, o};
  const LossComponents c = frame_losses(labels, labels, k);
  for (double x : c.as_array()) CHECK(x == 0.0);

  std::vector<ObjectLabel> pred = labels;
  pred[0].category = "Van";
  CHECK_THROWS_AS(frame_losses(pred, labels, k), DomainError);
  pred[0].score = 0.8;
  const LossComponents p = frame_losses(pred, labels, k);
  CHECK(p.cls > 0.0);
  const std::vector<ObjectLabel> one{o};
  CHECK_THROWS_AS(frame_losses(one, labels, k), DimensionMismatch);
}
