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

#include "gpk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gpk {

std::string_view to_string(GeometryErrc code) {
  switch (code) {
    case GeometryErrc::kNonPositiveDepth: return "NonPositiveDepth";
    case GeometryErrc::kHorizonRay: return "HorizonRay";
    case GeometryErrc::kBehindCamera: return "BehindCamera";
    case GeometryErrc::kCollinearPoints: return "CollinearPoints";
    case GeometryErrc::kDegeneratePlane: return "DegeneratePlane";
    case GeometryErrc::kSingularIntrinsics: return "SingularIntrinsics";
    case GeometryErrc::kInvalidCamera: return "InvalidCamera";
    case GeometryErrc::kInsufficientPoints: return "InsufficientPoints";
    case GeometryErrc::kAllDegenerate: return "AllDegenerate";
  }
  return "Unknown";
}

namespace {

bool all_finite(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

CameraIntrinsics::CameraIntrinsics(double fx, double fy, double cx, double cy)
    : fx_(fx), fy_(fy), cx_(cx), cy_(cy) {
  if (!all_finite({fx, fy, cx, cy}) || !(fx > 0.0) || !(fy > 0.0)) {
    throw GeometryError(GeometryErrc::kInvalidCamera, "intrinsics need finite fx, fy > 0");
  }
}

Mat3 CameraIntrinsics::matrix() const {
  Mat3 k;
  k << fx_, 0.0, cx_, 0.0, fy_, cy_, 0.0, 0.0, 1.0;
  return k;
}

Mat3 CameraIntrinsics::inverse() const {
  Mat3 k;
  k << 1.0 / fx_, 0.0, -cx_ / fx_, 0.0, 1.0 / fy_, -cy_ / fy_, 0.0, 0.0, 1.0;
  return k;
}

CameraIntrinsics CameraIntrinsics::downscaled(int stride) const {
  if (stride <= 0) throw GeometryError(GeometryErrc::kInvalidCamera, "stride must be positive");
  const double s = static_cast<double>(stride);
  return {fx_ / s, fy_ / s, cx_ / s, cy_ / s};
}

CameraExtrinsics::CameraExtrinsics(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw GeometryError(GeometryErrc::kInvalidCamera, "non-finite extrinsics");
  }
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw GeometryError(GeometryErrc::kInvalidCamera, "extrinsic rotation is not orthonormal");
  }
}

GroundPlane GroundPlane::from_raw(double a, double b, double c, double d) {
  if (!all_finite({a, b, c, d})) {
    throw GeometryError(GeometryErrc::kDegeneratePlane, "non-finite plane coefficients");
  }
  const double norm = std::sqrt(a * a + b * b + c * c);
  if (!(norm > 0.0)) throw GeometryError(GeometryErrc::kDegeneratePlane, "zero normal");
  if (d == 0.0) {
    throw GeometryError(GeometryErrc::kDegeneratePlane, "camera origin lies on the plane");
  }
  // Already-unit normals are left untouched so normalization is idempotent.
  const bool unit = std::abs(norm - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon();
  const double s = (d > 0.0 ? 1.0 : -1.0) / (unit ? 1.0 : norm);
  return {a * s, b * s, c * s, d * s};
}

GroundPlane GroundPlane::rotated(const Mat3& r) const {
  const Vec3 n = r * normal();
  return from_raw(n.x(), n.y(), n.z(), d_);
}

Pixel project_point(const Vec3& p, const CameraIntrinsics& k) {
  if (!(p.z() > 0.0)) {
    throw GeometryError(GeometryErrc::kNonPositiveDepth, "point at or behind the camera plane");
  }
  return {k.fx() * (p.x() / p.z()) + k.cx(), k.fy() * (p.y() / p.z()) + k.cy()};
}

Vec3 pixel_ray(const Pixel& px, const CameraIntrinsics& k) {
  return {(px.u - k.cx()) / k.fx(), (px.v - k.cy()) / k.fy(), 1.0};
}

double ground_depth_at_pixel(const Pixel& px, const CameraIntrinsics& k, const GroundPlane& g) {
  const double denom = g.normal().dot(pixel_ray(px, k));
  if (std::abs(denom) <= kHorizonTolerance) {
    throw GeometryError(GeometryErrc::kHorizonRay, "viewing ray parallel to the ground");
  }
  const double z = -g.d() / denom;
  if (!(z > 0.0)) {
    throw GeometryError(GeometryErrc::kBehindCamera, "ground intersection behind the camera");
  }
  return z;
}

Vec3 backproject_to_ground(const Pixel& px, const CameraIntrinsics& k, const GroundPlane& g) {
  return pixel_ray(px, k) * ground_depth_at_pixel(px, k, g);
}

GroundPlane plane_from_three_points(const Vec3& p1, const Vec3& p2, const Vec3& p3) {
  const double a = (p2.y() - p1.y()) * (p3.z() - p1.z()) - (p3.y() - p1.y()) * (p2.z() - p1.z());
  const double b = (p2.z() - p1.z()) * (p3.x() - p1.x()) - (p3.z() - p1.z()) * (p2.x() - p1.x());
  const double c = (p2.x() - p1.x()) * (p3.y() - p1.y()) - (p3.x() - p1.x()) * (p2.y() - p1.y());
  const double d = -a * p1.x() - b * p1.y() - c * p1.z();

  const double span = std::max({(p2 - p1).squaredNorm(), (p3 - p1).squaredNorm(),
                                (p3 - p2).squaredNorm()});
  const double normal_norm = std::sqrt(a * a + b * b + c * c);
  if (!(span > 0.0) || normal_norm <= 1e-9 * span) {
    throw GeometryError(GeometryErrc::kCollinearPoints, "points do not span a plane");
  }
  const double scale = std::max({p1.norm(), p2.norm(), p3.norm(), 1.0});
  if (std::abs(d) / normal_norm <= 1e-12 * scale) {
    throw GeometryError(GeometryErrc::kDegeneratePlane, "camera origin lies on the plane");
  }
  return GroundPlane::from_raw(a, b, c, d);
}

CameraAttitude plane_to_attitude(const GroundPlane& g) {
  if (!(g.d() > 0.0)) throw GeometryError(GeometryErrc::kDegeneratePlane, "d must be positive");
  // Under the d > 0 convention the stored normal already points up, toward
  // the camera, so no extra orientation flip is needed.
  const double gamma = std::clamp(g.gamma(), -1.0, 1.0);
  return {std::atan2(g.alpha(), -g.beta()), std::asin(-gamma), g.d()};
}

Mat3 rotation_x(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitX()).toRotationMatrix();
}

Mat3 rotation_z(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
}

Mat3 attitude_rotation(double roll, double pitch) { return rotation_z(roll) * rotation_x(pitch); }

GroundPlane attitude_to_plane(const CameraAttitude& a) {
  if (!(a.height > 0.0) || !std::isfinite(a.roll) || !std::isfinite(a.pitch)) {
    throw GeometryError(GeometryErrc::kDegeneratePlane, "attitude needs finite angles, height > 0");
  }
  const double cp = std::cos(a.pitch);
  return GroundPlane::from_raw(cp * std::sin(a.roll), -cp * std::cos(a.roll), -std::sin(a.pitch),
                               a.height);
}

CameraExtrinsics extrinsics_from_attitude(const CameraAttitude& attitude) {
  // Level camera: x_cam = x_world, y_cam = -z_world, z_cam = y_world.
  Mat3 level;
  level << 1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0;
  const Mat3 r = attitude_rotation(attitude.roll, attitude.pitch) * level;
  const Vec3 center(0.0, 0.0, attitude.height);
  return {r, -r * center};
}

Vec3 bottom_center(const BBox3D& b, const GroundPlane& ground) {
  return Vec3(b.x, b.y, b.z) - 0.5 * b.h * ground.normal();
}

Mat3 perturbation_rotation(double droll, double dpitch) {
  return rotation_x(dpitch) * rotation_z(droll);
}

CameraExtrinsics perturb_extrinsics(const CameraExtrinsics& e, double droll, double dpitch) {
  // The mount point (camera center in the world) stays fixed, so the
  // translation rotates with the camera frame.
  const Mat3 p = perturbation_rotation(droll, dpitch);
  return {p * e.rotation(), p * e.translation()};
}

Mat3 ground_homography(const CameraIntrinsics& k, const GroundPlane& g, double droll,
                       double dpitch) {
  (void)g;
  if (!(k.fx() > 0.0) || !(k.fy() > 0.0)) {
    throw GeometryError(GeometryErrc::kSingularIntrinsics, "fx and fy must be positive");
  }
  return k.matrix() * perturbation_rotation(droll, dpitch) * k.inverse();
}

Pixel apply_homography(const Mat3& h, const Pixel& px) {
  const Vec3 q = h * Vec3(px.u, px.v, 1.0);
  return {q.x() / q.z(), q.y() / q.z()};
}

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::fmod(a + std::numbers::pi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  r -= std::numbers::pi;
  return r >= std::numbers::pi ? r - kTwoPi : r;
}

}  // namespace gpk
