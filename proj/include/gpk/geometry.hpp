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

// Closed-form projective and plane geometry for a roadside pinhole camera.
//
// Camera frame: x right, y down, z forward. A ground plane is stored as
// (alpha, beta, gamma, d) with a unit normal and d > 0, so the normal points
// from the ground toward the camera and d is the camera height above it.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "gpk/errors.hpp"

namespace gpk {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Pixel {
  double u = 0.0;  // column
  double v = 0.0;  // row
};

class CameraIntrinsics {
 public:
  // Throws GeometryError(kInvalidCamera) unless fx, fy > 0 and all finite.
  CameraIntrinsics(double fx, double fy, double cx, double cy);

  double fx() const noexcept { return fx_; }
  double fy() const noexcept { return fy_; }
  double cx() const noexcept { return cx_; }
  double cy() const noexcept { return cy_; }

  Mat3 matrix() const;
  Mat3 inverse() const;

  // Intrinsics of the same camera sampled on a grid `stride` times coarser.
  CameraIntrinsics downscaled(int stride) const;

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;

 private:
  double fx_, fy_, cx_, cy_;
};

// World/ground frame to camera frame: p_cam = rotation * p_world + translation.
class CameraExtrinsics {
 public:
  // Throws GeometryError(kInvalidCamera) when rotation is not a proper
  // rotation within 1e-9.
  CameraExtrinsics(const Mat3& rotation, const Vec3& translation);

  const Mat3& rotation() const noexcept { return rotation_; }
  const Vec3& translation() const noexcept { return translation_; }

  Vec3 to_camera(const Vec3& p_world) const { return rotation_ * p_world + translation_; }

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

struct CameraRig {
  CameraIntrinsics intrinsics;
  CameraExtrinsics extrinsics;
};

class GroundPlane {
 public:
  // Normalizes an arbitrary (a, b, c, d) to unit normal with d > 0.
  // Throws kDegeneratePlane for a zero normal, d == 0 or non-finite input.
  static GroundPlane from_raw(double a, double b, double c, double d);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return gamma_; }
  double d() const noexcept { return d_; }

  Vec3 normal() const { return {alpha_, beta_, gamma_}; }
  Eigen::Vector4d coefficients() const { return {alpha_, beta_, gamma_, d_}; }

  // alpha*x + beta*y + gamma*z + d; positive on the camera side.
  double signed_distance(const Vec3& p) const {
    return alpha_ * p.x() + beta_ * p.y() + gamma_ * p.z() + d_;
  }

  // Plane expressed in a camera frame rotated by `r` about its center.
  GroundPlane rotated(const Mat3& r) const;

  friend bool operator==(const GroundPlane&, const GroundPlane&) = default;

 private:
  GroundPlane(double a, double b, double c, double d) : alpha_(a), beta_(b), gamma_(c), d_(d) {}

  double alpha_, beta_, gamma_, d_;
};

struct CameraAttitude {
  double roll = 0.0;    // radians, about camera z
  double pitch = 0.0;   // radians, about camera x, positive looking down
  double height = 0.0;  // meters above the ground plane
};

struct BBox3D {
  double x = 0.0, y = 0.0, z = 0.0;  // center, camera frame
  double l = 0.0, w = 0.0, h = 0.0;
  double theta = 0.0;  // yaw, [-pi, pi)

  friend bool operator==(const BBox3D&, const BBox3D&) = default;
};

// Tolerance on |n . ray| below which a viewing ray counts as parallel.
inline constexpr double kHorizonTolerance = 1e-12;

Pixel project_point(const Vec3& p, const CameraIntrinsics& k);

// Un-normalized viewing ray (z component 1) through a pixel.
Vec3 pixel_ray(const Pixel& px, const CameraIntrinsics& k);

double ground_depth_at_pixel(const Pixel& px, const CameraIntrinsics& k, const GroundPlane& g);

// Camera-frame point where the pixel ray meets the plane.
Vec3 backproject_to_ground(const Pixel& px, const CameraIntrinsics& k, const GroundPlane& g);

GroundPlane plane_from_three_points(const Vec3& p1, const Vec3& p2, const Vec3& p3);

CameraAttitude plane_to_attitude(const GroundPlane& g);
GroundPlane attitude_to_plane(const CameraAttitude& a);

// Rotation taking the level-camera up vector (0, -1, 0) to the ground normal
// of a camera with this attitude: Rz(roll) * Rx(pitch).
Mat3 attitude_rotation(double roll, double pitch);

// Extrinsics of a camera at `attitude` above a ground frame with x right,
// y forward, z up and origin on the ground directly below the camera.
CameraExtrinsics extrinsics_from_attitude(const CameraAttitude& attitude);

Vec3 bottom_center(const BBox3D& b, const GroundPlane& ground);

Mat3 rotation_x(double angle);
Mat3 rotation_z(double angle);

// Camera-frame mount disturbance Rx(dpitch) * Rz(droll).
Mat3 perturbation_rotation(double droll, double dpitch);

CameraExtrinsics perturb_extrinsics(const CameraExtrinsics& e, double droll, double dpitch);

// K * R * K^-1 for the disturbance rotation; maps clean pixels to the
// pixels of the rotated camera. The plane argument is validated only: a pure
// rotation induces the same homography for every scene point.
Mat3 ground_homography(const CameraIntrinsics& k, const GroundPlane& g, double droll,
                       double dpitch);

Pixel apply_homography(const Mat3& h, const Pixel& px);

// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

}  // namespace gpk
