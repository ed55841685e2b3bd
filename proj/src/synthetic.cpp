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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "gpk/dataset_io.hpp"

namespace gpk {

namespace {

constexpr int kMaxPlacementAttempts = 2000;

double draw(std::mt19937_64& rng, const Interval& range) {
  if (range.lo == range.hi) return range.lo;
  return std::uniform_real_distribution<double>(range.lo, range.hi)(rng);
}

void check_config(const SceneConfig& cfg) {
  const std::pair<const char*, const Interval*> ranges[] = {
      {"roll", &cfg.roll}, {"pitch", &cfg.pitch}, {"height", &cfg.height}, {"depth", &cfg.depth}};
  for (const auto& [name, r] : ranges) {
    if (!std::isfinite(r->lo) || !std::isfinite(r->hi) || !r->valid()) {
      throw ConfigError(std::string("empty ") + name + " range");
    }
  }
  if (!(cfg.height.lo > 0.0)) throw ConfigError("camera height must be positive");
  if (!(cfg.depth.lo > 0.0)) throw ConfigError("object depths must be positive");
  if (cfg.objects_per_frame < 0 || cfg.frames < 0) throw ConfigError("negative counts");
  if (cfg.image_height <= 0 || cfg.image_width <= 0) throw ConfigError("empty image");
  if (!(cfg.focal > 0.0)) throw ConfigError("focal length must be positive");
}

// Orthonormal frame of a gravity-aligned box sitting on `ground`: heading,
// lateral, up. Heading is the camera x axis projected onto the ground,
// rotated by theta about the up axis.
std::array<Vec3, 3> box_axes(const GroundPlane& ground, double theta) {
  const Vec3 up = ground.normal();
  const Vec3 ex = (Vec3::UnitX() - Vec3::UnitX().dot(up) * up).normalized();
  const Vec3 ez = up.cross(ex);
  const Vec3 heading = std::cos(theta) * ex - std::sin(theta) * ez;
  return {heading, up.cross(heading), up};
}

std::array<Vec3, 8> box_corners(const BBox3D& b, const GroundPlane& ground) {
  const auto [heading, lateral, up] = box_axes(ground, b.theta);
  const Vec3 c(b.x, b.y, b.z);
  std::array<Vec3, 8> out;
  int i = 0;
  for (double sl : {-0.5, 0.5}) {
    for (double sw : {-0.5, 0.5}) {
      for (double sh : {-0.5, 0.5}) {
        out[i++] = c + sl * b.l * heading + sw * b.w * lateral + sh * b.h * up;
      }
    }
  }
  return out;
}

}  // namespace

CameraIntrinsics SceneConfig::intrinsics() const {
  return {focal, focal, 0.5 * image_width, 0.5 * image_height};
}

std::string describe(const SceneConfig& cfg) {
  std::ostringstream out;
  const auto interval = [&](const char* key, const Interval& r) {
    out << key << '=' << format_real(r.lo) << ',' << format_real(r.hi) << '\n';
  };
  interval("roll", cfg.roll);
  interval("pitch", cfg.pitch);
  interval("height", cfg.height);
  interval("depth", cfg.depth);
  out << "objects_per_frame=" << cfg.objects_per_frame << '\n'
      << "frames=" << cfg.frames << '\n'
      << "image=" << cfg.image_height << 'x' << cfg.image_width << '\n'
      << "focal=" << format_real(cfg.focal) << '\n'
      << "seed=" << cfg.seed << '\n';
  return out.str();
}

std::uint64_t frame_seed(std::uint64_t seed, std::uint64_t frame_index) {
  // splitmix64 finalizer over the (seed, index) pair.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (frame_index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

FrameRecord synthesize_frame(const SceneConfig& cfg, int frame_index) {
  check_config(cfg);
  std::mt19937_64 rng(frame_seed(cfg.seed, static_cast<std::uint64_t>(frame_index)));

  CameraAttitude attitude;
  attitude.roll = draw(rng, cfg.roll);
  attitude.pitch = draw(rng, cfg.pitch);
  attitude.height = draw(rng, cfg.height);
  const GroundPlane ground = attitude_to_plane(attitude);
  const CameraIntrinsics k = cfg.intrinsics();

  char id[16];
  std::snprintf(id, sizeof(id), "%06d", frame_index);
  FrameRecord frame{id, {}, {k, extrinsics_from_attitude(attitude)}, ground};

  const double width = cfg.image_width;
  const double height = cfg.image_height;
  const auto inside = [&](const Pixel& px) {
    return px.u >= 0.0 && px.u < width && px.v >= 0.0 && px.v < height;
  };

  for (int n = 0; n < cfg.objects_per_frame; ++n) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      BBox3D box;
      box.l = std::uniform_real_distribution<double>(3.8, 4.8)(rng);
      box.w = std::uniform_real_distribution<double>(1.6, 2.0)(rng);
      box.h = std::uniform_real_distribution<double>(1.4, 1.7)(rng);
      box.theta = std::uniform_real_distribution<double>(-std::numbers::pi, std::numbers::pi)(rng);
      const double z = draw(rng, cfg.depth);
      const double u = std::uniform_real_distribution<double>(0.0, width)(rng);

      // Ground point with camera depth z on the column u.
      const double x = (u - k.cx()) * z / k.fx();
      const double y = -(ground.d() + ground.alpha() * x + ground.gamma() * z) / ground.beta();
      const Vec3 bottom(x, y, z);
      const Vec3 center = bottom + 0.5 * box.h * ground.normal();
      box.x = center.x();
      box.y = center.y();
      box.z = center.z();

      Box2D rect{width, height, 0.0, 0.0};
      bool visible = true;
      for (const auto& corner : box_corners(box, ground)) {
        if (!(corner.z() > 0.1)) {
          visible = false;
          break;
        }
        const Pixel px = project_point(corner, k);
        if (!inside(px)) {
          visible = false;
          break;
        }
        rect.left = std::min(rect.left, px.u);
        rect.top = std::min(rect.top, px.v);
        rect.right = std::max(rect.right, px.u);
        rect.bottom = std::max(rect.bottom, px.v);
      }
      if (!visible || !inside(project_point(bottom, k))) continue;

      ObjectLabel obj;
      obj.category = "Car";
      obj.alpha = wrap_angle(box.theta - std::atan2(box.x, box.z));
      obj.box2d = rect;
      obj.box = box;
      frame.objects.push_back(obj);
      placed = true;
    }
    if (!placed) {
      throw ConfigError("could not place an object inside the image after " +
                        std::to_string(kMaxPlacementAttempts) + " attempts");
    }
  }
  return frame;
}

std::vector<FrameRecord> synthesize_scene(const SceneConfig& cfg) {
  check_config(cfg);
  std::vector<FrameRecord> frames;
  frames.reserve(static_cast<std::size_t>(cfg.frames));
  for (int i = 0; i < cfg.frames; ++i) frames.push_back(synthesize_frame(cfg, i));
  return frames;
}

std::vector<std::string> validate_frame(const FrameRecord& frame, int image_height,
                                        int image_width) {
  std::vector<std::string> problems;
  const auto& k = frame.rig.intrinsics;
  for (std::size_t i = 0; i < frame.objects.size(); ++i) {
    const auto& b = frame.objects[i].box;
    const std::string tag = frame.id + " object " + std::to_string(i) + ": ";
    if (!(b.l > 0.0 && b.w > 0.0 && b.h > 0.0)) problems.push_back(tag + "non-positive size");
    if (!(b.theta >= -std::numbers::pi && b.theta < std::numbers::pi)) {
      problems.push_back(tag + "yaw outside [-pi, pi)");
    }
    const Vec3 bottom = bottom_center(b, frame.ground);
    if (std::abs(frame.ground.signed_distance(bottom)) >= 1e-9) {
      problems.push_back(tag + "bottom center is off the ground plane");
    }
    if (!(bottom.z() > 0.0)) {
      problems.push_back(tag + "behind the camera");
      continue;
    }
    const Pixel px = project_point(bottom, k);
    if (px.u < 0.0 || px.u >= image_width || px.v < 0.0 || px.v >= image_height) {
      problems.push_back(tag + "bottom center projects outside the image");
    }
  }
  return problems;
}

}  // namespace gpk
