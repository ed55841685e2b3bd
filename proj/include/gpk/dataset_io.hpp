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

// KITTI-style roadside annotation, calibration and ground-plane files.
//
// Label line (15 fields, 16 with a trailing detection score):
//   category truncated occluded alpha left top right bottom h w l x y z rotation_y [score]
// The location (x y z) is the 3D box center in the camera frame.
//
// Calibration file:
//   P2: 12 reals, row-major [K | 0]
//   Tr_world_to_cam: 12 reals, row-major [R | t]
// Other keys are ignored.
//
// Denorm file: one line with alpha beta gamma d.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpk/geometry.hpp"

namespace gpk {

struct Box2D {
  double left = 0.0, top = 0.0, right = 0.0, bottom = 0.0;

  friend bool operator==(const Box2D&, const Box2D&) = default;
};

struct ObjectLabel {
  std::string category;
  double truncated = 0.0;
  double occluded = 0.0;
  double alpha = 0.0;  // observation angle
  Box2D box2d;
  BBox3D box;
  std::optional<double> score;  // detection results only

  friend bool operator==(const ObjectLabel&, const ObjectLabel&) = default;
};

struct FrameRecord {
  std::string id;
  std::vector<ObjectLabel> objects;
  CameraRig rig;
  GroundPlane ground;
};

struct CalibKeys {
  std::string projection = "P2";
  std::string extrinsics = "Tr_world_to_cam";
};

// Shortest decimal text that parses back to the same double.
std::string format_real(double x);

std::vector<ObjectLabel> parse_labels(std::string_view text, bool allow_score = false);
std::string serialize_labels(const std::vector<ObjectLabel>& objects);

CameraRig parse_calibration(std::string_view text, const CalibKeys& keys = {});
std::string serialize_calibration(const CameraRig& rig, const CalibKeys& keys = {});

GroundPlane parse_ground_plane(std::string_view text);
std::string serialize_ground_plane(const GroundPlane& g);

// Frame directory layout: <root>/{calib,label,denorm}/<id>.txt.
struct FrameDirs {
  std::filesystem::path calib;
  std::filesystem::path label;
  std::filesystem::path denorm;

  static FrameDirs under(const std::filesystem::path& root);
};

void write_frame(const FrameDirs& dirs, const FrameRecord& frame);

// Frame ids are the label file stems, sorted. Throws std::runtime_error for a
// missing directory and ParseError (prefixed with the file) for bad content.
std::vector<std::string> list_frame_ids(const FrameDirs& dirs);
FrameRecord load_frame(const FrameDirs& dirs, const std::string& id, const CalibKeys& keys = {});

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool valid() const { return lo <= hi; }
};

struct SceneConfig {
  Interval roll{-0.01, 0.01};
  Interval pitch{0.1645, 0.1845};
  Interval height{5.8, 6.2};
  Interval depth{10.0, 200.0};
  int objects_per_frame = 20;
  int frames = 50;
  int image_height = 512;
  int image_width = 928;
  double focal = 400.0;
  std::uint64_t seed = 0;

  CameraIntrinsics intrinsics() const;
};

// Canonical one-line-per-key text of a config, used for digests.
std::string describe(const SceneConfig& cfg);

// Independent per-frame stream seed; frame generation order does not matter.
std::uint64_t frame_seed(std::uint64_t seed, std::uint64_t frame_index);

FrameRecord synthesize_frame(const SceneConfig& cfg, int frame_index);
std::vector<FrameRecord> synthesize_scene(const SceneConfig& cfg);

// Geometry checks on a frame; returns a list of human-readable violations.
std::vector<std::string> validate_frame(const FrameRecord& frame, int image_height,
                                        int image_width);

}  // namespace gpk
