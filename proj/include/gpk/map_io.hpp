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

// GPKM map files.
//
//   offset  size  field
//   0       4     magic "GPKM"
//   4       4     u32 version (1)
//   8       4     u32 height
//   12      4     u32 width
//   16      4     u32 channels (1 depth, 4 denorm)
//   20      1     u8 mask-present flag (0 or 1)
//   21      4*h*w*c  f32 payload, row-major, channels interleaved
//   ...     ceil(h*w/8)  validity bits, row-major, LSB first (if flagged)
//
// All integers and floats are little-endian. Invalid depth pixels store 0.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gpk/ground_maps.hpp"

namespace gpk {

inline constexpr std::uint32_t kGpkmVersion = 1;

// Decoded file contents; the generic view used for byte-level round trips.
struct GpkmImage {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;
  std::vector<float> values;
  std::vector<bool> mask;  // empty when the file carries no mask

  friend bool operator==(const GpkmImage&, const GpkmImage&) = default;
};

std::vector<std::uint8_t> encode_gpkm(const GpkmImage& image);
GpkmImage decode_gpkm(const std::vector<std::uint8_t>& bytes);

GpkmImage to_gpkm(const GroundDepthMap& map);
GpkmImage to_gpkm(const DenormMap& map);
GroundDepthMap depth_map_from_gpkm(const GpkmImage& image);
DenormMap denorm_map_from_gpkm(const GpkmImage& image);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

// Writes to a sibling temporary and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

void write_depth_map(const std::filesystem::path& path, const GroundDepthMap& map);
void write_denorm_map(const std::filesystem::path& path, const DenormMap& map);
GroundDepthMap read_depth_map(const std::filesystem::path& path);
DenormMap read_denorm_map(const std::filesystem::path& path);

}  // namespace gpk
