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

#include "gpk/map_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <system_error>

namespace gpk {

namespace {

constexpr char kMagic[4] = {'G', 'P', 'K', 'M'};
constexpr std::size_t kHeaderSize = 21;

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::vector<std::uint8_t> encode_gpkm(const GpkmImage& image) {
  const std::size_t pixels = static_cast<std::size_t>(image.height) * image.width;
  if (image.values.size() != pixels * image.channels) {
    throw FormatError("GPKM payload size does not match its dimensions");
  }
  if (!image.mask.empty() && image.mask.size() != pixels) {
    throw FormatError("GPKM mask size does not match its dimensions");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + 4 * image.values.size() + (pixels + 7) / 8);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kGpkmVersion);
  put_u32(out, image.height);
  put_u32(out, image.width);
  put_u32(out, image.channels);
  out.push_back(image.mask.empty() ? 0 : 1);
  for (float f : image.values) put_u32(out, std::bit_cast<std::uint32_t>(f));
  if (!image.mask.empty()) {
    std::vector<std::uint8_t> bits((pixels + 7) / 8, 0);
    for (std::size_t i = 0; i < pixels; ++i) {
      if (image.mask[i]) bits[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    }
    out.insert(out.end(), bits.begin(), bits.end());
  }
  return out;
}

GpkmImage decode_gpkm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("not a GPKM file");
  }
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kGpkmVersion) {
    throw FormatError("unsupported GPKM version " + std::to_string(version));
  }
  GpkmImage image;
  image.height = get_u32(bytes.data() + 8);
  image.width = get_u32(bytes.data() + 12);
  image.channels = get_u32(bytes.data() + 16);
  const std::uint8_t flag = bytes[20];
  if (flag > 1) throw FormatError("invalid GPKM mask flag");

  const std::size_t pixels = static_cast<std::size_t>(image.height) * image.width;
  const std::size_t count = pixels * image.channels;
  const std::size_t mask_bytes = flag ? (pixels + 7) / 8 : 0;
  if (bytes.size() != kHeaderSize + 4 * count + mask_bytes) {
    throw FormatError("GPKM size mismatch: expected " +
                      std::to_string(kHeaderSize + 4 * count + mask_bytes) + " bytes, got " +
                      std::to_string(bytes.size()));
  }
  image.values.resize(count);
  const std::uint8_t* p = bytes.data() + kHeaderSize;
  for (std::size_t i = 0; i < count; ++i) image.values[i] = std::bit_cast<float>(get_u32(p + 4 * i));
  if (flag) {
    const std::uint8_t* m = p + 4 * count;
    image.mask.resize(pixels);
    for (std::size_t i = 0; i < pixels; ++i) image.mask[i] = ((m[i / 8] >> (i % 8)) & 1u) != 0;
    const std::size_t tail = pixels % 8;
    if (tail != 0 && (m[mask_bytes - 1] >> tail) != 0) {
      throw FormatError("GPKM mask padding bits are not zero");
    }
  }
  return image;
}

GpkmImage to_gpkm(const GroundDepthMap& map) {
  GpkmImage image;
  image.height = static_cast<std::uint32_t>(map.height());
  image.width = static_cast<std::uint32_t>(map.width());
  image.channels = 1;
  const auto values = map.values();
  const auto mask = map.mask();
  image.values.reserve(values.size());
  image.mask.reserve(mask.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    image.values.push_back(mask[i] ? static_cast<float>(values[i]) : 0.0f);
    image.mask.push_back(mask[i] != 0);
  }
  return image;
}

GpkmImage to_gpkm(const DenormMap& map) {
  GpkmImage image;
  image.height = static_cast<std::uint32_t>(map.height());
  image.width = static_cast<std::uint32_t>(map.width());
  image.channels = DenormMap::kChannels;
  image.values.reserve(map.values().size());
  for (double x : map.values()) image.values.push_back(static_cast<float>(x));
  return image;
}

GroundDepthMap depth_map_from_gpkm(const GpkmImage& image) {
  if (image.channels != 1 || image.mask.empty()) {
    throw FormatError("depth maps need 1 channel and a validity mask");
  }
  GroundDepthMap map(image.height, image.width);
  for (std::size_t row = 0; row < image.height; ++row) {
    for (std::size_t col = 0; col < image.width; ++col) {
      const std::size_t i = row * image.width + col;
      if (image.mask[i]) {
        if (!(image.values[i] > 0.0f)) throw FormatError("valid depth pixel is not positive");
        map.set(row, col, image.values[i]);
      }
    }
  }
  return map;
}

DenormMap denorm_map_from_gpkm(const GpkmImage& image) {
  if (image.channels != DenormMap::kChannels || !image.mask.empty()) {
    throw FormatError("denorm maps need 4 channels and no mask");
  }
  return DenormMap::from_values(image.height, image.width,
                                std::vector<double>(image.values.begin(), image.values.end()));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

namespace {

void write_atomic_raw(const std::filesystem::path& path, const char* data, std::size_t size) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + tmp.string());
    out.write(data, static_cast<std::streamsize>(size));
    if (!out) throw std::system_error(errno, std::generic_category(), "short write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  write_atomic_raw(path, reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_atomic_raw(path, text.data(), text.size());
}

void write_depth_map(const std::filesystem::path& path, const GroundDepthMap& map) {
  write_file_atomic(path, encode_gpkm(to_gpkm(map)));
}

void write_denorm_map(const std::filesystem::path& path, const DenormMap& map) {
  write_file_atomic(path, encode_gpkm(to_gpkm(map)));
}

GroundDepthMap read_depth_map(const std::filesystem::path& path) {
  return depth_map_from_gpkm(decode_gpkm(read_file_bytes(path)));
}

DenormMap read_denorm_map(const std::filesystem::path& path) {
  return denorm_map_from_gpkm(decode_gpkm(read_file_bytes(path)));
}

}  // namespace gpk
