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

#include "gpk/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gpk/map_io.hpp"

namespace gpk {

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) tokens.push_back({line.substr(start, i - start), start + 1});
  }
  return tokens;
}

double parse_real(const Token& t, std::size_t line) {
  double value = 0.0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  if (!t.text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(line, t.column, "expected a real number, got '" + std::string(t.text) + "'");
  }
  if (!std::isfinite(value)) {
    throw ParseError(line, t.column, "non-finite value '" + std::string(t.text) + "'");
  }
  return value;
}

// Splits into lines, keeping 1-based numbers; the last empty piece after a
// trailing newline is dropped.
std::vector<std::pair<std::size_t, std::string_view>> split_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t number = 1;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    lines.emplace_back(number++, text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

void append_real(std::string& out, double x) {
  if (!out.empty() && out.back() != '\n') out.push_back(' ');
  out += format_real(x);
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

constexpr std::size_t kLabelFields = 15;

}  // namespace

std::string format_real(double x) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw std::runtime_error("cannot format real");
  return {buf.data(), ptr};
}

std::vector<ObjectLabel> parse_labels(std::string_view text, bool allow_score) {
  std::vector<ObjectLabel> out;
  for (const auto& [number, line] : split_lines(text)) {
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    const std::size_t max_fields = allow_score ? kLabelFields + 1 : kLabelFields;
    if (tokens.size() < kLabelFields) {
      throw ParseError(number, line.size() + 1,
                       "expected " + std::to_string(kLabelFields) + " fields, got " +
                           std::to_string(tokens.size()));
    }
    if (tokens.size() > max_fields) {
      throw ParseError(number, tokens[max_fields].column, "unexpected trailing field");
    }
    ObjectLabel obj;
    obj.category = std::string(tokens[0].text);
    double f[kLabelFields];
    for (std::size_t i = 1; i < kLabelFields; ++i) f[i] = parse_real(tokens[i], number);
    obj.truncated = f[1];
    obj.occluded = f[2];
    obj.alpha = f[3];
    obj.box2d = {f[4], f[5], f[6], f[7]};
    obj.box.h = f[8];
    obj.box.w = f[9];
    obj.box.l = f[10];
    obj.box.x = f[11];
    obj.box.y = f[12];
    obj.box.z = f[13];
    obj.box.theta = f[14];
    for (std::size_t i : {8u, 9u, 10u}) {
      if (!(f[i] > 0.0)) throw ParseError(number, tokens[i].column, "box dimensions must be positive");
    }
    if (tokens.size() == kLabelFields + 1) obj.score = parse_real(tokens[kLabelFields], number);
    out.push_back(std::move(obj));
  }
  return out;
}

std::string serialize_labels(const std::vector<ObjectLabel>& objects) {
  std::string out;
  for (const auto& o : objects) {
    std::string line = o.category;
    for (double x : {o.truncated, o.occluded, o.alpha, o.box2d.left, o.box2d.top, o.box2d.right,
                     o.box2d.bottom, o.box.h, o.box.w, o.box.l, o.box.x, o.box.y, o.box.z,
                     o.box.theta}) {
      append_real(line, x);
    }
    if (o.score) append_real(line, *o.score);
    out += line;
    out += '\n';
  }
  return out;
}

CameraRig parse_calibration(std::string_view text, const CalibKeys& keys) {
  std::optional<std::array<double, 12>> proj, extr;
  std::size_t proj_line = 0;
  for (const auto& [number, line] : split_lines(text)) {
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    std::string_view key = tokens[0].text;
    if (key.empty() || key.back() != ':') {
      throw ParseError(number, tokens[0].column, "expected 'key:' at line start");
    }
    key.remove_suffix(1);
    if (key != keys.projection && key != keys.extrinsics) continue;
    if (tokens.size() != 13) {
      throw ParseError(number, tokens.back().column,
                       "key '" + std::string(key) + "' needs 12 values, got " +
                           std::to_string(tokens.size() - 1));
    }
    std::array<double, 12> values{};
    for (std::size_t i = 0; i < 12; ++i) values[i] = parse_real(tokens[i + 1], number);
    auto& slot = key == keys.projection ? proj : extr;
    if (slot) throw ParseError(number, 1, "duplicate key '" + std::string(key) + "'");
    slot = values;
    if (key == keys.projection) proj_line = number;
  }
  if (!proj) throw ParseError(0, 0, "missing calibration key '" + keys.projection + "'");
  if (!extr) throw ParseError(0, 0, "missing calibration key '" + keys.extrinsics + "'");

  const auto& p = *proj;
  if (p[1] != 0.0 || p[3] != 0.0 || p[4] != 0.0 || p[7] != 0.0 || p[8] != 0.0 || p[9] != 0.0 ||
      p[10] != 1.0 || p[11] != 0.0) {
    throw ParseError(proj_line, 1, "projection must be [K | 0] with zero skew");
  }
  Mat3 r;
  Vec3 t;
  const auto& e = *extr;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r(row, col) = e[row * 4 + col];
    t(row) = e[row * 4 + 3];
  }
  try {
    return {CameraIntrinsics(p[0], p[5], p[2], p[6]), CameraExtrinsics(r, t)};
  } catch (const GeometryError& err) {
    throw ParseError(proj_line, 1, err.what());
  }
}

std::string serialize_calibration(const CameraRig& rig, const CalibKeys& keys) {
  const auto& k = rig.intrinsics;
  std::string out = keys.projection + ":";
  for (double x : {k.fx(), 0.0, k.cx(), 0.0, 0.0, k.fy(), k.cy(), 0.0, 0.0, 0.0, 1.0, 0.0}) {
    out += ' ';
    out += format_real(x);
  }
  out += '\n';
  out += keys.extrinsics + ":";
  const auto& r = rig.extrinsics.rotation();
  const auto& t = rig.extrinsics.translation();
  for (int row = 0; row < 3; ++row) {
    for (double x : {r(row, 0), r(row, 1), r(row, 2), t(row)}) {
      out += ' ';
      out += format_real(x);
    }
  }
  out += '\n';
  return out;
}

GroundPlane parse_ground_plane(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t number = 0;
  for (const auto& [n, line] : split_lines(text)) {
    auto t = tokenize(line);
    if (t.empty()) continue;
    if (!tokens.empty()) throw ParseError(n, t[0].column, "ground plane must be a single line");
    tokens = std::move(t);
    number = n;
  }
  if (tokens.size() != 4) {
    throw ParseError(number, tokens.empty() ? 1 : tokens.back().column,
                     "expected 4 values, got " + std::to_string(tokens.size()));
  }
  double v[4];
  for (std::size_t i = 0; i < 4; ++i) v[i] = parse_real(tokens[i], number);
  return GroundPlane::from_raw(v[0], v[1], v[2], v[3]);
}

std::string serialize_ground_plane(const GroundPlane& g) {
  std::string out;
  for (double x : {g.alpha(), g.beta(), g.gamma(), g.d()}) append_real(out, x);
  out += '\n';
  return out;
}

FrameDirs FrameDirs::under(const std::filesystem::path& root) {
  return {root / "calib", root / "label", root / "denorm"};
}

void write_frame(const FrameDirs& dirs, const FrameRecord& frame) {
  const std::string name = frame.id + ".txt";
  write_file_atomic(dirs.calib / name, serialize_calibration(frame.rig));
  write_file_atomic(dirs.label / name, serialize_labels(frame.objects));
  write_file_atomic(dirs.denorm / name, serialize_ground_plane(frame.ground));
}

std::vector<std::string> list_frame_ids(const FrameDirs& dirs) {
  for (const auto& d : {dirs.calib, dirs.label, dirs.denorm}) {
    if (!std::filesystem::is_directory(d)) {
      throw std::runtime_error("missing input directory " + d.string());
    }
  }
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dirs.label)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

FrameRecord load_frame(const FrameDirs& dirs, const std::string& id, const CalibKeys& keys) {
  const std::string name = id + ".txt";
  const auto calib_path = dirs.calib / name;
  const auto label_path = dirs.label / name;
  const auto denorm_path = dirs.denorm / name;
  auto parse = [](const std::filesystem::path& path, auto&& fn) {
    try {
      return fn(read_text(path));
    } catch (const ParseError& e) {
      throw ParseError(e.line(), e.column(), path.string() + ": " + e.reason());
    }
  };
  CameraRig rig = parse(calib_path, [&](const std::string& t) { return parse_calibration(t, keys); });
  auto objects = parse(label_path, [](const std::string& t) { return parse_labels(t); });
  GroundPlane ground = parse(denorm_path, [](const std::string& t) { return parse_ground_plane(t); });
  return {id, std::move(objects), rig, ground};
}

}  // namespace gpk
