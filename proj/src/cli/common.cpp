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

#include "cli/common.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>

#include "gpk/cli.hpp"
#include "gpk/map_io.hpp"

namespace gpk::cli {

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto log = std::make_shared<spdlog::logger>("gpk", std::move(sink));
  log->set_pattern("gpk: %l: %v");
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("GPK_LOG"); env != nullptr && *env != '\0') {
    const auto parsed = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honor "off" when asked for.
    if (parsed != spdlog::level::off || std::string_view(env) == "off") level = parsed;
  }
  log->set_level(level);
  return log;
}

ImageSize parse_resolution(const std::string& text) {
  const auto x = text.find('x');
  ImageSize size;
  const auto parse = [&](std::string_view part, std::size_t& value) {
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    return ec == std::errc() && ptr == part.data() + part.size() && value > 0;
  };
  if (x == std::string::npos || !parse(std::string_view(text).substr(0, x), size.height) ||
      !parse(std::string_view(text).substr(x + 1), size.width)) {
    throw ConfigError("resolution must be HxW with positive integers, got '" + text + "'");
  }
  return size;
}

CalibKeys calib_keys(const Options& o) { return {o.projection_key, o.extrinsics_key}; }

bool has_dataset_input(const Options& o) {
  return !o.input.empty() || !o.calib.empty() || !o.labels.empty() || !o.denorm.empty();
}

FrameDirs dataset_dirs(const Options& o) {
  FrameDirs dirs = o.input.empty() ? FrameDirs{} : FrameDirs::under(o.input);
  if (!o.calib.empty()) dirs.calib = o.calib;
  if (!o.labels.empty()) dirs.label = o.labels;
  if (!o.denorm.empty()) dirs.denorm = o.denorm;
  if (dirs.calib.empty() || dirs.label.empty() || dirs.denorm.empty()) {
    throw ConfigError("dataset input needs --input or all of --calib, --labels, --denorm");
  }
  return dirs;
}

SceneConfig scene_config(const Options& o, std::uint64_t seed) {
  const auto interval = [](const std::vector<double>& v, const char* name) {
    if (v.size() != 2) throw ConfigError(std::string(name) + " range needs two values");
    return Interval{v[0], v[1]};
  };
  const ImageSize image = parse_resolution(o.resolution);
  SceneConfig cfg;
  cfg.roll = interval(o.roll_range, "roll");
  cfg.pitch = interval(o.pitch_range, "pitch");
  cfg.height = interval(o.height_range, "height");
  cfg.depth = interval(o.depth_range, "depth");
  cfg.objects_per_frame = o.objects;
  cfg.frames = o.frames;
  cfg.image_height = static_cast<int>(image.height);
  cfg.image_width = static_cast<int>(image.width);
  cfg.focal = o.focal;
  cfg.seed = seed;
  return cfg;
}

Json source_json(const Options& o) {
  if (has_dataset_input(o)) {
    const FrameDirs dirs = dataset_dirs(o);
    return {{"type", "dataset"},
            {"calib", dirs.calib.generic_string()},
            {"labels", dirs.label.generic_string()},
            {"denorm", dirs.denorm.generic_string()},
            {"projection_key", o.projection_key},
            {"extrinsics_key", o.extrinsics_key}};
  }
  return {{"type", "synthetic"},
          {"frames", o.frames},
          {"objects", o.objects},
          {"focal", o.focal},
          {"roll_range", o.roll_range},
          {"pitch_range", o.pitch_range},
          {"height_range", o.height_range},
          {"depth_range", o.depth_range}};
}

FrameSet collect_frames(const Options& o, std::uint64_t seed, const Context& ctx) {
  FrameSet set;
  if (!has_dataset_input(o)) {
    const SceneConfig cfg = scene_config(o, seed);
    set.frames = synthesize_scene(cfg);
    return set;
  }
  const FrameDirs dirs = dataset_dirs(o);
  const std::vector<std::string> ids = list_frame_ids(dirs);
  set.inputs = {dirs.calib.generic_string(), dirs.label.generic_string(),
                dirs.denorm.generic_string()};
  const CalibKeys keys = calib_keys(o);
  std::vector<std::optional<FrameRecord>> slots(ids.size());
  std::vector<int> codes(ids.size(), 0);
  parallel_for(ids.size(), o.jobs, [&](std::size_t i) {
    try {
      slots[i] = load_frame(dirs, ids[i], keys);
    } catch (...) {
      codes[i] = report_error(ctx, "frame " + ids[i], std::current_exception());
    }
  });
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (slots[i]) set.frames.push_back(std::move(*slots[i]));
    set.exit_code = std::max(set.exit_code, codes[i]);
  }
  return set;
}

int report_error(const Context& ctx, const std::string& where, std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const GeometryError& err) {
    ctx.log->error("{}: {}", where, err.what());
    return kExitGeometry;
  } catch (const DomainError& err) {
    ctx.log->error("{}: {}", where, err.what());
    return kExitGeometry;
  } catch (const std::exception& err) {
    ctx.log->error("{}: {}", where, err.what());
    return kExitInput;
  } catch (...) {
    ctx.log->error("{}: unknown failure", where);
    return kExitInput;
  }
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

Manifest::Manifest(std::string command, Json config)
    : command_(std::move(command)), config_(std::move(config)) {}

void Manifest::add_output(const std::filesystem::path& out_dir, const std::filesystem::path& file) {
  outputs_.push_back(file.lexically_relative(out_dir).generic_string());
}

void Manifest::write(const std::filesystem::path& out_dir) const {
  std::vector<std::string> outputs = outputs_;
  std::sort(outputs.begin(), outputs.end());
  std::uint64_t digest = 14695981039346656037ULL;
  for (const auto& rel : outputs) {
    digest = fnv1a(rel.data(), rel.size(), digest);
    const auto bytes = read_file_bytes(out_dir / rel);
    digest = fnv1a(bytes.data(), bytes.size(), digest);
  }
  const std::string config_text = config_.dump();
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();

  Json j;
  j["command"] = command_;
  j["config"] = config_;
  j["config_digest"] = hex64(fnv1a(config_text.data(), config_text.size()));
  if (seed_) j["seed"] = *seed_;
  j["inputs"] = inputs_;
  j["outputs"] = outputs;
  j["outputs_digest"] = hex64(digest);
  j["counters"] = counters_;
  j["wall_time_s"] = wall;
  write_file_atomic(out_dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace gpk::cli
