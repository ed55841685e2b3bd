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

// Shared plumbing for the subcommands: option storage, input resolution,
// manifests and frame-level parallelism.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/logger.h>

#include "gpk/analysis.hpp"
#include "gpk/dataset_io.hpp"

namespace gpk::cli {

using Json = nlohmann::ordered_json;

struct Options {
  std::string config;

  // Dataset inputs: either a root holding calib/, label/, denorm/ or the
  // three directories individually. Without inputs, a synthetic scene is used.
  std::string input;
  std::string calib;
  std::string labels;
  std::string denorm;
  std::string projection_key = "P2";
  std::string extrinsics_key = "Tr_world_to_cam";

  std::string out;
  std::uint64_t seed = 0;
  double sigma = 0.3;
  std::string resolution = "512x928";
  int stride = 1;
  int jobs = 1;

  // Synthetic scene.
  int frames = 50;
  int objects = 20;
  double focal = 400.0;
  std::vector<double> roll_range{-0.01, 0.01};
  std::vector<double> pitch_range{0.1645, 0.1845};
  std::vector<double> height_range{5.8, 6.2};
  std::vector<double> depth_range{10.0, 200.0};

  // perturb / stats.
  std::string quantity = "all";
  int seeds = 1;
  int bins = 32;          // overlap grid per axis
  int hist_bins = 50;     // stats histograms
  int attitude_stride = 16;

  // losses.
  std::string pred;
  std::string pred_denorm;
  std::string label_denorm;
  double depth_sigma = 1.0;
  std::vector<double> weights{2.0, 10.0, 5.0, 2.0, 1.0, 1.0, 1.0, 1.0};

  // check-attn.
  int channels = 32;
  int heads = 4;
  int ffn_hidden = 64;
  int queries = 100;
  int visual_tokens = 64;
  int ground_tokens = 48;
  int visual_blocks = 3;
  int ground_blocks = 1;
  int decoder_blocks = 3;
  bool ground_positions = false;
  bool zero_bias = false;
  std::string fixture;
  std::string verify;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::shared_ptr<spdlog::logger> log;
};

// Logger writing to `err`; level from GPK_LOG (trace..off), default warn.
std::shared_ptr<spdlog::logger> make_logger(std::ostream& err);

ImageSize parse_resolution(const std::string& text);
CalibKeys calib_keys(const Options& o);
bool has_dataset_input(const Options& o);
FrameDirs dataset_dirs(const Options& o);
SceneConfig scene_config(const Options& o, std::uint64_t seed);

// Canonical description of the data source, for manifests.
Json source_json(const Options& o);

// Frames from the dataset directories or a synthetic scene with `seed`.
// Per-frame load failures are reported to the log and counted; the exit
// code reflects the worst failure.
struct FrameSet {
  std::vector<FrameRecord> frames;
  std::vector<std::string> inputs;
  int exit_code = 0;
};
FrameSet collect_frames(const Options& o, std::uint64_t seed, const Context& ctx);

// Maps a caught exception to the exit-code contract and logs it.
int report_error(const Context& ctx, const std::string& where, std::exception_ptr e);

// Calls fn(i) for i in [0, n) on up to `jobs` threads. fn must not throw.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

std::string hex64(std::uint64_t v);
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 14695981039346656037ULL);

class Manifest {
 public:
  Manifest(std::string command, Json config);

  void add_input(std::string path) { inputs_.push_back(std::move(path)); }
  void add_output(const std::filesystem::path& out_dir, const std::filesystem::path& file);
  void count(const std::string& name, std::int64_t value) { counters_[name] = value; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  // manifest.json under `out_dir`, with a digest over all listed outputs.
  void write(const std::filesystem::path& out_dir) const;

 private:
  std::string command_;
  Json config_;
  std::optional<std::uint64_t> seed_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  Json counters_ = Json::object();
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int cmd_gen_maps(const Options& o, const Context& ctx);
int cmd_perturb(const Options& o, const Context& ctx);
int cmd_stats(const Options& o, const Context& ctx);
int cmd_synth(const Options& o, const Context& ctx);
int cmd_losses(const Options& o, const Context& ctx);
int cmd_check_attn(const Options& o, const Context& ctx);

}  // namespace gpk::cli
