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

#include <fmt/format.h>

#include "cli/common.hpp"
#include "gpk/losses.hpp"
#include "gpk/map_io.hpp"

namespace gpk::cli {

namespace {

constexpr std::array<const char*, 8> kComponentNames = {
    "class", "size2d", "xy3d", "giou", "size3d", "angle", "depth", "denorm"};

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

}  // namespace

int cmd_losses(const Options& o, const Context& ctx) {
  LossWeights weights;
  if (o.weights.size() != weights.w.size()) throw ConfigError("--weights needs eight values");
  std::copy(o.weights.begin(), o.weights.end(), weights.w.begin());
  weights.validate();
  if (o.pred_denorm.empty() != o.label_denorm.empty()) {
    throw ConfigError("--pred-denorm and --label-denorm go together");
  }

  const std::filesystem::path pred_dir = o.pred, label_dir = o.labels, calib_dir = o.calib;
  for (const auto& d : {pred_dir, label_dir, calib_dir}) {
    if (!std::filesystem::is_directory(d)) {
      throw std::runtime_error("missing input directory " + d.string());
    }
  }
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(label_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      ids.push_back(entry.path().stem().string());
    }
  }
  std::sort(ids.begin(), ids.end());

  const FrameLossOptions opt{o.depth_sigma};
  const CalibKeys keys = calib_keys(o);
  std::vector<LossComponents> per_frame(ids.size());
  std::vector<int> codes(ids.size(), 0);
  parallel_for(ids.size(), o.jobs, [&](std::size_t i) {
    const std::string name = ids[i] + ".txt";
    try {
      const CameraRig rig = parse_calibration(read_text(calib_dir / name), keys);
      const auto labels = parse_labels(read_text(label_dir / name));
      const auto preds = parse_labels(read_text(pred_dir / name), true);
      per_frame[i] = frame_losses(preds, labels, rig.intrinsics, opt);
      if (!o.pred_denorm.empty()) {
        per_frame[i].denorm =
            denorm_l1_loss(read_denorm_map(std::filesystem::path(o.pred_denorm) / (ids[i] + ".gpkm")),
                           read_denorm_map(std::filesystem::path(o.label_denorm) / (ids[i] + ".gpkm")));
      }
    } catch (...) {
      codes[i] = report_error(ctx, "frame " + ids[i], std::current_exception());
    }
  });

  int code = 0;
  std::array<double, 8> mean{};
  std::int64_t used = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    code = std::max(code, codes[i]);
    if (codes[i] != 0) continue;
    ++used;
    const auto v = per_frame[i].as_array();
    for (std::size_t c = 0; c < v.size(); ++c) mean[c] += v[c];
  }
  if (used > 0) {
    for (double& m : mean) m /= static_cast<double>(used);
  }
  const LossComponents components{mean[0], mean[1], mean[2], mean[3],
                                  mean[4], mean[5], mean[6], mean[7]};
  const double total = total_loss(components, weights);

  std::string text;
  Json result;
  for (std::size_t c = 0; c < kComponentNames.size(); ++c) {
    text += fmt::format("{} {}\n", kComponentNames[c], format_real(mean[c]));
    result["components"][kComponentNames[c]] = mean[c];
  }
  text += fmt::format("total {}\n", format_real(total));
  result["total"] = total;
  result["frames"] = used;
  ctx.out << text;

  if (!o.out.empty()) {
    const std::filesystem::path out = o.out;
    Manifest manifest("losses", {{"pred", o.pred},
                                 {"labels", o.labels},
                                 {"calib", o.calib},
                                 {"pred_denorm", o.pred_denorm},
                                 {"label_denorm", o.label_denorm},
                                 {"depth_sigma", o.depth_sigma},
                                 {"weights", o.weights}});
    for (const auto& in : {o.pred, o.labels, o.calib}) manifest.add_input(in);
    write_file_atomic(out / "losses.json", result.dump(2) + "\n");
    manifest.add_output(out, out / "losses.json");
    manifest.count("frames_processed", used);
    manifest.count("frames_failed", static_cast<std::int64_t>(ids.size()) - used);
    manifest.write(out);
  }
  return code;
}

}  // namespace gpk::cli
