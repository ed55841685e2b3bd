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

#include "cli/common.hpp"
#include "gpk/ground_maps.hpp"
#include "gpk/map_io.hpp"

namespace gpk::cli {

namespace {

struct FrameResult {
  RefinementReport report;
  double refined_vs_global = 0.0;
  std::size_t valid_depth = 0;
  int code = 0;
};

}  // namespace

int cmd_gen_maps(const Options& o, const Context& ctx) {
  const ImageSize image = parse_resolution(o.resolution);
  const std::size_t stride = static_cast<std::size_t>(o.stride);
  const std::size_t h = image.height / stride;
  const std::size_t w = image.width / stride;
  if (h == 0 || w == 0) throw ConfigError("resolution is smaller than the stride");

  FrameSet set = collect_frames(o, o.seed, ctx);
  const std::filesystem::path out = o.out;
  const std::vector<std::string> kinds = {"depth", "denorm_global", "denorm_refined"};

  std::vector<FrameResult> results(set.frames.size());
  parallel_for(set.frames.size(), o.jobs, [&](std::size_t i) {
    const FrameRecord& f = set.frames[i];
    try {
      const CameraIntrinsics k = f.rig.intrinsics.downscaled(o.stride);
      std::vector<BBox3D> boxes;
      for (const auto& obj : f.objects) boxes.push_back(obj.box);
      const GroundDepthMap depth = build_ground_depth_map(k, f.ground, h, w);
      const DenormMap global = build_global_denorm_map(f.ground, h, w);
      const DenormMap refined = build_refined_denorm_map(f.ground, boxes, k, h, w, &results[i].report);
      results[i].refined_vs_global = denorm_l1_loss(refined, global);
      results[i].valid_depth = depth.valid_count();
      write_depth_map(out / "depth" / (f.id + ".gpkm"), depth);
      write_denorm_map(out / "denorm_global" / (f.id + ".gpkm"), global);
      write_denorm_map(out / "denorm_refined" / (f.id + ".gpkm"), refined);
    } catch (...) {
      results[i].code = report_error(ctx, "frame " + f.id, std::current_exception());
    }
  });

  Json config = {{"source", source_json(o)},
                 {"resolution", o.resolution},
                 {"stride", o.stride},
                 {"map_size", {h, w}}};
  Manifest manifest("gen-maps", config);
  manifest.set_seed(o.seed);
  for (const auto& in : set.inputs) manifest.add_input(in);

  std::string report =
      "frame_id,points,triangles,degenerate_skipped,insufficient_points,valid_depth_pixels,"
      "refined_vs_global_l1\n";
  std::int64_t processed = 0, failed = 0, degenerate = 0, insufficient = 0;
  int code = set.exit_code;
  for (std::size_t i = 0; i < set.frames.size(); ++i) {
    const auto& r = results[i];
    const std::string& id = set.frames[i].id;
    if (r.code != 0) {
      ++failed;
      code = std::max(code, r.code);
      continue;
    }
    ++processed;
    degenerate += static_cast<std::int64_t>(r.report.degenerate_skipped);
    insufficient += r.report.insufficient_points ? 1 : 0;
    for (const auto& kind : kinds) manifest.add_output(out, out / kind / (id + ".gpkm"));
    report += id + "," + std::to_string(r.report.points) + "," + std::to_string(r.report.triangles) +
              "," + std::to_string(r.report.degenerate_skipped) + "," +
              (r.report.insufficient_points ? "1" : "0") + "," + std::to_string(r.valid_depth) +
              "," + format_real(r.refined_vs_global) + "\n";
  }
  write_file_atomic(out / "report.csv", report);
  manifest.add_output(out, out / "report.csv");
  manifest.count("frames_processed", processed);
  manifest.count("frames_failed", failed);
  manifest.count("degenerate_skipped", degenerate);
  manifest.count("insufficient_points", insufficient);
  manifest.write(out);

  ctx.log->info("gen-maps: {} frames, {} degenerate triples skipped, {} frames with < 3 points",
                processed, degenerate, insufficient);
  return code;
}

}  // namespace gpk::cli
