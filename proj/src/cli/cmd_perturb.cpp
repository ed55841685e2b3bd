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
#include <map>

#include "cli/common.hpp"
#include "gpk/map_io.hpp"

namespace gpk::cli {

namespace {

// Salt separating the mount-offset stream from the scene stream.
constexpr std::uint64_t kOffsetStream = 0x4f46465345540000ULL;

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<std::string> frame_ids;
  std::vector<MountOffset> offsets;
  std::vector<std::array<ScatterSeries, 2>> series;  // per quantity: clean, perturbed
  std::vector<double> overlap;                       // per quantity
  int code = 0;
};

}  // namespace

int cmd_perturb(const Options& o, const Context& ctx) {
  const ImageSize image = parse_resolution(o.resolution);
  std::vector<Quantity> quantities;
  if (o.quantity == "all") {
    quantities = {Quantity::kDepth, Quantity::kRoll, Quantity::kPitch};
  } else {
    quantities = {parse_quantity(o.quantity)};
  }

  // A dataset is loaded once; synthetic scenes are drawn per seed.
  std::optional<FrameSet> dataset;
  if (has_dataset_input(o)) dataset = collect_frames(o, o.seed, ctx);

  std::vector<SeedResult> results(static_cast<std::size_t>(o.seeds));
  parallel_for(results.size(), o.jobs, [&](std::size_t i) {
    SeedResult& r = results[i];
    r.seed = o.seed + i;
    try {
      std::vector<FrameRecord> synthetic;
      if (!dataset) synthetic = synthesize_scene(scene_config(o, r.seed));
      const std::vector<FrameRecord>& frames = dataset ? dataset->frames : synthetic;
      for (const auto& f : frames) r.frame_ids.push_back(f.id);
      r.offsets = sample_mount_offsets(frames.size(), o.sigma, frame_seed(r.seed, kOffsetStream));
      for (Quantity q : quantities) {
        ScatterSeries clean = v_correlation_series(frames, q, image);
        ScatterSeries moved = v_correlation_series(
            frames, q, image, std::span<const MountOffset>(r.offsets));
        r.overlap.push_back(overlap_coefficient(clean, moved, static_cast<std::size_t>(o.bins)));
        r.series.push_back({std::move(clean), std::move(moved)});
      }
    } catch (...) {
      r.code = report_error(ctx, "seed " + std::to_string(r.seed), std::current_exception());
    }
  });

  const std::filesystem::path out = o.out;
  Json config = {{"source", source_json(o)},
                 {"resolution", o.resolution},
                 {"sigma", o.sigma},
                 {"seeds", o.seeds},
                 {"quantity", o.quantity},
                 {"bins", o.bins}};
  Manifest manifest("perturb", config);
  manifest.set_seed(o.seed);
  if (dataset) {
    for (const auto& in : dataset->inputs) manifest.add_input(in);
  }

  int code = dataset ? dataset->exit_code : 0;
  std::string overlap_csv = "seed,quantity,overlap\n";
  std::map<Quantity, std::vector<double>> by_quantity;
  std::int64_t completed = 0;
  bool pitch_gt_depth = true, roll_gt_depth = true;
  for (const SeedResult& r : results) {
    if (r.code != 0) {
      code = std::max(code, r.code);
      continue;
    }
    ++completed;
    const std::string tag = std::to_string(r.seed);
    std::string offsets = "frame_id,droll,dpitch\n";
    for (std::size_t f = 0; f < r.offsets.size(); ++f) {
      offsets += r.frame_ids[f] + "," + format_real(r.offsets[f].droll) + "," +
                 format_real(r.offsets[f].dpitch) + "\n";
    }
    write_file_atomic(out / ("offsets_" + tag + ".csv"), offsets);
    manifest.add_output(out, out / ("offsets_" + tag + ".csv"));

    std::map<Quantity, double> overlap;
    for (std::size_t q = 0; q < quantities.size(); ++q) {
      const std::string name(to_string(quantities[q]));
      const std::string stem = "scatter_" + name + "_" + tag;
      write_file_atomic(out / (stem + ".csv"), scatter_csv(r.series[q]));
      write_file_atomic(out / (stem + ".svg"),
                        scatter_svg(r.series[q], name + " vs v, seed " + tag));
      manifest.add_output(out, out / (stem + ".csv"));
      manifest.add_output(out, out / (stem + ".svg"));
      overlap_csv += tag + "," + name + "," + format_real(r.overlap[q]) + "\n";
      overlap[quantities[q]] = r.overlap[q];
      by_quantity[quantities[q]].push_back(r.overlap[q]);
    }
    if (overlap.size() == 3) {
      pitch_gt_depth = pitch_gt_depth && overlap[Quantity::kPitch] > overlap[Quantity::kDepth];
      roll_gt_depth = roll_gt_depth && overlap[Quantity::kRoll] > overlap[Quantity::kDepth];
    }
  }
  write_file_atomic(out / "overlap.csv", overlap_csv);
  manifest.add_output(out, out / "overlap.csv");

  Json summary;
  summary["sigma"] = o.sigma;
  summary["seeds_completed"] = completed;
  for (const auto& [q, values] : by_quantity) {
    double sum = 0.0;
    for (double v : values) sum += v;
    summary["overlap"][std::string(to_string(q))] = {
        {"min", *std::min_element(values.begin(), values.end())},
        {"mean", sum / static_cast<double>(values.size())},
        {"max", *std::max_element(values.begin(), values.end())}};
  }
  if (quantities.size() == 3 && completed > 0) {
    summary["pitch_gt_depth_all_seeds"] = pitch_gt_depth;
    summary["roll_gt_depth_all_seeds"] = roll_gt_depth;
  }
  write_file_atomic(out / "summary.json", summary.dump(2) + "\n");
  manifest.add_output(out, out / "summary.json");
  manifest.count("seeds_completed", completed);
  manifest.count("seeds_failed", static_cast<std::int64_t>(results.size()) - completed);
  manifest.write(out);
  ctx.log->info("perturb: {}", summary.dump());
  return code;
}

}  // namespace gpk::cli
