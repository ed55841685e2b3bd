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
#include "gpk/map_io.hpp"

namespace gpk::cli {

int cmd_stats(const Options& o, const Context& ctx) {
  const ImageSize image = parse_resolution(o.resolution);
  const auto bins = static_cast<std::size_t>(o.hist_bins);
  FrameSet set = collect_frames(o, o.seed, ctx);
  if (set.frames.empty()) throw EmptyInput("no frames to analyse");

  std::vector<AttitudeSamples> per_frame(set.frames.size());
  std::vector<int> codes(set.frames.size(), 0);
  parallel_for(set.frames.size(), o.jobs, [&](std::size_t i) {
    try {
      per_frame[i] = attitude_samples(set.frames[i], image, o.attitude_stride);
    } catch (...) {
      codes[i] = report_error(ctx, "frame " + set.frames[i].id, std::current_exception());
    }
  });
  int code = set.exit_code;
  AttitudeSamples all;
  std::vector<FrameRecord> usable;
  for (std::size_t i = 0; i < per_frame.size(); ++i) {
    code = std::max(code, codes[i]);
    if (codes[i] != 0) continue;
    usable.push_back(set.frames[i]);
    all.roll.insert(all.roll.end(), per_frame[i].roll.begin(), per_frame[i].roll.end());
    all.pitch.insert(all.pitch.end(), per_frame[i].pitch.begin(), per_frame[i].pitch.end());
    all.height.insert(all.height.end(), per_frame[i].height.begin(), per_frame[i].height.end());
  }
  if (usable.empty()) return code;

  const Histogram depth = depth_histogram(usable, bins);
  const Histogram roll = Histogram::fit(all.roll, bins);
  const Histogram pitch = Histogram::fit(all.pitch, bins);
  const Histogram height = Histogram::fit(all.height, bins);

  const std::filesystem::path out = o.out;
  Json config = {{"source", source_json(o)},
                 {"resolution", o.resolution},
                 {"bins", o.hist_bins},
                 {"stride", o.attitude_stride}};
  Manifest manifest("stats", config);
  manifest.set_seed(o.seed);
  for (const auto& in : set.inputs) manifest.add_input(in);

  Json summary;
  const std::pair<const char*, const Histogram*> hists[] = {
      {"depth", &depth}, {"roll", &roll}, {"pitch", &pitch}, {"height", &height}};
  for (const auto& [name, h] : hists) {
    const std::string stem = std::string(name) + "_hist";
    write_file_atomic(out / (stem + ".csv"), histogram_csv(*h));
    write_file_atomic(out / (stem + ".svg"), histogram_svg(*h, name));
    manifest.add_output(out, out / (stem + ".csv"));
    manifest.add_output(out, out / (stem + ".svg"));
    summary[name] = {{"samples", h->total()},
                     {"mean", h->mean()},
                     {"occupied_width", h->occupied_width()},
                     {"relative_support", h->relative_support()}};
  }
  summary["depth_to_pitch_support_ratio"] = depth.relative_support() / pitch.relative_support();
  write_file_atomic(out / "summary.json", summary.dump(2) + "\n");
  manifest.add_output(out, out / "summary.json");
  manifest.count("frames_processed", static_cast<std::int64_t>(usable.size()));
  manifest.count("objects", static_cast<std::int64_t>(depth.total()));
  manifest.write(out);
  ctx.log->info("stats: {}", summary.dump());
  return code;
}

}  // namespace gpk::cli
