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

namespace gpk::cli {

int cmd_synth(const Options& o, const Context& ctx) {
  const SceneConfig cfg = scene_config(o, o.seed);
  const FrameDirs dirs = FrameDirs::under(o.out);

  std::vector<std::string> ids(static_cast<std::size_t>(cfg.frames));
  std::vector<int> codes(ids.size(), 0);
  parallel_for(ids.size(), o.jobs, [&](std::size_t i) {
    try {
      const FrameRecord frame = synthesize_frame(cfg, static_cast<int>(i));
      ids[i] = frame.id;
      write_frame(dirs, frame);
    } catch (...) {
      codes[i] = report_error(ctx, "frame " + std::to_string(i), std::current_exception());
    }
  });

  const std::filesystem::path out = o.out;
  Manifest manifest("synth", {{"source", source_json(o)}, {"resolution", o.resolution}});
  manifest.set_seed(o.seed);
  int code = 0;
  std::int64_t written = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    code = std::max(code, codes[i]);
    if (codes[i] != 0) continue;
    ++written;
    const std::string name = ids[i] + ".txt";
    manifest.add_output(out, dirs.calib / name);
    manifest.add_output(out, dirs.label / name);
    manifest.add_output(out, dirs.denorm / name);
  }
  manifest.count("frames_written", written);
  manifest.write(out);
  ctx.log->info("synth: wrote {} frames to {}", written, out.string());
  return code;
}

}  // namespace gpk::cli
