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
#include "gpk/attention.hpp"
#include "gpk/cli.hpp"
#include "gpk/map_io.hpp"

namespace gpk::cli {

int cmd_check_attn(const Options& o, const Context& ctx) {
  ModelConfig cfg;
  cfg.channels = o.channels;
  cfg.heads = o.heads;
  cfg.ffn_hidden = o.ffn_hidden;
  cfg.queries = o.queries;
  cfg.visual_blocks = o.visual_blocks;
  cfg.ground_blocks = o.ground_blocks;
  cfg.decoder_blocks = o.decoder_blocks;
  cfg.encode_ground_positions = o.ground_positions;
  cfg.zero_bias = o.zero_bias;
  cfg.seed = o.seed;
  cfg.validate();

  const auto results = check_attention_invariants(cfg, o.visual_tokens, o.ground_tokens);
  bool all = true;
  for (const auto& r : results) {
    ctx.out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    all = all && r.passed;
  }

  const std::string fixture = forward_fixture(cfg, o.visual_tokens, o.ground_tokens);
  if (!o.fixture.empty()) write_file_atomic(o.fixture, fixture);
  if (!o.verify.empty()) {
    const auto bytes = read_file_bytes(o.verify);
    const bool same = Json::parse(bytes) == Json::parse(fixture);
    ctx.out << (same ? "PASS " : "FAIL ") << "fixture_digests: " << o.verify << '\n';
    all = all && same;
  }

  if (!o.out.empty()) {
    const std::filesystem::path out = o.out;
    Json report = Json::array();
    for (const auto& r : results) {
      report.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    }
    Manifest manifest("check-attn", Json::parse(fixture));
    manifest.set_seed(o.seed);
    write_file_atomic(out / "invariants.json", report.dump(2) + "\n");
    write_file_atomic(out / "fixture.json", fixture);
    manifest.add_output(out, out / "invariants.json");
    manifest.add_output(out, out / "fixture.json");
    manifest.count("invariants_failed",
                   std::count_if(results.begin(), results.end(), [](auto& r) { return !r.passed; }));
    manifest.write(out);
  }
  if (!all) ctx.log->error("attention invariant suite failed");
  return all ? kExitOk : kExitCheckFailed;
}

}  // namespace gpk::cli
