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

#include <CLI11.hpp>

#include "cli/common.hpp"
#include "gpk/cli.hpp"

namespace gpk {

namespace {

using cli::Options;

void add_common(CLI::App* s, Options& o) {
  s->add_option("--config", o.config, "key=value config file; flags take precedence");
  s->add_option("--seed", o.seed, "base seed");
  s->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
}

void add_dataset(CLI::App* s, Options& o) {
  s->add_option("--input", o.input, "dataset root with calib/, label/, denorm/");
  s->add_option("--calib", o.calib, "calibration directory");
  s->add_option("--labels", o.labels, "label directory");
  s->add_option("--denorm", o.denorm, "ground plane directory");
  s->add_option("--projection-key", o.projection_key, "calibration key of the [K|0] matrix");
  s->add_option("--extrinsics-key", o.extrinsics_key, "calibration key of the extrinsics");
}

void add_synthetic(CLI::App* s, Options& o) {
  s->add_option("--frames", o.frames, "synthetic frame count")->check(CLI::NonNegativeNumber);
  s->add_option("--objects", o.objects, "objects per synthetic frame")->check(CLI::NonNegativeNumber);
  s->add_option("--focal", o.focal, "synthetic focal length in pixels")->check(CLI::PositiveNumber);
  s->add_option("--roll-range", o.roll_range, "roll interval, radians")->expected(2);
  s->add_option("--pitch-range", o.pitch_range, "pitch interval, radians")->expected(2);
  s->add_option("--height-range", o.height_range, "camera height interval, meters")->expected(2);
  s->add_option("--depth-range", o.depth_range, "object depth interval, meters")->expected(2);
}

void add_resolution(CLI::App* s, Options& o) {
  s->add_option("--resolution", o.resolution, "image size HxW");
}

std::unique_ptr<CLI::App> build(Options& o) {
  auto app = std::make_unique<CLI::App>("Ground-plane prior toolkit", "gpk");
  app->require_subcommand(1);

  auto* gen = app->add_subcommand("gen-maps", "depth, global and refined plane maps per frame");
  add_common(gen, o);
  add_dataset(gen, o);
  add_synthetic(gen, o);
  add_resolution(gen, o);
  gen->add_option("--out", o.out, "output directory")->required();
  gen->add_option("--stride", o.stride, "map stride relative to the image")
      ->check(CLI::IsMember({1, 16}));

  auto* perturb = app->add_subcommand("perturb", "v-row scatter series under mount offsets");
  add_common(perturb, o);
  add_dataset(perturb, o);
  add_synthetic(perturb, o);
  add_resolution(perturb, o);
  perturb->add_option("--out", o.out, "output directory")->required();
  perturb->add_option("--sigma", o.sigma, "offset standard deviation, radians")
      ->check(CLI::NonNegativeNumber);
  perturb->add_option("--seeds", o.seeds, "number of consecutive seeds")->check(CLI::PositiveNumber);
  perturb->add_option("--quantity", o.quantity, "depth, roll, pitch or all")
      ->check(CLI::IsMember({"depth", "roll", "pitch", "all"}));
  perturb->add_option("--bins", o.bins, "overlap grid bins per axis")->check(CLI::PositiveNumber);

  auto* stats = app->add_subcommand("stats", "depth and attitude histograms");
  add_common(stats, o);
  add_dataset(stats, o);
  add_synthetic(stats, o);
  add_resolution(stats, o);
  stats->add_option("--out", o.out, "output directory")->required();
  stats->add_option("--bins", o.hist_bins, "histogram bins")->check(CLI::PositiveNumber);
  stats->add_option("--stride", o.attitude_stride, "plane map stride")
      ->check(CLI::IsMember({1, 16}));

  auto* synth = app->add_subcommand("synth", "write a synthetic dataset");
  add_common(synth, o);
  add_synthetic(synth, o);
  add_resolution(synth, o);
  synth->add_option("--out", o.out, "output dataset root")->required();

  auto* losses = app->add_subcommand("losses", "training losses of predictions against labels");
  add_common(losses, o);
  losses->add_option("--pred", o.pred, "prediction directory (label format, optional score)")
      ->required();
  losses->add_option("--labels", o.labels, "label directory")->required();
  losses->add_option("--calib", o.calib, "calibration directory")->required();
  losses->add_option("--projection-key", o.projection_key, "calibration key of the [K|0] matrix");
  losses->add_option("--extrinsics-key", o.extrinsics_key, "calibration key of the extrinsics");
  losses->add_option("--pred-denorm", o.pred_denorm, "predicted plane maps (GPKM)");
  losses->add_option("--label-denorm", o.label_denorm, "label plane maps (GPKM)");
  losses->add_option("--depth-sigma", o.depth_sigma, "depth uncertainty")->check(CLI::PositiveNumber);
  losses->add_option("--weights", o.weights, "eight loss weights")->expected(8);
  losses->add_option("--out", o.out, "optional output directory");

  auto* attn = app->add_subcommand("check-attn", "attention invariant suite");
  add_common(attn, o);
  attn->add_option("--channels", o.channels)->check(CLI::PositiveNumber);
  attn->add_option("--heads", o.heads)->check(CLI::PositiveNumber);
  attn->add_option("--ffn-hidden", o.ffn_hidden)->check(CLI::PositiveNumber);
  attn->add_option("--queries", o.queries)->check(CLI::PositiveNumber);
  attn->add_option("--visual-tokens", o.visual_tokens)->check(CLI::PositiveNumber);
  attn->add_option("--ground-tokens", o.ground_tokens)->check(CLI::PositiveNumber);
  attn->add_option("--visual-blocks", o.visual_blocks)->check(CLI::NonNegativeNumber);
  attn->add_option("--ground-blocks", o.ground_blocks)->check(CLI::NonNegativeNumber);
  attn->add_option("--decoder-blocks", o.decoder_blocks)->check(CLI::PositiveNumber);
  attn->add_flag("--ground-positions", o.ground_positions, "add positional encodings to ground tokens");
  attn->add_flag("--zero-bias", o.zero_bias, "zero all linear-layer biases");
  attn->add_option("--fixture", o.fixture, "write a digest fixture to this path");
  attn->add_option("--verify", o.verify, "compare against a digest fixture");
  attn->add_option("--out", o.out, "optional output directory");
  return app;
}

// Command-line arguments for config entries whose options were not given on
// the command line.
std::vector<std::string> config_arguments(CLI::App* sub, const std::string& path) {
  std::vector<std::string> extra;
  for (const CLI::ConfigItem& item : CLI::ConfigTOML().from_file(path)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub->get_name())) {
      continue;
    }
    const std::string flag = "--" + item.name;
    CLI::Option* opt = sub->get_option_no_throw(flag);
    if (opt == nullptr || item.name == "config") {
      throw ConfigError("unknown config key '" + item.name + "' in " + path);
    }
    if (opt->count() > 0) continue;
    if (opt->get_expected_min() == 0) {
      if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "1")) {
        extra.push_back(flag);
      }
      continue;
    }
    extra.push_back(flag);
    extra.insert(extra.end(), item.inputs.begin(), item.inputs.end());
  }
  return extra;
}

int parse(CLI::App& app, const std::vector<std::string>& args, std::ostream& out,
          std::ostream& err, bool& done) {
  std::vector<std::string> storage{"gpk"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  done = false;
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    done = true;
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInput;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const cli::Context ctx{out, err, cli::make_logger(err)};

  Options first;
  auto app = build(first);
  bool done = false;
  int code = parse(*app, args, out, err, done);
  if (done) return code;
  CLI::App* sub = app->get_subcommands().front();

  Options o = first;
  if (!first.config.empty()) {
    std::vector<std::string> merged = args;
    try {
      const auto extra = config_arguments(sub, first.config);
      merged.insert(merged.end(), extra.begin(), extra.end());
    } catch (...) {
      return cli::report_error(ctx, "config", std::current_exception());
    }
    o = Options{};
    app = build(o);
    code = parse(*app, merged, out, err, done);
    if (done) return code;
    sub = app->get_subcommands().front();
  }

  const std::string name = sub->get_name();
  try {
    if (name == "gen-maps") return cli::cmd_gen_maps(o, ctx);
    if (name == "perturb") return cli::cmd_perturb(o, ctx);
    if (name == "stats") return cli::cmd_stats(o, ctx);
    if (name == "synth") return cli::cmd_synth(o, ctx);
    if (name == "losses") return cli::cmd_losses(o, ctx);
    return cli::cmd_check_attn(o, ctx);
  } catch (...) {
    return cli::report_error(ctx, name, std::current_exception());
  }
}

}  // namespace gpk
