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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gpk/cli.hpp"
#include "gpk/map_io.hpp"

namespace fs = std::filesystem;
using gpk::run_cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "gpk_test_cli" / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

// Every file under root except manifest.json, keyed by relative path.
std::map<std::string, std::vector<std::uint8_t>> snapshot(const fs::path& root) {
  std::map<std::string, std::vector<std::uint8_t>> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
    files[fs::relative(e.path(), root).generic_string()] = gpk::read_file_bytes(e.path());
  }
  return files;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

std::vector<std::string> csv_rows(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  return rows;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string f; std::getline(ss, f, sep);) out.push_back(f);
  return out;
}

}  // namespace

TEST_CASE("synth writes frame triples with a stable digest") {
  const fs::path a = scratch("synth_a"), b = scratch("synth_b");
  REQUIRE(run({"synth", "--seed", "7", "--frames", "10", "--out", a.string()}).code == 0);
  REQUIRE(run({"synth", "--seed", "7", "--frames", "10", "--out", b.string(), "--jobs", "3"}).code == 0);
  for (const char* sub : {"calib", "label", "denorm"}) {
    CHECK(std::distance(fs::directory_iterator(a / sub), fs::directory_iterator{}) == 10);
  }
  CHECK(snapshot(a) == snapshot(b));
  const auto ma = read_json(a / "manifest.json"), mb = read_json(b / "manifest.json");
  CHECK(ma["outputs_digest"] == mb["outputs_digest"]);
  CHECK(ma["config_digest"] == mb["config_digest"]);
  CHECK(ma["counters"]["frames_written"] == 10);
  CHECK(ma["seed"] == 7);
}

TEST_CASE("gen-maps on a flat synthetic scene") {
  const fs::path one = scratch("gen_1"), four = scratch("gen_4");
  const std::vector<std::string> base{"gen-maps", "--seed", "3", "--frames", "6", "--stride", "16"};
  auto args1 = base;
  args1.insert(args1.end(), {"--out", one.string(), "--jobs", "1"});
  auto args4 = base;
  args4.insert(args4.end(), {"--out", four.string(), "--jobs", "4"});
  const Run r = run(args1);
  REQUIRE(r.code == 0);
  REQUIRE(run(args4).code == 0);
  CHECK(snapshot(one) == snapshot(four));
  CHECK(read_json(one / "manifest.json")["outputs_digest"] ==
        read_json(four / "manifest.json")["outputs_digest"]);

  const auto rows = csv_rows(one / "report.csv");
  REQUIRE(rows.size() == 7);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = split(rows[i], ',');
    REQUIRE(f.size() == 7);
    CHECK(std::stod(f[6]) < 1e-9);  // refined vs global
    CHECK(f[4] == "0");
  }
  CHECK(fs::exists(one / "depth" / "000000.gpkm"));
  CHECK(fs::exists(one / "denorm_refined" / "000005.gpkm"));
  const auto refined = gpk::read_denorm_map(one / "denorm_refined" / "000000.gpkm");
  const auto global = gpk::read_denorm_map(one / "denorm_global" / "000000.gpkm");
  CHECK(gpk::denorm_l1_loss(refined, global) < 1e-9);
}

TEST_CASE("gen-maps reports frames with too few boxes") {
  const fs::path data = scratch("few_data"), out = scratch("few_out");
  REQUIRE(run({"synth", "--frames", "1", "--objects", "2", "--out", data.string()}).code == 0);
  REQUIRE(run({"gen-maps", "--input", data.string(), "--out", out.string(), "--stride", "16"}).code == 0);
  const auto m = read_json(out / "manifest.json");
  CHECK(m["counters"]["insufficient_points"] == 1);
  const auto rows = csv_rows(out / "report.csv");
  REQUIRE(rows.size() == 2);
  CHECK(split(rows[1], ',')[4] == "1");
  CHECK(gpk::denorm_l1_loss(gpk::read_denorm_map(out / "denorm_refined" / "000000.gpkm"),
                            gpk::read_denorm_map(out / "denorm_global" / "000000.gpkm")) == 0.0);
}

TEST_CASE("gen-maps exit codes") {
  const fs::path out = scratch("gen_err");
  const Run missing = run({"gen-maps", "--input", (out / "nope").string(), "--out", out.string()});
  CHECK(missing.code == 1);
  CHECK_FALSE(missing.err.empty());
  CHECK(missing.out.empty());

  // A degenerate ground plane file is a geometry error.
  const fs::path data = scratch("gen_geo");
  REQUIRE(run({"synth", "--frames", "1", "--out", data.string()}).code == 0);
  std::ofstream(data / "denorm" / "000000.txt") << "0 0 0 5\n";
  CHECK(run({"gen-maps", "--input", data.string(), "--out", out.string()}).code == 2);

  // A malformed label file is a parse error.
  std::ofstream(data / "denorm" / "000000.txt") << "0 -1 0 6\n";
  std::ofstream(data / "label" / "000000.txt") << "Car 1 2 three\n";
  const Run parse = run({"gen-maps", "--input", data.string(), "--out", out.string()});
  CHECK(parse.code == 1);
  CHECK(parse.err.find("line 1") != std::string::npos);
}

TEST_CASE("perturb: zero sigma gives full overlap") {
  const fs::path out = scratch("perturb0");
  REQUIRE(run({"perturb", "--sigma", "0", "--frames", "5", "--seeds", "2", "--out", out.string()}).code == 0);
  const auto s = read_json(out / "summary.json");
  for (const char* q : {"depth", "roll", "pitch"}) {
    CHECK(s["overlap"][q]["min"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  }
  const auto rows = csv_rows(out / "overlap.csv");
  CHECK(rows.front() == "seed,quantity,overlap");
  CHECK(rows.size() == 1 + 2 * 3);
  CHECK(csv_rows(out / "scatter_depth_0.csv").front() == "frame_id,v,value,condition");
}

TEST_CASE("perturb: reported ordering matches the per-seed overlaps") {
  const fs::path out = scratch("perturb3");
  REQUIRE(run({"perturb", "--sigma", "0.3", "--frames", "10", "--seeds", "3", "--out", out.string(),
               "--jobs", "2"})
              .code == 0);
  std::map<std::string, std::map<std::string, double>> by_seed;
  const auto rows = csv_rows(out / "overlap.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = split(rows[i], ',');
    by_seed[f[0]][f[1]] = std::stod(f[2]);
  }
  REQUIRE(by_seed.size() == 3);
  bool pitch = true, roll = true;
  for (auto& [seed, q] : by_seed) {
    pitch = pitch && q["pitch"] > q["depth"];
    roll = roll && q["roll"] > q["depth"];
  }
  const auto s = read_json(out / "summary.json");
  CHECK(s["pitch_gt_depth_all_seeds"].get<bool>() == pitch);
  CHECK(s["roll_gt_depth_all_seeds"].get<bool>() == roll);
}

TEST_CASE("perturb argument errors") {
  const fs::path out = scratch("perturb_err");
  CHECK(run({"perturb", "--input", (out / "missing").string(), "--out", out.string()}).code == 1);
  CHECK(run({"perturb", "--sigma", "-1", "--out", out.string()}).code == 1);
  CHECK(run({"perturb", "--quantity", "yaw", "--out", out.string()}).code == 1);
  CHECK(run({"perturb"}).code == 1);
  CHECK(run({"no-such-command"}).code == 1);
}

TEST_CASE("stats writes histograms") {
  const fs::path out = scratch("stats");
  REQUIRE(run({"stats", "--frames", "6", "--out", out.string()}).code == 0);
  for (const char* n : {"depth_hist.csv", "roll_hist.csv", "pitch_hist.csv", "height_hist.csv",
                        "summary.json", "manifest.json"}) {
    CHECK(fs::exists(out / n));
  }
  CHECK(csv_rows(out / "depth_hist.csv").front() == "bin_lo,bin_hi,count");
  CHECK(read_json(out / "summary.json")["depth_to_pitch_support_ratio"].get<double>() >= 10.0);
}

TEST_CASE("check-attn passes and verifies its fixture") {
  const fs::path dir = scratch("attn");
  fs::create_directories(dir);
  const Run r = run({"check-attn", "--fixture", (dir / "f.json").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("PASS attention_rows_stochastic") != std::string::npos);
  CHECK(run({"check-attn", "--verify", (dir / "f.json").string()}).code == 0);
  const Run other = run({"check-attn", "--seed", "1", "--verify", (dir / "f.json").string()});
  CHECK(other.code == 3);
  CHECK(other.out.find("FAIL fixture_digests") != std::string::npos);
  CHECK(run({"check-attn", "--heads", "5"}).code == 1);
}

TEST_CASE("losses on identical predictions") {
  const fs::path data = scratch("loss_data");
  REQUIRE(run({"synth", "--frames", "3", "--out", data.string()}).code == 0);
  const std::string label = (data / "label").string(), calib = (data / "calib").string();
  const Run r = run({"losses", "--pred", label, "--labels", label, "--calib", calib});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("total 0\n") != std::string::npos);
  const Run missing = run({"losses", "--labels", label, "--calib", calib});
  CHECK(missing.code == 1);
}

TEST_CASE("config file values apply unless a flag overrides them") {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  std::ofstream(dir / "synth.toml") << "frames = 4\nseed = 11\n";
  const fs::path a = dir / "a", b = dir / "b";
  REQUIRE(run({"synth", "--config", (dir / "synth.toml").string(), "--out", a.string()}).code == 0);
  CHECK(std::distance(fs::directory_iterator(a / "label"), fs::directory_iterator{}) == 4);
  CHECK(read_json(a / "manifest.json")["seed"] == 11);
  REQUIRE(run({"synth", "--config", (dir / "synth.toml").string(), "--frames", "2", "--out", b.string()})
              .code == 0);
  CHECK(std::distance(fs::directory_iterator(b / "label"), fs::directory_iterator{}) == 2);
  CHECK(read_json(b / "manifest.json")["seed"] == 11);

  std::ofstream(dir / "bad.toml") << "no_such_key = 1\n";
  CHECK(run({"synth", "--config", (dir / "bad.toml").string(), "--out", b.string()}).code == 1);
}

TEST_CASE("help exits cleanly") {
  const Run r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("gen-maps") != std::string::npos);
}
