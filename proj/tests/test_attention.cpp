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

#include <nlohmann/json.hpp>

#include "gpk/attention.hpp"
#include "gpk/errors.hpp"
#include "oracles.hpp"

using namespace gpk;

namespace {

oracle::LinearParams params(const LinearLayer& l) { return {l.weight, l.bias}; }

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix random_tokens(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols, double scale) {
  WeightSampler s(seed, 1);
  return s.matrix(rows, cols) * scale;
}

Matrix permute_rows(const Matrix& m, const std::vector<Eigen::Index>& perm) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.row(i) = m.row(perm[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

TEST_CASE("self attention matches the loop oracle (4 tokens, C=8, 2 heads)") {
  WeightSampler s(3, 8);
  const AttentionWeights w = AttentionWeights::random(s, 8, 2);
  const Matrix x = random_tokens(4, 4, 8, 3.0);
  const auto [ref, map] = oracle::attention(x, x, params(w.query), params(w.key), params(w.value),
                                            params(w.output), 2);
  CHECK(max_abs(self_attention(x, w) - ref) < 1e-9);
  const AttentionOutput out = multi_head_attention(x, x, w);
  CHECK(max_abs(out.attention - map) < 1e-9);
}

TEST_CASE("ground cross attention matches the loop oracle (N=2, T=3, C=4, 1 head)") {
  WeightSampler s(5, 4);
  const AttentionWeights w = AttentionWeights::random(s, 4, 1);
  const Matrix q = random_tokens(6, 2, 4, 2.0);
  const Matrix g = random_tokens(7, 3, 4, 2.0);
  const auto [ref, map] = oracle::attention(q, g, params(w.query), params(w.key), params(w.value),
                                            params(w.output), 1);
  const AttentionOutput out = ground_cross_attention(q, g, w);
  CHECK(out.values.rows() == 2);
  CHECK(out.attention.rows() == 2);
  CHECK(out.attention.cols() == 3);
  CHECK(max_abs(out.values - ref) < 1e-9);
  CHECK(max_abs(out.attention - map) < 1e-9);
  const AttentionOutput vis = visual_cross_attention(q, g, w);
  CHECK(max_abs(vis.values - ref) < 1e-9);
}

TEST_CASE("single key: attention is one and the output is the value chain") {
  WeightSampler s(9, 8);
  const AttentionWeights w = AttentionWeights::random(s, 8, 4);
  const Matrix x = random_tokens(10, 1, 8, 1.0);
  const Matrix chain = w.output.apply(w.value.apply(x));
  CHECK(max_abs(self_attention(x, w) - chain) < 1e-12);

  const Matrix q = random_tokens(11, 5, 8, 1.0);
  const AttentionOutput out = ground_cross_attention(q, x, w);
  CHECK(out.attention.cols() == 1);
  CHECK(max_abs(out.attention - Matrix::Ones(5, 1)) == 0.0);
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(max_abs(out.values.row(i) - chain) < 1e-12);
}

TEST_CASE("duplicate keys receive equal weight") {
  WeightSampler s(12, 8);
  const AttentionWeights w = AttentionWeights::random(s, 8, 2);
  Matrix keys = random_tokens(13, 3, 8, 2.0);
  keys.row(2) = keys.row(0);
  const AttentionOutput out = multi_head_attention(random_tokens(14, 4, 8, 2.0), keys, w);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(std::abs(out.attention(i, 0) - out.attention(i, 2)) < 1e-15);
}

TEST_CASE("attention rejects inconsistent shapes") {
  WeightSampler s(1, 8);
  AttentionWeights w = AttentionWeights::random(s, 8, 3);
  const Matrix x = random_tokens(2, 4, 8, 1.0);
  CHECK_THROWS_AS(self_attention(x, w), ShapeMismatch);
  w.heads = 2;
  CHECK_THROWS_AS(self_attention(random_tokens(2, 4, 6, 1.0), w), ShapeMismatch);
  CHECK_THROWS_AS(self_attention(Matrix(0, 8), w), ShapeMismatch);
}

TEST_CASE("ffn matches the two-matmul oracle") {
  WeightSampler s(21, 4);
  const FfnWeights w = FfnWeights::random(s, 4, 6);
  const Matrix x = random_tokens(22, 2, 4, 2.0);
  const Matrix ref = oracle::relu_ffn(x, params(w.expand), params(w.project));
  CHECK(max_abs(ffn(x, w) - ref) < 1e-12);

  FfnWeights zero = w;
  zero.expand.weight.setZero();
  zero.expand.bias.setZero();
  zero.project.weight.setZero();
  zero.project.bias.setZero();
  CHECK(max_abs(ffn(x, zero)) == 0.0);
  zero.project.bias.setConstant(0.5);
  CHECK(max_abs(ffn(x, zero) - Matrix::Constant(2, 4, 0.5)) == 0.0);
}

TEST_CASE("self attention is permutation equivariant") {
  WeightSampler s(31, 16);
  const AttentionWeights w = AttentionWeights::random(s, 16, 4);
  const Matrix x = random_tokens(32, 7, 16, 8.0);
  const std::vector<Eigen::Index> perm{3, 0, 6, 1, 5, 2, 4};
  CHECK(max_abs(self_attention(permute_rows(x, perm), w) - permute_rows(self_attention(x, w), perm)) < 1e-9);
}

TEST_CASE("decoder block: shape and query permutation") {
  ModelConfig cfg;
  cfg.channels = 16;
  cfg.heads = 4;
  cfg.ffn_hidden = 32;
  WeightSampler s(41, 16);
  DecoderBlockWeights w{AttentionWeights::random(s, 16, 4), AttentionWeights::random(s, 16, 4),
                        AttentionWeights::random(s, 16, 4), FfnWeights::random(s, 16, 32)};
  const Matrix q = random_tokens(42, 6, 16, 8.0);
  const Matrix g = random_tokens(43, 9, 16, 8.0);
  const Matrix v = random_tokens(44, 11, 16, 8.0);
  const AttentionOutput out = decoder_block(q, g, v, w);
  CHECK(out.values.rows() == 6);
  CHECK(out.values.cols() == 16);
  CHECK(out.attention.rows() == 6);
  CHECK(out.attention.cols() == 9);
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(std::abs(out.attention.row(i).sum() - 1.0) < 1e-12);

  const std::vector<Eigen::Index> perm{5, 2, 0, 4, 1, 3};
  const AttentionOutput p = decoder_block(permute_rows(q, perm), g, v, w);
  CHECK(max_abs(p.values - permute_rows(out.values, perm)) < 1e-9);
  CHECK(max_abs(p.attention - permute_rows(out.attention, perm)) < 1e-9);

  // Composition order: ground cross, self, visual cross, FFN.
  const AttentionOutput gc = ground_cross_attention(q, g, w.ground_cross);
  const Matrix manual = ffn(visual_cross_attention(self_attention(gc.values, w.self), v, w.visual_cross).values, w.ffn);
  CHECK(max_abs(manual - out.values) == 0.0);
}

TEST_CASE("three-block stack and full forward pass") {
  ModelConfig cfg;
  cfg.seed = 5;
  const ModelWeights w = ModelWeights::random(cfg);
  CHECK(w.decoder.size() == 3);
  CHECK(w.visual_encoder.size() == 3);
  CHECK(w.ground_encoder.size() == 1);
  const Matrix visual = random_tokens(50, 40, cfg.channels, 1.0);
  const Matrix ground = random_tokens(51, 40, cfg.channels, 1.0);
  const ForwardOutput out = forward(visual, ground, w, cfg);
  CHECK(out.queries.rows() == cfg.queries);
  CHECK(out.queries.cols() == cfg.channels);
  CHECK(out.queries.allFinite());
  REQUIRE(out.ground_attention.size() == 3);
  for (const Matrix& a : out.ground_attention) {
    CHECK(a.rows() == cfg.queries);
    CHECK(a.cols() == 40);
    CHECK((a.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
  }
  // Bit-identical repeat.
  const ForwardOutput again = forward(visual, ground, ModelWeights::random(cfg), cfg);
  CHECK(matrix_digest(again.queries) == matrix_digest(out.queries));
  cfg.seed = 6;
  CHECK(matrix_digest(forward(visual, ground, ModelWeights::random(cfg), cfg).queries) !=
        matrix_digest(out.queries));
}

TEST_CASE("sinusoidal encoding") {
  const Matrix pe = sinusoidal_encoding(5, 8);
  CHECK(pe(0, 0) == 0.0);
  CHECK(pe(0, 1) == 1.0);
  CHECK(pe(3, 0) == doctest::Approx(std::sin(3.0)));
  CHECK(pe(3, 1) == doctest::Approx(std::cos(3.0)));
  CHECK(pe(3, 2) == doctest::Approx(std::sin(3.0 / std::pow(10000.0, 2.0 / 8.0))));
}

TEST_CASE("digest and fixture") {
  Matrix a = Matrix::Zero(2, 2);
  Matrix b = Matrix::Zero(1, 4);
  CHECK(matrix_digest(a) != matrix_digest(b));  // shape is part of the digest
  b(0, 3) = -0.0;
  CHECK(matrix_digest(Matrix::Zero(1, 4)) != matrix_digest(b));

  ModelConfig cfg;
  const std::string f1 = forward_fixture(cfg, 16, 16);
  const std::string f2 = forward_fixture(cfg, 16, 16);
  CHECK(f1 == f2);
  const auto j = nlohmann::json::parse(f1);
  CHECK(j.is_object());
  cfg.seed = 1;
  CHECK(forward_fixture(cfg, 16, 16) != f1);
}

TEST_CASE("invariant suite passes on the default configuration") {
  ModelConfig cfg;
  for (const auto& r : check_attention_invariants(cfg, 64, 64)) {
    INFO(r.name << ": " << r.detail);
    CHECK(r.passed);
  }
  cfg.heads = 5;
  CHECK_THROWS_AS(cfg.validate(), ShapeMismatch);
}
