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

// Forward-only reference blocks of the ground-aware transformer: visual and
// ground encoders and the ground-guided decoder. Token-major matrices
// (tokens x channels). No residual paths or normalization layers: each
// block is exactly the composition of its attention and FFN layers.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gpk {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

// y = x W + b, with W stored as (in x out).
struct LinearLayer {
  Matrix weight;
  RowVector bias;

  Eigen::Index in_features() const { return weight.rows(); }
  Eigen::Index out_features() const { return weight.cols(); }
  Matrix apply(const Matrix& x) const;
};

// Every entry uniform in (-1/sqrt(C), 1/sqrt(C)) from a 53-bit mapping of the
// engine output, so values do not depend on the standard library's
// distribution implementation.
class WeightSampler {
 public:
  WeightSampler(std::uint64_t seed, Eigen::Index channels);
  LinearLayer linear(Eigen::Index in, Eigen::Index out, bool zero_bias = false);
  Matrix matrix(Eigen::Index rows, Eigen::Index cols);

 private:
  double next();

  std::mt19937_64 rng_;
  double bound_;
};

struct AttentionWeights {
  int heads = 1;
  LinearLayer query, key, value, output;

  Eigen::Index channels() const { return output.out_features(); }
  static AttentionWeights random(WeightSampler& s, Eigen::Index channels, int heads,
                                 bool zero_bias = false);
};

struct FfnWeights {
  LinearLayer expand, project;

  static FfnWeights random(WeightSampler& s, Eigen::Index channels, Eigen::Index hidden,
                           bool zero_bias = false);
};

struct EncoderBlockWeights {
  AttentionWeights attention;
  FfnWeights ffn;
};

struct DecoderBlockWeights {
  AttentionWeights ground_cross;
  AttentionWeights self;
  AttentionWeights visual_cross;
  FfnWeights ffn;
};

struct AttentionOutput {
  Matrix values;     // queries x channels
  Matrix attention;  // queries x keys, averaged over heads
};

// Multi-head scaled dot-product attention. Logits are scaled by 1/sqrt(C)
// with C the full channel count; each head works on a C/h channel slice of
// the Q/K/V projections.
AttentionOutput multi_head_attention(const Matrix& queries, const Matrix& keys,
                                     const AttentionWeights& w);

Matrix self_attention(const Matrix& x, const AttentionWeights& w);
Matrix ffn(const Matrix& x, const FfnWeights& w);
AttentionOutput ground_cross_attention(const Matrix& queries, const Matrix& ground,
                                       const AttentionWeights& w);
AttentionOutput visual_cross_attention(const Matrix& queries, const Matrix& visual,
                                       const AttentionWeights& w);

Matrix encoder_block(const Matrix& x, const EncoderBlockWeights& w);
Matrix encode(const Matrix& x, std::span<const EncoderBlockWeights> blocks);

// Ground cross-attention, query self-attention, visual cross-attention, FFN.
// The attention map is the ground cross-attention map.
AttentionOutput decoder_block(const Matrix& queries, const Matrix& ground, const Matrix& visual,
                              const DecoderBlockWeights& w);

struct DecoderOutput {
  Matrix queries;
  std::vector<Matrix> ground_attention;  // one map per block
};

DecoderOutput decode(const Matrix& queries, const Matrix& ground, const Matrix& visual,
                     std::span<const DecoderBlockWeights> blocks);

// Interleaved sine/cosine encoding: channel 2i holds sin(t / base^(2i/C)),
// channel 2i + 1 the matching cosine.
Matrix sinusoidal_encoding(Eigen::Index tokens, Eigen::Index channels, double base = 10000.0);

struct ModelConfig {
  Eigen::Index channels = 32;
  int heads = 4;
  Eigen::Index ffn_hidden = 64;
  Eigen::Index queries = 100;
  int visual_blocks = 3;
  int ground_blocks = 1;
  int decoder_blocks = 3;
  bool encode_ground_positions = false;
  bool zero_bias = false;
  std::uint64_t seed = 0;

  // Throws ShapeMismatch when the shapes are inconsistent.
  void validate() const;
};

struct ModelWeights {
  std::vector<EncoderBlockWeights> visual_encoder;
  std::vector<EncoderBlockWeights> ground_encoder;
  std::vector<DecoderBlockWeights> decoder;
  Matrix queries;

  static ModelWeights random(const ModelConfig& cfg);
};

struct ForwardOutput {
  Matrix visual_embeddings;
  Matrix ground_embeddings;
  Matrix queries;
  std::vector<Matrix> ground_attention;
};

ForwardOutput forward(const Matrix& visual_tokens, const Matrix& ground_tokens,
                      const ModelWeights& w, const ModelConfig& cfg);

// 64-bit FNV-1a over the little-endian IEEE-754 bytes of the entries in
// row-major order, prefixed by the shape.
std::uint64_t matrix_digest(const Matrix& m);

// Regression fixture: shapes, seed and per-output digests as JSON.
std::string forward_fixture(const ModelConfig& cfg, Eigen::Index visual_tokens,
                            Eigen::Index ground_tokens);

struct InvariantResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Row-stochastic maps, permutation equivariance, stack shape/finiteness and
// seeded determinism on randomized inputs.
std::vector<InvariantResult> check_attention_invariants(const ModelConfig& cfg,
                                                        Eigen::Index visual_tokens,
                                                        Eigen::Index ground_tokens);

}  // namespace gpk
