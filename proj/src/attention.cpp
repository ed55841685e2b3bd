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

#include "gpk/attention.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gpk/errors.hpp"

namespace gpk {

namespace {

std::string shape(const Matrix& m) { return fmt::format("{}x{}", m.rows(), m.cols()); }

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw ShapeMismatch(std::string(what) + " has non-finite entries");
}

void check_attention_shapes(const Matrix& queries, const Matrix& keys, const AttentionWeights& w) {
  const Eigen::Index c = w.channels();
  if (w.heads <= 0 || c % w.heads != 0) {
    throw ShapeMismatch(fmt::format("{} channels not divisible by {} heads", c, w.heads));
  }
  for (const LinearLayer* l : {&w.query, &w.key, &w.value, &w.output}) {
    if (l->weight.rows() != c || l->weight.cols() != c || l->bias.size() != c) {
      throw ShapeMismatch("attention projections must be " + std::to_string(c) + "x" +
                          std::to_string(c));
    }
  }
  if (queries.cols() != c || keys.cols() != c) {
    throw ShapeMismatch("inputs " + shape(queries) + " and " + shape(keys) + " do not have " +
                        std::to_string(c) + " channels");
  }
  if (queries.rows() < 1 || keys.rows() < 1) throw ShapeMismatch("empty token sequence");
}

// Row-wise softmax with max subtraction.
void softmax_rows(Matrix& logits) {
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

Matrix uniform_inputs(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols,
                      double scale = 1.0) {
  WeightSampler s(seed, 1);
  return s.matrix(rows, cols) * scale;
}

// Block-level checks use inputs large enough that the random projections
// give peaked attention; with the default initialization and no residual
// paths, stacked encoder blocks drive all tokens toward a common value and
// maps toward uniform, which would make the checks vacuous.
constexpr double kProbeScale = 8.0;

Matrix permute_rows(const Matrix& m, const std::vector<Eigen::Index>& perm) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.row(i) = m.row(perm[static_cast<std::size_t>(i)]);
  return out;
}

std::vector<Eigen::Index> shuffled(Eigen::Index n, std::uint64_t seed) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  // Fisher-Yates with a modulo draw keeps the order toolchain-independent.
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);
  return perm;
}

std::string hex(std::uint64_t v) { return fmt::format("{:016x}", v); }

}  // namespace

Matrix LinearLayer::apply(const Matrix& x) const {
  if (x.cols() != weight.rows()) {
    throw ShapeMismatch("linear layer expects " + std::to_string(weight.rows()) +
                        " input channels, got " + std::to_string(x.cols()));
  }
  Matrix y = x * weight;
  y.rowwise() += bias;
  return y;
}

WeightSampler::WeightSampler(std::uint64_t seed, Eigen::Index channels)
    : rng_(seed), bound_(1.0 / std::sqrt(static_cast<double>(channels))) {
  if (channels <= 0) throw ShapeMismatch("channel count must be positive");
}

double WeightSampler::next() {
  const double unit = static_cast<double>(rng_() >> 11) * 0x1.0p-53;  // [0, 1)
  return (2.0 * unit - 1.0) * bound_;
}

Matrix WeightSampler::matrix(Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = next();
  }
  return m;
}

LinearLayer WeightSampler::linear(Eigen::Index in, Eigen::Index out, bool zero_bias) {
  LinearLayer l{matrix(in, out), RowVector::Zero(out)};
  if (!zero_bias) l.bias = matrix(1, out);
  return l;
}

AttentionWeights AttentionWeights::random(WeightSampler& s, Eigen::Index channels, int heads,
                                          bool zero_bias) {
  AttentionWeights w;
  w.heads = heads;
  w.query = s.linear(channels, channels, zero_bias);
  w.key = s.linear(channels, channels, zero_bias);
  w.value = s.linear(channels, channels, zero_bias);
  w.output = s.linear(channels, channels, zero_bias);
  return w;
}

FfnWeights FfnWeights::random(WeightSampler& s, Eigen::Index channels, Eigen::Index hidden,
                              bool zero_bias) {
  return {s.linear(channels, hidden, zero_bias), s.linear(hidden, channels, zero_bias)};
}

AttentionOutput multi_head_attention(const Matrix& queries, const Matrix& keys,
                                     const AttentionWeights& w) {
  check_attention_shapes(queries, keys, w);
  const Eigen::Index c = w.channels();
  const Eigen::Index dh = c / w.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(c));

  const Matrix q = w.query.apply(queries);
  const Matrix k = w.key.apply(keys);
  const Matrix v = w.value.apply(keys);

  Matrix concat(queries.rows(), c);
  Matrix mean_map = Matrix::Zero(queries.rows(), keys.rows());
  for (int h = 0; h < w.heads; ++h) {
    const Eigen::Index off = h * dh;
    Matrix a = (q.middleCols(off, dh) * k.middleCols(off, dh).transpose()) * scale;
    softmax_rows(a);
    concat.middleCols(off, dh) = a * v.middleCols(off, dh);
    mean_map += a;
  }
  mean_map /= static_cast<double>(w.heads);
  return {w.output.apply(concat), std::move(mean_map)};
}

Matrix self_attention(const Matrix& x, const AttentionWeights& w) {
  return multi_head_attention(x, x, w).values;
}

Matrix ffn(const Matrix& x, const FfnWeights& w) {
  if (w.expand.out_features() != w.project.in_features() ||
      w.expand.in_features() != w.project.out_features()) {
    throw ShapeMismatch("FFN layers do not chain");
  }
  return w.project.apply(w.expand.apply(x).cwiseMax(0.0));
}

AttentionOutput ground_cross_attention(const Matrix& queries, const Matrix& ground,
                                       const AttentionWeights& w) {
  return multi_head_attention(queries, ground, w);
}

AttentionOutput visual_cross_attention(const Matrix& queries, const Matrix& visual,
                                       const AttentionWeights& w) {
  return multi_head_attention(queries, visual, w);
}

Matrix encoder_block(const Matrix& x, const EncoderBlockWeights& w) {
  return ffn(self_attention(x, w.attention), w.ffn);
}

Matrix encode(const Matrix& x, std::span<const EncoderBlockWeights> blocks) {
  Matrix y = x;
  for (const auto& b : blocks) y = encoder_block(y, b);
  return y;
}

AttentionOutput decoder_block(const Matrix& queries, const Matrix& ground, const Matrix& visual,
                              const DecoderBlockWeights& w) {
  AttentionOutput g = ground_cross_attention(queries, ground, w.ground_cross);
  const Matrix qg = self_attention(g.values, w.self);
  const Matrix mid = visual_cross_attention(qg, visual, w.visual_cross).values;
  return {ffn(mid, w.ffn), std::move(g.attention)};
}

DecoderOutput decode(const Matrix& queries, const Matrix& ground, const Matrix& visual,
                     std::span<const DecoderBlockWeights> blocks) {
  DecoderOutput out{queries, {}};
  for (const auto& b : blocks) {
    AttentionOutput step = decoder_block(out.queries, ground, visual, b);
    out.queries = std::move(step.values);
    out.ground_attention.push_back(std::move(step.attention));
  }
  return out;
}

Matrix sinusoidal_encoding(Eigen::Index tokens, Eigen::Index channels, double base) {
  Matrix pe(tokens, channels);
  for (Eigen::Index t = 0; t < tokens; ++t) {
    for (Eigen::Index c = 0; c < channels; ++c) {
      const double exponent = static_cast<double>(c - c % 2) / static_cast<double>(channels);
      const double angle = static_cast<double>(t) / std::pow(base, exponent);
      pe(t, c) = c % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

void ModelConfig::validate() const {
  if (channels <= 0 || heads <= 0 || channels % heads != 0) {
    throw ShapeMismatch(fmt::format("{} channels not divisible by {} heads", channels, heads));
  }
  if (ffn_hidden <= 0 || queries <= 0) throw ShapeMismatch("FFN width and query count must be positive");
  if (visual_blocks < 0 || ground_blocks < 0 || decoder_blocks < 0) {
    throw ShapeMismatch("block counts must be non-negative");
  }
}

ModelWeights ModelWeights::random(const ModelConfig& cfg) {
  cfg.validate();
  WeightSampler s(cfg.seed, cfg.channels);
  ModelWeights w;
  const auto encoder = [&] {
    return EncoderBlockWeights{AttentionWeights::random(s, cfg.channels, cfg.heads, cfg.zero_bias),
                               FfnWeights::random(s, cfg.channels, cfg.ffn_hidden, cfg.zero_bias)};
  };
  for (int i = 0; i < cfg.visual_blocks; ++i) w.visual_encoder.push_back(encoder());
  for (int i = 0; i < cfg.ground_blocks; ++i) w.ground_encoder.push_back(encoder());
  for (int i = 0; i < cfg.decoder_blocks; ++i) {
    DecoderBlockWeights d;
    d.ground_cross = AttentionWeights::random(s, cfg.channels, cfg.heads, cfg.zero_bias);
    d.self = AttentionWeights::random(s, cfg.channels, cfg.heads, cfg.zero_bias);
    d.visual_cross = AttentionWeights::random(s, cfg.channels, cfg.heads, cfg.zero_bias);
    d.ffn = FfnWeights::random(s, cfg.channels, cfg.ffn_hidden, cfg.zero_bias);
    w.decoder.push_back(std::move(d));
  }
  w.queries = s.matrix(cfg.queries, cfg.channels);
  return w;
}

ForwardOutput forward(const Matrix& visual_tokens, const Matrix& ground_tokens,
                      const ModelWeights& w, const ModelConfig& cfg) {
  cfg.validate();
  if (visual_tokens.cols() != cfg.channels || ground_tokens.cols() != cfg.channels) {
    throw ShapeMismatch("token channels differ from the model width");
  }
  require_finite(visual_tokens, "visual tokens");
  require_finite(ground_tokens, "ground tokens");

  const Matrix fv = visual_tokens + sinusoidal_encoding(visual_tokens.rows(), cfg.channels);
  Matrix fg = ground_tokens;
  if (cfg.encode_ground_positions) fg += sinusoidal_encoding(ground_tokens.rows(), cfg.channels);

  ForwardOutput out;
  out.visual_embeddings = encode(fv, w.visual_encoder);
  out.ground_embeddings = encode(fg, w.ground_encoder);
  DecoderOutput d = decode(w.queries, out.ground_embeddings, out.visual_embeddings, w.decoder);
  out.queries = std::move(d.queries);
  out.ground_attention = std::move(d.ground_attention);
  return out;
}

std::uint64_t matrix_digest(const Matrix& m) {
  std::uint64_t h = 14695981039346656037ULL;
  const auto feed = [&h](std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      h ^= (word >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  feed(static_cast<std::uint64_t>(m.rows()));
  feed(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) feed(std::bit_cast<std::uint64_t>(m(r, c)));
  }
  return h;
}

std::string forward_fixture(const ModelConfig& cfg, Eigen::Index visual_tokens,
                            Eigen::Index ground_tokens) {
  const ModelWeights w = ModelWeights::random(cfg);
  const Matrix fv = uniform_inputs(cfg.seed + 1, visual_tokens, cfg.channels);
  const Matrix fg = uniform_inputs(cfg.seed + 2, ground_tokens, cfg.channels);
  const ForwardOutput out = forward(fv, fg, w, cfg);

  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["channels"] = cfg.channels;
  j["heads"] = cfg.heads;
  j["ffn_hidden"] = cfg.ffn_hidden;
  j["queries"] = cfg.queries;
  j["visual_tokens"] = visual_tokens;
  j["ground_tokens"] = ground_tokens;
  j["blocks"] = {{"visual", cfg.visual_blocks},
                 {"ground", cfg.ground_blocks},
                 {"decoder", cfg.decoder_blocks}};
  j["encode_ground_positions"] = cfg.encode_ground_positions;
  j["zero_bias"] = cfg.zero_bias;
  auto& digests = j["digests"];
  digests["visual_embeddings"] = hex(matrix_digest(out.visual_embeddings));
  digests["ground_embeddings"] = hex(matrix_digest(out.ground_embeddings));
  digests["queries"] = hex(matrix_digest(out.queries));
  for (std::size_t i = 0; i < out.ground_attention.size(); ++i) {
    digests["ground_attention_" + std::to_string(i)] = hex(matrix_digest(out.ground_attention[i]));
  }
  return j.dump(2) + "\n";
}

std::vector<InvariantResult> check_attention_invariants(const ModelConfig& cfg,
                                                        Eigen::Index visual_tokens,
                                                        Eigen::Index ground_tokens) {
  constexpr double kTol = 1e-9;
  std::vector<InvariantResult> results;
  const ModelWeights w = ModelWeights::random(cfg);
  const Matrix fv = uniform_inputs(cfg.seed + 1, visual_tokens, cfg.channels);
  const Matrix fg = uniform_inputs(cfg.seed + 2, ground_tokens, cfg.channels);
  const ForwardOutput out = forward(fv, fg, w, cfg);

  const Matrix probe_v = uniform_inputs(cfg.seed + 5, visual_tokens, cfg.channels, kProbeScale);
  const Matrix probe_g = uniform_inputs(cfg.seed + 6, ground_tokens, cfg.channels, kProbeScale);
  const Matrix probe_q = uniform_inputs(cfg.seed + 7, cfg.queries, cfg.channels, kProbeScale);

  {
    std::vector<Matrix> maps = out.ground_attention;
    if (!w.decoder.empty()) {
      maps.push_back(ground_cross_attention(probe_q, probe_g, w.decoder.front().ground_cross).attention);
    }
    double worst_sum = 0.0, min_entry = 1.0, max_entry = 0.0;
    for (const Matrix& a : maps) {
      worst_sum = std::max(worst_sum, (a.rowwise().sum().array() - 1.0).abs().maxCoeff());
      min_entry = std::min(min_entry, a.minCoeff());
      max_entry = std::max(max_entry, a.maxCoeff());
    }
    const bool ok = !out.ground_attention.empty() && worst_sum <= kTol && min_entry >= 0.0 &&
                    max_entry <= 1.0;
    results.push_back({"attention_rows_stochastic", ok,
                       fmt::format("max |row sum - 1| = {:.3g}, entries in [{:.3g}, {:.3g}]",
                                   worst_sum, min_entry, max_entry)});
  }
  {
    const auto perm = shuffled(visual_tokens, cfg.seed + 3);
    const AttentionWeights& a = w.visual_encoder.empty()
                                    ? w.decoder.front().self
                                    : w.visual_encoder.front().attention;
    const double err = (self_attention(permute_rows(probe_v, perm), a) -
                        permute_rows(self_attention(probe_v, a), perm))
                           .cwiseAbs()
                           .maxCoeff();
    results.push_back({"self_attention_token_permutation", err <= kTol,
                       fmt::format("max deviation {:.3g}", err)});
  }
  {
    const auto perm = shuffled(cfg.queries, cfg.seed + 4);
    const DecoderOutput base = decode(probe_q, probe_g, probe_v, w.decoder);
    const DecoderOutput moved = decode(permute_rows(probe_q, perm), probe_g, probe_v, w.decoder);
    double err = (moved.queries - permute_rows(base.queries, perm)).cwiseAbs().maxCoeff();
    for (std::size_t i = 0; i < base.ground_attention.size(); ++i) {
      err = std::max(err, (moved.ground_attention[i] - permute_rows(base.ground_attention[i], perm))
                              .cwiseAbs()
                              .maxCoeff());
    }
    results.push_back({"decoder_query_permutation", err <= kTol,
                       fmt::format("max deviation {:.3g}", err)});
  }
  {
    const bool ok = out.queries.rows() == cfg.queries && out.queries.cols() == cfg.channels &&
                    out.queries.allFinite() &&
                    static_cast<int>(out.ground_attention.size()) == cfg.decoder_blocks;
    results.push_back({"decoder_stack_shape_finite", ok,
                       fmt::format("{} blocks -> {}", cfg.decoder_blocks, shape(out.queries))});
  }
  {
    const ForwardOutput again = forward(fv, fg, ModelWeights::random(cfg), cfg);
    bool same = matrix_digest(again.queries) == matrix_digest(out.queries) &&
                matrix_digest(again.visual_embeddings) == matrix_digest(out.visual_embeddings) &&
                matrix_digest(again.ground_embeddings) == matrix_digest(out.ground_embeddings);
    for (std::size_t i = 0; i < out.ground_attention.size(); ++i) {
      same = same && matrix_digest(again.ground_attention[i]) == matrix_digest(out.ground_attention[i]);
    }
    results.push_back({"seeded_determinism", same,
                       "queries digest " + hex(matrix_digest(out.queries))});
  }
  return results;
}

}  // namespace gpk
