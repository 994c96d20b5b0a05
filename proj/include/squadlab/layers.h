// Copyright 2026 The SquadLab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "squadlab/embedder.h"
#include "squadlab/ops.h"
#include "squadlab/optim.h"

namespace squadlab {

// y = g * relu(x W_proj + b_proj) + (1 - g) * x, g = sigmoid(x W_gate + b_gate)
struct HighwayLayer {
  Tensor w_proj, b_proj, w_gate, b_gate;

  static HighwayLayer create(ParameterStore& store, const std::string& prefix, std::size_t width, Rng& rng);
  std::size_t width() const { return w_proj.dim(0); }
};

Tensor highway_forward(const HighwayLayer& layer, const Tensor& x);

// Fused gate weights; columns are ordered input, forget, output, candidate.
struct LstmCell {
  Tensor w_input;   // [d_in, 4h]
  Tensor w_hidden;  // [h, 4h]
  Tensor bias;      // [4h]

  static LstmCell create(ParameterStore& store, const std::string& prefix, std::size_t input_width,
                         std::size_t hidden, Rng& rng);
  std::size_t input_width() const { return w_input.dim(0); }
  std::size_t hidden() const { return w_hidden.dim(0); }
};

// One direction over x [seq, d_in] from zero state; returns [seq, h] in
// input order. `reverse` runs from the last position to the first.
Tensor lstm_forward(const LstmCell& cell, const Tensor& x, bool reverse = false);

struct BiLstm {
  LstmCell forward, backward;

  static BiLstm create(ParameterStore& store, const std::string& prefix, std::size_t input_width,
                       std::size_t hidden, Rng& rng);
  std::size_t output_width() const { return 2 * forward.hidden(); }
};

Tensor bilstm_forward(const BiLstm& layer, const Tensor& x);

// h_t = (1 - u) h_{t-1} + u * tanh(x W_c + (r * h_{t-1}) U_c + b_c)
// with u, r = sigmoid(x W + h U + b). Columns of w_input/bias: update,
// reset, candidate.
struct GruCell {
  Tensor w_input;       // [d_in, 3h]
  Tensor w_gates;       // [h, 2h]
  Tensor w_candidate;   // [h, h]
  Tensor bias;          // [3h]

  static GruCell create(ParameterStore& store, const std::string& prefix, std::size_t input_width,
                        std::size_t hidden, Rng& rng);
  std::size_t input_width() const { return w_input.dim(0); }
  std::size_t hidden() const { return w_candidate.dim(0); }
};

Tensor gru_direction(const GruCell& cell, const Tensor& x, bool reverse = false);

struct GruLayer {
  GruCell forward;
  std::optional<GruCell> backward;

  static GruLayer create(ParameterStore& store, const std::string& prefix, std::size_t input_width,
                         std::size_t hidden, bool bidirectional, Rng& rng);
  bool bidirectional() const { return backward.has_value(); }
  std::size_t output_width() const { return (bidirectional() ? 2 : 1) * forward.hidden(); }
};

Tensor gru_forward(const GruLayer& layer, const Tensor& x);

// softmax(x x^T / sqrt(d)) x with non-attendable keys masked; `causal`
// additionally hides keys after each query position.
Tensor dot_product_attention(const Tensor& x, const std::vector<bool>& key_mask, bool causal);

struct WeightedAvgAttention {
  Tensor w;  // [d, 1]

  static WeightedAvgAttention create(ParameterStore& store, const std::string& prefix, std::size_t width,
                                     Rng& rng);
};

// a = softmax(E W) over positions, c = sum_i a_i E_i, row i = E_i + c.
Tensor weighted_avg_attend(const WeightedAvgAttention& att, const Tensor& embeddings);
// The attention weights a, shape [seq, 1].
Tensor weighted_avg_weights(const WeightedAvgAttention& att, const Tensor& embeddings);

// Width-3 convolution over a token's character vectors (zero padded to keep
// one window per character), max-pooled over character positions.
struct CharCnn {
  static constexpr std::size_t kKernelWidth = 3;
  Tensor kernel;  // [3 * d_char, d_out]
  Tensor bias;    // [d_out]

  static CharCnn create(ParameterStore& store, const std::string& prefix, std::size_t d_char,
                        std::size_t d_out, Rng& rng);
  std::size_t d_char() const { return kernel.dim(0) / kKernelWidth; }
  std::size_t d_out() const { return kernel.dim(1); }
};

// [seq, d_out], one pooled row per token.
Tensor char_cnn_forward(const CharCnn& cnn, const std::vector<std::string>& tokens,
                        const CharEmbeddingTable& table);

struct EmbeddingCombiner {
  WeightedAvgAttention token_attention;
  std::optional<CharCnn> char_cnn;  // absent when the char branch has zero width
  std::optional<WeightedAvgAttention> char_attention;
  HighwayLayer highway1, highway2;

  static EmbeddingCombiner create(ParameterStore& store, const std::string& prefix, std::size_t d_model,
                                  std::size_t d_char, std::size_t d_char_out, Rng& rng);
  std::size_t output_width() const { return highway1.width(); }
};

Tensor combine_embeddings(const EmbeddingCombiner& combiner, const Tensor& token_embeddings,
                          const std::vector<std::string>& tokens, const CharEmbeddingTable& chars);

}  // namespace squadlab
