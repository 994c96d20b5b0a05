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

#include "squadlab/layers.h"

#include <algorithm>
#include <cmath>

#include "squadlab/text.h"

namespace squadlab {
namespace {

void expect_width(const Tensor& x, std::size_t width, const char* layer) {
  if (x.rank() != 2 || x.dim(1) != width) {
    throw ShapeError(std::string(layer) + " expects input width " + std::to_string(width) + ", got shape " +
                     shape_str(x.shape()));
  }
}

Tensor row(const Tensor& x, std::size_t i) { return slice(x, 0, i, i + 1); }

Tensor cols(const Tensor& x, std::size_t begin, std::size_t end) { return slice(x, 1, begin, end); }

}  // namespace

HighwayLayer HighwayLayer::create(ParameterStore& store, const std::string& prefix, std::size_t width, Rng& rng) {
  HighwayLayer l;
  l.w_proj = store.add(prefix + ".W_proj", {width, width}, width, rng);
  l.b_proj = store.add(prefix + ".b_proj", {width}, width, rng);
  l.w_gate = store.add(prefix + ".W_gate", {width, width}, width, rng);
  l.b_gate = store.add(prefix + ".b_gate", {width}, width, rng);
  return l;
}

Tensor highway_forward(const HighwayLayer& layer, const Tensor& x) {
  expect_width(x, layer.width(), "highway");
  Tensor transform = relu(add(matmul(x, layer.w_proj), layer.b_proj));
  Tensor gate = sigmoid(add(matmul(x, layer.w_gate), layer.b_gate));
  // g * t + (1 - g) * x == x + g * (t - x)
  return add(x, mul(gate, sub(transform, x)));
}

LstmCell LstmCell::create(ParameterStore& store, const std::string& prefix, std::size_t input_width,
                          std::size_t hidden, Rng& rng) {
  LstmCell c;
  c.w_input = store.add(prefix + ".W_input", {input_width, 4 * hidden}, input_width, rng);
  c.w_hidden = store.add(prefix + ".W_hidden", {hidden, 4 * hidden}, hidden, rng);
  c.bias = store.add(prefix + ".bias", {4 * hidden}, hidden, rng);
  return c;
}

Tensor lstm_forward(const LstmCell& cell, const Tensor& x, bool reverse) {
  expect_width(x, cell.input_width(), "lstm");
  const std::size_t seq = x.dim(0);
  const std::size_t h = cell.hidden();
  const Tensor projected = add(matmul(x, cell.w_input), cell.bias);
  std::vector<Tensor> outputs(seq);
  Tensor hidden, state;
  for (std::size_t step = 0; step < seq; ++step) {
    const std::size_t t = reverse ? seq - 1 - step : step;
    Tensor pre = row(projected, t);
    if (hidden.defined()) pre = add(pre, matmul(hidden, cell.w_hidden));
    Tensor gates = sigmoid(cols(pre, 0, 3 * h));
    Tensor input_gate = cols(gates, 0, h);
    Tensor forget_gate = cols(gates, h, 2 * h);
    Tensor output_gate = cols(gates, 2 * h, 3 * h);
    Tensor candidate = tanh(cols(pre, 3 * h, 4 * h));
    Tensor written = mul(input_gate, candidate);
    state = state.defined() ? add(mul(forget_gate, state), written) : written;
    hidden = mul(output_gate, tanh(state));
    outputs[t] = hidden;
  }
  return concat(outputs, 0);
}

BiLstm BiLstm::create(ParameterStore& store, const std::string& prefix, std::size_t input_width,
                      std::size_t hidden, Rng& rng) {
  BiLstm b;
  b.forward = LstmCell::create(store, prefix + ".fwd", input_width, hidden, rng);
  b.backward = LstmCell::create(store, prefix + ".bwd", input_width, hidden, rng);
  return b;
}

Tensor bilstm_forward(const BiLstm& layer, const Tensor& x) {
  const Tensor parts[] = {lstm_forward(layer.forward, x, false), lstm_forward(layer.backward, x, true)};
  return concat(parts, 1);
}

GruCell GruCell::create(ParameterStore& store, const std::string& prefix, std::size_t input_width,
                        std::size_t hidden, Rng& rng) {
  GruCell c;
  c.w_input = store.add(prefix + ".W_input", {input_width, 3 * hidden}, input_width, rng);
  c.w_gates = store.add(prefix + ".U_gates", {hidden, 2 * hidden}, hidden, rng);
  c.w_candidate = store.add(prefix + ".U_candidate", {hidden, hidden}, hidden, rng);
  c.bias = store.add(prefix + ".bias", {3 * hidden}, hidden, rng);
  return c;
}

Tensor gru_direction(const GruCell& cell, const Tensor& x, bool reverse) {
  expect_width(x, cell.input_width(), "gru");
  const std::size_t seq = x.dim(0);
  const std::size_t h = cell.hidden();
  const Tensor projected = add(matmul(x, cell.w_input), cell.bias);
  std::vector<Tensor> outputs(seq);
  Tensor hidden;
  for (std::size_t step = 0; step < seq; ++step) {
    const std::size_t t = reverse ? seq - 1 - step : step;
    const Tensor xt = row(projected, t);
    Tensor gate_pre = cols(xt, 0, 2 * h);
    if (hidden.defined()) gate_pre = add(gate_pre, matmul(hidden, cell.w_gates));
    const Tensor gates = sigmoid(gate_pre);
    const Tensor update = cols(gates, 0, h);
    Tensor candidate_pre = cols(xt, 2 * h, 3 * h);
    if (hidden.defined()) {
      const Tensor reset = cols(gates, h, 2 * h);
      candidate_pre = add(candidate_pre, matmul(mul(reset, hidden), cell.w_candidate));
    }
    const Tensor candidate = tanh(candidate_pre);
    hidden = hidden.defined() ? add(hidden, mul(update, sub(candidate, hidden))) : mul(update, candidate);
    outputs[t] = hidden;
  }
  return concat(outputs, 0);
}

GruLayer GruLayer::create(ParameterStore& store, const std::string& prefix, std::size_t input_width,
                          std::size_t hidden, bool bidirectional, Rng& rng) {
  GruLayer g;
  g.forward = GruCell::create(store, prefix + ".fwd", input_width, hidden, rng);
  if (bidirectional) g.backward = GruCell::create(store, prefix + ".bwd", input_width, hidden, rng);
  return g;
}

Tensor gru_forward(const GruLayer& layer, const Tensor& x) {
  Tensor fwd = gru_direction(layer.forward, x, false);
  if (!layer.backward) return fwd;
  const Tensor parts[] = {fwd, gru_direction(*layer.backward, x, true)};
  return concat(parts, 1);
}

Tensor dot_product_attention(const Tensor& x, const std::vector<bool>& key_mask, bool causal) {
  if (x.rank() != 2) throw ShapeError("attention expects [seq, d], got " + shape_str(x.shape()));
  const std::size_t seq = x.dim(0);
  if (key_mask.size() != seq) {
    throw ShapeError("attention mask has " + std::to_string(key_mask.size()) + " entries for sequence length " +
                     std::to_string(seq));
  }
  Tensor scores = scale(matmul(x, transpose(x)), 1.0 / std::sqrt(static_cast<double>(x.dim(1))));
  Mask mask;
  mask.shape = {seq, seq};
  mask.values.assign(seq * seq, false);
  bool any = false;
  for (std::size_t i = 0; i < seq; ++i) {
    for (std::size_t j = 0; j < seq; ++j) {
      const bool hidden = !key_mask[j] || (causal && j > i);
      mask.values[i * seq + j] = hidden;
      any = any || hidden;
    }
  }
  if (any) scores = masked_fill(scores, mask, kMaskValue);
  return matmul(softmax(scores, 1), x);
}

WeightedAvgAttention WeightedAvgAttention::create(ParameterStore& store, const std::string& prefix,
                                                  std::size_t width, Rng& rng) {
  return {store.add(prefix + ".W", {width, 1}, width, rng)};
}

Tensor weighted_avg_weights(const WeightedAvgAttention& att, const Tensor& embeddings) {
  expect_width(embeddings, att.w.dim(0), "weighted-average attention");
  return softmax(matmul(embeddings, att.w), 0);
}

Tensor weighted_avg_attend(const WeightedAvgAttention& att, const Tensor& embeddings) {
  const Tensor weights = weighted_avg_weights(att, embeddings);
  const Tensor pooled = matmul(transpose(weights), embeddings);
  return add(embeddings, pooled);
}

CharCnn CharCnn::create(ParameterStore& store, const std::string& prefix, std::size_t d_char, std::size_t d_out,
                        Rng& rng) {
  CharCnn c;
  c.kernel = store.add(prefix + ".kernel", {kKernelWidth * d_char, d_out}, kKernelWidth * d_char, rng);
  c.bias = store.add(prefix + ".bias", {d_out}, kKernelWidth * d_char, rng);
  return c;
}

Tensor char_cnn_forward(const CharCnn& cnn, const std::vector<std::string>& tokens, const CharEmbeddingTable& table) {
  const std::size_t d_char = cnn.d_char();
  if (table.d_char() != d_char) {
    throw ShapeError("char table width " + std::to_string(table.d_char()) + " does not match char-CNN width " +
                     std::to_string(d_char));
  }
  if (tokens.empty()) throw ShapeError("char-CNN over an empty sequence");
  const std::size_t window = CharCnn::kKernelWidth * d_char;
  std::vector<double> windows;
  std::vector<std::size_t> offsets{0};
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto chars = split_codepoints(tokens[t]);
    if (chars.empty()) throw DataError("token " + std::to_string(t) + " has zero characters");
    std::vector<std::vector<double>> rows;
    rows.reserve(chars.size());
    for (const auto& c : chars) rows.push_back(table.row(c));
    for (std::size_t p = 0; p < chars.size(); ++p) {
      for (std::size_t k = 0; k < CharCnn::kKernelWidth; ++k) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(p + k) - 1;
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(rows.size())) {
          windows.insert(windows.end(), d_char, 0.0);
        } else {
          windows.insert(windows.end(), rows[static_cast<std::size_t>(src)].begin(),
                         rows[static_cast<std::size_t>(src)].end());
        }
      }
    }
    offsets.push_back(offsets.back() + chars.size());
  }
  const Tensor input({offsets.back(), window}, std::move(windows));
  const Tensor conv = add(matmul(input, cnn.kernel), cnn.bias);
  return segment_max(conv, offsets);
}

EmbeddingCombiner EmbeddingCombiner::create(ParameterStore& store, const std::string& prefix, std::size_t d_model,
                                            std::size_t d_char, std::size_t d_char_out, Rng& rng) {
  EmbeddingCombiner c;
  c.token_attention = WeightedAvgAttention::create(store, prefix + ".token_attention", d_model, rng);
  const bool with_chars = d_char > 0 && d_char_out > 0;
  if (with_chars) {
    c.char_cnn = CharCnn::create(store, prefix + ".char_cnn", d_char, d_char_out, rng);
    c.char_attention = WeightedAvgAttention::create(store, prefix + ".char_attention", d_char_out, rng);
  }
  const std::size_t width = d_model + (with_chars ? d_char_out : 0);
  c.highway1 = HighwayLayer::create(store, prefix + ".highway.0", width, rng);
  c.highway2 = HighwayLayer::create(store, prefix + ".highway.1", width, rng);
  return c;
}

Tensor combine_embeddings(const EmbeddingCombiner& combiner, const Tensor& token_embeddings,
                          const std::vector<std::string>& tokens, const CharEmbeddingTable& chars) {
  Tensor combined = weighted_avg_attend(combiner.token_attention, token_embeddings);
  if (combiner.char_cnn) {
    if (tokens.size() != token_embeddings.dim(0)) {
      throw ShapeError("combiner got " + std::to_string(tokens.size()) + " tokens for " +
                       std::to_string(token_embeddings.dim(0)) + " embedding rows");
    }
    const Tensor pooled = char_cnn_forward(*combiner.char_cnn, tokens, chars);
    const Tensor parts[] = {combined, weighted_avg_attend(*combiner.char_attention, pooled)};
    combined = concat(parts, 1);
  }
  return highway_forward(combiner.highway2, highway_forward(combiner.highway1, combined));
}

}  // namespace squadlab
