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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "squadlab/layers.h"
#include "squadlab/squad_data.h"

namespace squadlab {

// Differentiable per-token start/end scores for one feature, each [seq].
struct SpanLogits {
  std::string qid;
  std::size_t feature_index = 0;
  Tensor start;
  Tensor end;
  // Positions a gold label may occupy: context tokens and the null
  // position. Empty means every position is live.
  std::vector<bool> live;
};

// Plain-value logits, the unit that is dumped, summed and decoded.
struct FeatureLogits {
  std::string qid;
  std::size_t feature_index = 0;
  std::vector<double> start;
  std::vector<double> end;
};

FeatureLogits to_values(const SpanLogits& logits);

// Positions that are masked out of the span distribution: everything that
// is not context, except the null position, which scores "no answer".
Mask span_mask(const std::vector<bool>& context_mask);

struct SquadOutHead {
  Tensor weight;  // [d, 2]
  Tensor bias;    // [2]

  static SquadOutHead create(ParameterStore& store, const std::string& prefix, std::size_t width, Rng& rng);
};

// Linear d -> 2, split into start/end columns, then masked.
SpanLogits albert_squad_out(const SquadOutHead& head, const Tensor& x, const std::vector<bool>& context_mask);

struct BidafOutHead {
  Tensor w_start_att;  // [d_att, 1]
  Tensor w_start_dec;  // [d_dec, 1]
  Tensor w_end_att;    // [d_att, 1]
  Tensor w_end_rnn;    // [d_dec, 1]
  GruLayer end_rnn;    // unidirectional, d_dec -> d_dec

  static BidafOutHead create(ParameterStore& store, const std::string& prefix, std::size_t d_att,
                             std::size_t d_dec, Rng& rng);
};

// start = att w1 + dec w2; end = att w3 + gru(dec) w4; then masked.
SpanLogits bidaf_out(const BidafOutHead& head, const Tensor& att_out, const Tensor& dec_out,
                     const std::vector<bool>& context_mask);

// Mean of the start and end cross-entropies.
Tensor span_loss(const SpanLogits& logits, std::size_t gold_start, std::size_t gold_end);

struct AnswerCandidate {
  std::string qid;
  std::string text;  // empty for the no-answer candidate
  std::size_t feature_index = 0;
  std::optional<std::size_t> start_token;
  std::optional<std::size_t> end_token;
  double score = 0.0;

  bool is_null() const { return !start_token.has_value(); }
};

// Ranking order: higher score, then lower feature index, smaller start,
// smaller end; a span beats the null candidate on a full tie.
bool ranks_before(const AnswerCandidate& a, const AnswerCandidate& b);

struct DecodeOptions {
  std::size_t n_best = 20;
  std::size_t max_answer_length = 30;
  double null_threshold = 0.0;

  // n_best counts the null candidate, so at least one span needs n_best >= 2.
  void validate() const;
};

// Top n_best candidates for one feature in ranking order. The null
// candidate is always present: the best n_best - 1 spans plus null.
std::vector<AnswerCandidate> decode_spans(const FeatureLogits& logits, const Feature& feature,
                                          std::string_view context_text, const DecodeOptions& options);

struct QuestionPrediction {
  std::string qid;
  AnswerCandidate answer;                // the decision; null means "no answer"
  std::vector<AnswerCandidate> nbest;    // merged over chunks, ranking order
  double null_score = 0.0;               // minimum null score over chunks
  std::optional<double> model_f1_weight;
};

// Merges per-feature candidate lists of one question. Predicts no answer
// iff null_score - best_span_score > null_threshold.
QuestionPrediction aggregate_features(std::span<const std::vector<AnswerCandidate>> per_feature,
                                      const DecodeOptions& options);

// Decodes every feature and aggregates per question, in order of each
// question's first feature. Logits are matched to features by
// (qid, feature_index); contexts maps qid to its context text.
std::vector<QuestionPrediction> predictions_from_logits(std::span<const FeatureLogits> logits,
                                                        std::span<const Feature> features,
                                                        const std::map<std::string, std::string>& contexts,
                                                        const DecodeOptions& options);

// Prediction file: JSON-lines {qid, prediction, nbest: [{text,
// feature_index, start_token, end_token, score}], null_score,
// model_f1_weight?}.
nlohmann::ordered_json prediction_to_json(const QuestionPrediction& p);
QuestionPrediction prediction_from_json(const nlohmann::ordered_json& j);
void write_predictions(const std::string& path, const std::vector<QuestionPrediction>& predictions);
std::vector<QuestionPrediction> read_predictions(const std::string& path);

}  // namespace squadlab
