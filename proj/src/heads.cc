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

#include "squadlab/heads.h"

#include <algorithm>

#include "squadlab/io.h"

namespace squadlab {

using nlohmann::ordered_json;

FeatureLogits to_values(const SpanLogits& logits) {
  return {logits.qid, logits.feature_index,
          std::vector<double>(logits.start.data().begin(), logits.start.data().end()),
          std::vector<double>(logits.end.data().begin(), logits.end.data().end())};
}

namespace {

std::vector<bool> live_positions(const std::vector<bool>& context_mask) {
  std::vector<bool> live = context_mask;
  if (!live.empty()) live[kNullPosition] = true;
  return live;
}

}  // namespace

Mask span_mask(const std::vector<bool>& context_mask) {
  std::vector<bool> masked(context_mask.size());
  for (std::size_t i = 0; i < masked.size(); ++i) masked[i] = !context_mask[i] && i != kNullPosition;
  return Mask::from(std::move(masked));
}

SquadOutHead SquadOutHead::create(ParameterStore& store, const std::string& prefix, std::size_t width, Rng& rng) {
  SquadOutHead h;
  h.weight = store.add(prefix + ".weight", {width, 2}, width, rng);
  h.bias = store.add(prefix + ".bias", {2}, width, rng);
  return h;
}

namespace {

void check_mask(const Tensor& x, const std::vector<bool>& context_mask, const char* head) {
  if (x.rank() != 2 || x.dim(0) != context_mask.size()) {
    throw ShapeError(std::string(head) + ": input of shape " + shape_str(x.shape()) + " does not match " +
                     std::to_string(context_mask.size()) + " mask entries");
  }
}

Tensor flatten_column(const Tensor& x, std::size_t column) {
  return reshape(slice(x, 1, column, column + 1), {x.dim(0)});
}

}  // namespace

SpanLogits albert_squad_out(const SquadOutHead& head, const Tensor& x, const std::vector<bool>& context_mask) {
  check_mask(x, context_mask, "squad-out head");
  if (x.dim(1) != head.weight.dim(0)) {
    throw ShapeError("squad-out head expects width " + std::to_string(head.weight.dim(0)) + ", got " +
                     shape_str(x.shape()));
  }
  const Tensor logits = add(matmul(x, head.weight), head.bias);
  const Mask mask = span_mask(context_mask);
  SpanLogits out;
  out.start = masked_fill(flatten_column(logits, 0), mask, kMaskValue);
  out.end = masked_fill(flatten_column(logits, 1), mask, kMaskValue);
  out.live = live_positions(context_mask);
  return out;
}

BidafOutHead BidafOutHead::create(ParameterStore& store, const std::string& prefix, std::size_t d_att,
                                  std::size_t d_dec, Rng& rng) {
  BidafOutHead h;
  h.w_start_att = store.add(prefix + ".w_start_att", {d_att, 1}, d_att, rng);
  h.w_start_dec = store.add(prefix + ".w_start_dec", {d_dec, 1}, d_dec, rng);
  h.w_end_att = store.add(prefix + ".w_end_att", {d_att, 1}, d_att, rng);
  h.w_end_rnn = store.add(prefix + ".w_end_rnn", {d_dec, 1}, d_dec, rng);
  h.end_rnn = GruLayer::create(store, prefix + ".end_rnn", d_dec, d_dec, false, rng);
  return h;
}

SpanLogits bidaf_out(const BidafOutHead& head, const Tensor& att_out, const Tensor& dec_out,
                     const std::vector<bool>& context_mask) {
  check_mask(att_out, context_mask, "bidaf head");
  check_mask(dec_out, context_mask, "bidaf head");
  if (att_out.dim(1) != head.w_start_att.dim(0) || dec_out.dim(1) != head.w_start_dec.dim(0)) {
    throw ShapeError("bidaf head expects widths " + std::to_string(head.w_start_att.dim(0)) + "/" +
                     std::to_string(head.w_start_dec.dim(0)) + ", got " + shape_str(att_out.shape()) + " and " +
                     shape_str(dec_out.shape()));
  }
  const std::size_t seq = att_out.dim(0);
  const Tensor end_repr = gru_forward(head.end_rnn, dec_out);
  const Tensor start = add(matmul(att_out, head.w_start_att), matmul(dec_out, head.w_start_dec));
  const Tensor end = add(matmul(att_out, head.w_end_att), matmul(end_repr, head.w_end_rnn));
  const Mask mask = span_mask(context_mask);
  SpanLogits out;
  out.start = masked_fill(reshape(start, {seq}), mask, kMaskValue);
  out.end = masked_fill(reshape(end, {seq}), mask, kMaskValue);
  out.live = live_positions(context_mask);
  return out;
}

Tensor span_loss(const SpanLogits& logits, std::size_t gold_start, std::size_t gold_end) {
  const std::size_t seq = logits.start.numel();
  if (logits.end.numel() != seq) throw ShapeError("start and end logits differ in length");
  for (std::size_t gold : {gold_start, gold_end}) {
    if (gold >= seq) {
      throw DataError("gold position " + std::to_string(gold) + " outside sequence of length " +
                      std::to_string(seq) + " (" + logits.qid + "#" + std::to_string(logits.feature_index) + ")");
    }
  }
  if (!logits.live.empty() && logits.live.size() != seq) throw ShapeError("live mask differs in length from logits");
  if (!logits.live.empty() && (!logits.live[gold_start] || !logits.live[gold_end])) {
    throw DataError("gold span (" + std::to_string(gold_start) + ", " + std::to_string(gold_end) +
                    ") falls on a masked position in " + logits.qid + "#" + std::to_string(logits.feature_index));
  }
  const std::size_t start_target[] = {gold_start};
  const std::size_t end_target[] = {gold_end};
  const Tensor start_loss = cross_entropy_from_logits(reshape(logits.start, {1, seq}), start_target);
  const Tensor end_loss = cross_entropy_from_logits(reshape(logits.end, {1, seq}), end_target);
  return scale(add(start_loss, end_loss), 0.5);
}

bool ranks_before(const AnswerCandidate& a, const AnswerCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.is_null() != b.is_null()) return !a.is_null();
  if (a.feature_index != b.feature_index) return a.feature_index < b.feature_index;
  if (a.is_null()) return false;
  if (*a.start_token != *b.start_token) return *a.start_token < *b.start_token;
  return *a.end_token < *b.end_token;
}

void DecodeOptions::validate() const {
  if (n_best < 2) throw Error("n_best must be at least 2, got " + std::to_string(n_best));
  if (max_answer_length == 0) throw Error("max_answer_length must be positive");
}

std::vector<AnswerCandidate> decode_spans(const FeatureLogits& logits, const Feature& feature,
                                          std::string_view context_text, const DecodeOptions& options) {
  options.validate();
  const std::size_t seq = feature.tokens.size();
  if (logits.start.size() != seq || logits.end.size() != seq) {
    throw DataError("logits for " + logits.qid + "#" + std::to_string(logits.feature_index) + " have length " +
                    std::to_string(logits.start.size()) + ", feature has " + std::to_string(seq) + " tokens");
  }
  std::vector<AnswerCandidate> spans;
  for (std::size_t s = 0; s < seq; ++s) {
    if (!feature.context_mask[s]) continue;
    for (std::size_t e = s; e < seq && e - s < options.max_answer_length; ++e) {
      if (!feature.context_mask[e]) continue;
      AnswerCandidate c;
      c.qid = feature.qid;
      c.feature_index = feature.feature_index;
      c.start_token = s;
      c.end_token = e;
      c.score = logits.start[s] + logits.end[e];
      spans.push_back(std::move(c));
    }
  }
  const std::size_t keep = std::min(spans.size(), options.n_best - 1);
  std::partial_sort(spans.begin(), spans.begin() + static_cast<std::ptrdiff_t>(keep), spans.end(), ranks_before);
  spans.resize(keep);
  for (auto& c : spans) c.text = span_to_text(feature.token_word_span, *c.start_token, *c.end_token, context_text);

  AnswerCandidate null;
  null.qid = feature.qid;
  null.feature_index = feature.feature_index;
  null.score = logits.start[kNullPosition] + logits.end[kNullPosition];
  spans.push_back(std::move(null));
  std::stable_sort(spans.begin(), spans.end(), ranks_before);
  return spans;
}

QuestionPrediction aggregate_features(std::span<const std::vector<AnswerCandidate>> per_feature,
                                      const DecodeOptions& options) {
  options.validate();
  if (per_feature.empty()) throw DataError("cannot aggregate a question with zero features");
  QuestionPrediction out;
  std::vector<AnswerCandidate> spans;
  std::optional<double> null_score;
  for (const auto& list : per_feature) {
    for (const AnswerCandidate& c : list) {
      if (out.qid.empty()) out.qid = c.qid;
      if (c.is_null()) {
        null_score = null_score ? std::min(*null_score, c.score) : c.score;
      } else {
        spans.push_back(c);
      }
    }
  }
  if (!null_score) throw DataError("question " + out.qid + " has no null candidate");
  out.null_score = *null_score;
  std::sort(spans.begin(), spans.end(), ranks_before);

  AnswerCandidate null;
  null.qid = out.qid;
  null.score = out.null_score;
  bool found = false;
  for (const auto& list : per_feature) {
    for (const AnswerCandidate& c : list) {
      if (c.is_null() && c.score == out.null_score && (!found || c.feature_index < null.feature_index)) {
        null.feature_index = c.feature_index;
        found = true;
      }
    }
  }

  if (spans.empty() || out.null_score - spans.front().score > options.null_threshold) {
    out.answer = null;
  } else {
    out.answer = spans.front();
  }
  const std::size_t keep = std::min(spans.size(), options.n_best - 1);
  out.nbest.assign(spans.begin(), spans.begin() + static_cast<std::ptrdiff_t>(keep));
  out.nbest.push_back(null);
  std::stable_sort(out.nbest.begin(), out.nbest.end(), ranks_before);
  return out;
}

std::vector<QuestionPrediction> predictions_from_logits(std::span<const FeatureLogits> logits,
                                                        std::span<const Feature> features,
                                                        const std::map<std::string, std::string>& contexts,
                                                        const DecodeOptions& options) {
  std::map<std::pair<std::string, std::size_t>, const FeatureLogits*> by_key;
  for (const FeatureLogits& l : logits) by_key[{l.qid, l.feature_index}] = &l;
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::vector<AnswerCandidate>>> per_question;
  for (const Feature& f : features) {
    auto it = by_key.find({f.qid, f.feature_index});
    if (it == by_key.end()) {
      throw DataError("no logits for feature " + f.qid + "#" + std::to_string(f.feature_index));
    }
    auto ctx = contexts.find(f.qid);
    if (ctx == contexts.end()) throw DataError("no context text for question " + f.qid);
    auto [slot, inserted] = per_question.try_emplace(f.qid);
    if (inserted) order.push_back(f.qid);
    slot->second.push_back(decode_spans(*it->second, f, ctx->second, options));
  }
  std::vector<QuestionPrediction> out;
  out.reserve(order.size());
  for (const std::string& qid : order) out.push_back(aggregate_features(per_question.at(qid), options));
  return out;
}

ordered_json prediction_to_json(const QuestionPrediction& p) {
  ordered_json j;
  j["qid"] = p.qid;
  j["prediction"] = p.answer.text;
  ordered_json nbest = ordered_json::array();
  for (const AnswerCandidate& c : p.nbest) {
    ordered_json e;
    e["text"] = c.text;
    e["feature_index"] = c.feature_index;
    e["start_token"] = c.start_token ? ordered_json(*c.start_token) : ordered_json(nullptr);
    e["end_token"] = c.end_token ? ordered_json(*c.end_token) : ordered_json(nullptr);
    e["score"] = c.score;
    nbest.push_back(std::move(e));
  }
  j["nbest"] = std::move(nbest);
  j["null_score"] = p.null_score;
  if (p.model_f1_weight) j["model_f1_weight"] = *p.model_f1_weight;
  return j;
}

QuestionPrediction prediction_from_json(const ordered_json& j) {
  try {
    QuestionPrediction p;
    p.qid = j.at("qid").get<std::string>();
    for (const auto& e : j.at("nbest")) {
      AnswerCandidate c;
      c.qid = p.qid;
      c.text = e.at("text").get<std::string>();
      c.feature_index = e.value("feature_index", std::size_t{0});
      if (!e.at("start_token").is_null()) c.start_token = e.at("start_token").get<std::size_t>();
      if (e.contains("end_token") && !e.at("end_token").is_null()) c.end_token = e.at("end_token").get<std::size_t>();
      if (c.start_token.has_value() != c.end_token.has_value()) {
        throw DataError("prediction " + p.qid + " has a half-null candidate");
      }
      c.score = e.at("score").get<double>();
      p.nbest.push_back(std::move(c));
    }
    p.null_score = j.at("null_score").get<double>();
    if (j.contains("model_f1_weight") && !j.at("model_f1_weight").is_null()) {
      p.model_f1_weight = j.at("model_f1_weight").get<double>();
    }
    const std::string text = j.contains("prediction") ? j.at("prediction").get<std::string>()
                                                      : (p.nbest.empty() ? "" : p.nbest.front().text);
    // The decision is the best span when the text is non-empty, else null.
    AnswerCandidate decision;
    decision.qid = p.qid;
    decision.score = p.null_score;
    if (!text.empty()) {
      auto it = std::find_if(p.nbest.begin(), p.nbest.end(),
                             [&](const AnswerCandidate& c) { return !c.is_null() && c.text == text; });
      if (it == p.nbest.end()) throw DataError("prediction " + p.qid + " is not among its n-best candidates");
      decision = *it;
    } else {
      auto it = std::find_if(p.nbest.begin(), p.nbest.end(), [](const AnswerCandidate& c) { return c.is_null(); });
      if (it != p.nbest.end()) decision = *it;
    }
    p.answer = decision;
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed prediction record: ") + e.what());
  }
}

void write_predictions(const std::string& path, const std::vector<QuestionPrediction>& predictions) {
  std::vector<ordered_json> records;
  records.reserve(predictions.size());
  for (const auto& p : predictions) records.push_back(prediction_to_json(p));
  write_jsonl(path, records);
}

std::vector<QuestionPrediction> read_predictions(const std::string& path) {
  std::vector<QuestionPrediction> out;
  for (const auto& r : read_jsonl(path)) {
    try {
      out.push_back(prediction_from_json(r));
    } catch (const DataError& e) {
      throw DataError(path + ": " + e.what());
    }
  }
  return out;
}

}  // namespace squadlab
