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

#include "squadlab/ensembler.h"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "squadlab/io.h"

namespace squadlab {
namespace {

constexpr std::string_view kLogitsMagic = "SQLG";
constexpr std::uint32_t kLogitsVersion = 1;

std::string key_name(const std::string& qid, std::size_t feature_index) {
  return qid + "#" + std::to_string(feature_index);
}

void check_weight(double w, const std::string& who) {
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw DataError(who + ": vote weight must be a positive finite number, got " + std::to_string(w));
  }
}

struct VoteKey {
  bool null = true;
  std::size_t feature_index = 0;
  std::size_t start = 0;
  std::size_t end = 0;

  auto tie() const { return std::make_tuple(null, feature_index, start, end); }
  bool operator<(const VoteKey& o) const { return tie() < o.tie(); }
};

struct Tally {
  VoteKey key;
  std::vector<double> weights;
  AnswerCandidate candidate;
  double total = 0.0;
  double max_weight = 0.0;
};

// Ranking of tallies: the documented tie-break chain.
bool tally_before(const Tally& a, const Tally& b) {
  if (a.total != b.total) return a.total > b.total;
  if (a.max_weight != b.max_weight) return a.max_weight > b.max_weight;
  if (a.key.null != b.key.null) return !a.key.null;
  if (a.key.start != b.key.start) return a.key.start < b.key.start;
  if (a.key.end != b.key.end) return a.key.end < b.key.end;
  return a.key.feature_index < b.key.feature_index;
}

}  // namespace

PredictionSet make_prediction_set(std::string model_id, std::vector<QuestionPrediction> predictions,
                                  std::optional<double> weight) {
  PredictionSet set;
  set.model_id = std::move(model_id);
  if (weight) {
    set.model_f1_weight = *weight;
  } else {
    std::optional<double> found;
    for (const auto& p : predictions) {
      if (!p.model_f1_weight) throw DataError(set.model_id + ": record " + p.qid + " has no model_f1_weight");
      if (found && *found != *p.model_f1_weight) {
        throw DataError(set.model_id + ": model_f1_weight differs between records");
      }
      found = p.model_f1_weight;
    }
    if (!found) throw DataError(set.model_id + ": empty prediction set has no weight");
    set.model_f1_weight = *found;
  }
  check_weight(set.model_f1_weight, set.model_id);
  set.predictions = std::move(predictions);
  return set;
}

PredictionSet load_prediction_set(const std::string& path, std::optional<double> weight) {
  return make_prediction_set(path, read_predictions(path), weight);
}

void save_logits(const std::string& path, std::span<const FeatureLogits> logits) {
  BinaryWriter w;
  w.bytes(kLogitsMagic);
  w.u32(kLogitsVersion);
  w.u64(logits.size());
  for (const FeatureLogits& l : logits) {
    if (l.start.size() != l.end.size()) throw ShapeError("start and end logits differ in length for " +
                                                         key_name(l.qid, l.feature_index));
    w.u32(static_cast<std::uint32_t>(l.qid.size()));
    w.bytes(l.qid);
    w.u32(static_cast<std::uint32_t>(l.feature_index));
    w.u32(static_cast<std::uint32_t>(l.start.size()));
    for (double v : l.start) w.f64(v);
    for (double v : l.end) w.f64(v);
  }
  write_file(path, w.buffer());
}

LogitsDump load_logits(const std::string& path) {
  BinaryReader r(read_file(path), path);
  if (r.bytes(4) != kLogitsMagic) throw DataError(path + ": not a logits dump");
  if (r.u32() != kLogitsVersion) throw DataError(path + ": unsupported logits dump version");
  const std::uint64_t count = r.u64();
  LogitsDump dump;
  for (std::uint64_t k = 0; k < count; ++k) {
    FeatureLogits l;
    l.qid = r.bytes(r.u32());
    l.feature_index = r.u32();
    const std::size_t n = r.u32();
    l.start.resize(n);
    l.end.resize(n);
    for (double& v : l.start) v = r.f64();
    for (double& v : l.end) v = r.f64();
    dump.entries.push_back(std::move(l));
  }
  if (!r.done()) throw DataError(path + ": trailing bytes after " + std::to_string(count) + " records");
  return dump;
}

std::vector<FeatureLogits> mean_logits(std::span<const LogitsDump> dumps) {
  if (dumps.size() < 2) throw DataError("mean logits needs at least two dumps");
  std::vector<FeatureLogits> out = dumps[0].entries;
  for (std::size_t m = 1; m < dumps.size(); ++m) {
    const auto& entries = dumps[m].entries;
    if (entries.size() != out.size()) {
      throw DataError("dump " + std::to_string(m) + " has " + std::to_string(entries.size()) + " features, dump 0 has " +
                      std::to_string(out.size()));
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
      const FeatureLogits& acc = out[k];
      const FeatureLogits& next = entries[k];
      if (next.qid != acc.qid || next.feature_index != acc.feature_index) {
        throw DataError("dump " + std::to_string(m) + " record " + std::to_string(k) + " is " +
                        key_name(next.qid, next.feature_index) + ", expected " +
                        key_name(acc.qid, acc.feature_index));
      }
      if (next.start.size() != acc.start.size() || next.end.size() != acc.end.size()) {
        throw DataError("sequence length mismatch at " + key_name(acc.qid, acc.feature_index) + " in dump " +
                        std::to_string(m));
      }
    }
  }
  // Summing each position in sorted order makes the result independent of
  // the order of the dumps.
  std::vector<double> column(dumps.size());
  auto sorted_sum = [&](std::size_t k, std::size_t i, bool start) {
    for (std::size_t m = 0; m < dumps.size(); ++m) {
      column[m] = start ? dumps[m].entries[k].start[i] : dumps[m].entries[k].end[i];
    }
    std::sort(column.begin(), column.end());
    double total = 0.0;
    for (double v : column) total += v;
    return total;
  };
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (std::size_t i = 0; i < out[k].start.size(); ++i) out[k].start[i] = sorted_sum(k, i, true);
    for (std::size_t i = 0; i < out[k].end.size(); ++i) out[k].end[i] = sorted_sum(k, i, false);
  }
  return out;
}

std::vector<QuestionPrediction> weighted_voting(std::span<const PredictionSet> sets) {
  if (sets.empty()) throw DataError("weighted voting needs at least one prediction set");
  std::map<std::string, std::map<VoteKey, Tally>> tallies;
  for (const PredictionSet& set : sets) {
    check_weight(set.model_f1_weight, set.model_id);
    std::map<std::string, bool> seen;
    for (const QuestionPrediction& p : set.predictions) {
      if (!seen.emplace(p.qid, true).second) throw DataError(set.model_id + " repeats question " + p.qid);
      VoteKey key;
      if (!p.answer.is_null()) {
        key.null = false;
        key.feature_index = p.answer.feature_index;
        key.start = *p.answer.start_token;
        key.end = *p.answer.end_token;
      }
      Tally& t = tallies[p.qid][key];
      if (t.weights.empty()) {
        t.key = key;
        t.candidate = p.answer;
        t.candidate.qid = p.qid;
        if (key.null) t.candidate.text.clear();
      }
      t.weights.push_back(set.model_f1_weight);
    }
    if (seen.size() != tallies.size()) {
      throw DataError(set.model_id + " covers " + std::to_string(seen.size()) + " questions, expected " +
                      std::to_string(tallies.size()));
    }
  }
  for (const auto& [qid, per_key] : tallies) {
    std::size_t votes = 0;
    for (const auto& [k, t] : per_key) votes += t.weights.size();
    if (votes != sets.size()) throw DataError("question " + qid + " is missing from some prediction sets");
  }

  std::vector<QuestionPrediction> out;
  out.reserve(tallies.size());
  for (auto& [qid, per_key] : tallies) {
    std::vector<Tally> ranked;
    for (auto& [k, t] : per_key) {
      // Summing in sorted order keeps totals independent of input order.
      std::sort(t.weights.begin(), t.weights.end());
      for (double w : t.weights) t.total += w;
      t.max_weight = t.weights.back();
      ranked.push_back(t);
    }
    std::sort(ranked.begin(), ranked.end(), tally_before);
    QuestionPrediction p;
    p.qid = qid;
    p.answer = ranked.front().candidate;
    p.answer.score = ranked.front().total;
    for (const Tally& t : ranked) {
      AnswerCandidate c = t.candidate;
      c.score = t.total;
      if (t.key.null) p.null_score = t.total;
      p.nbest.push_back(std::move(c));
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<QuestionPrediction> weighted_voting_with_mean_logits(
    std::span<const PredictionSet> sets, std::span<const LogitsDump> dumps, double mean_weight,
    std::span<const Feature> features, const std::map<std::string, std::string>& contexts,
    const DecodeOptions& options) {
  if (sets.size() != dumps.size()) {
    throw DataError("got " + std::to_string(sets.size()) + " prediction sets but " + std::to_string(dumps.size()) +
                    " logits dumps");
  }
  check_weight(mean_weight, "mean-logits voter");
  const std::vector<FeatureLogits> summed = mean_logits(dumps);
  std::vector<PredictionSet> voters(sets.begin(), sets.end());
  voters.push_back(make_prediction_set("mean-logits", predictions_from_logits(summed, features, contexts, options),
                                       mean_weight));
  return weighted_voting(voters);
}

}  // namespace squadlab
