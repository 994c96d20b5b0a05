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
#include <vector>

#include "squadlab/heads.h"

namespace squadlab {

// One model's predictions plus the weight its vote carries.
struct PredictionSet {
  std::string model_id;
  double model_f1_weight = 0.0;
  std::vector<QuestionPrediction> predictions;
};

// Weight comes from `weight` when given, else from the records'
// model_f1_weight field, which must then be present and uniform.
PredictionSet make_prediction_set(std::string model_id, std::vector<QuestionPrediction> predictions,
                                  std::optional<double> weight = std::nullopt);
PredictionSet load_prediction_set(const std::string& path, std::optional<double> weight = std::nullopt);

// Per-feature logits of one model, in file order.
struct LogitsDump {
  std::vector<FeatureLogits> entries;
};

// Binary, little-endian: "SQLG", u32 version, u64 count, then per record
// u32 qid length, qid bytes, u32 feature_index, u32 seq_len, seq_len f64
// start logits, seq_len f64 end logits.
void save_logits(const std::string& path, std::span<const FeatureLogits> logits);
LogitsDump load_logits(const std::string& path);

// Elementwise sum over at least two dumps with identical keys and lengths.
std::vector<FeatureLogits> mean_logits(std::span<const LogitsDump> dumps);

// Each set votes its decision for every question with its weight; the
// key is (feature_index, start, end) or null. Highest total wins; ties go
// to the higher single vote, then a span over null, earlier start, earlier
// end, lower feature index. Output is sorted by qid; each result's n-best
// lists the distinct votes with their totals as scores.
std::vector<QuestionPrediction> weighted_voting(std::span<const PredictionSet> sets);

// Adds the mean-logits decision as one more voter with weight mean_weight.
std::vector<QuestionPrediction> weighted_voting_with_mean_logits(
    std::span<const PredictionSet> sets, std::span<const LogitsDump> dumps, double mean_weight,
    std::span<const Feature> features, const std::map<std::string, std::string>& contexts,
    const DecodeOptions& options);

}  // namespace squadlab
