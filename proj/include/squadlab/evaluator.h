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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "squadlab/heads.h"
#include "squadlab/squad_data.h"

namespace squadlab {

// Lowercase, drop ASCII punctuation and the articles a/an/the, collapse
// whitespace.
std::string normalize_answer(std::string_view text);
std::vector<std::string> answer_tokens(std::string_view text);

// Max over golds. An empty gold list stands for "no answer", which only the
// empty prediction matches.
int compute_em(std::string_view prediction, std::span<const std::string> golds);
double compute_f1(std::string_view prediction, std::span<const std::string> golds);

struct QuestionScore {
  double em = 0.0;
  double f1 = 0.0;
  std::string prediction;
  std::string best_gold;  // the gold answer giving the highest F1
};

struct EvalReport {
  double em = 0.0;  // percentage
  double f1 = 0.0;  // percentage
  std::size_t total = 0;
  std::size_t answerable = 0;
  std::size_t unanswerable = 0;
  std::map<std::string, QuestionScore> per_question;
};

// predictions maps qid to predicted text; every gold qid must be present.
EvalReport evaluate(const std::map<std::string, std::string>& predictions, const std::vector<RawExample>& gold);
// Rejects duplicate qids in the prediction list.
EvalReport evaluate(std::span<const QuestionPrediction> predictions, const std::vector<RawExample>& gold);

nlohmann::ordered_json eval_report_to_json(const EvalReport& report);
std::string eval_summary_table(const EvalReport& report);

}  // namespace squadlab
