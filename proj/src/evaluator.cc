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

#include "squadlab/evaluator.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <unordered_map>

namespace squadlab {

using nlohmann::ordered_json;

namespace {

bool is_article(std::string_view w) { return w == "a" || w == "an" || w == "the"; }

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double f1_single(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() || gold.empty()) return pred.empty() && gold.empty() ? 1.0 : 0.0;
  std::unordered_map<std::string, long> counts;
  for (const auto& t : gold) ++counts[t];
  long common = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<std::string> gold_texts(const RawExample& ex) {
  std::vector<std::string> out;
  for (const auto& a : ex.answers) out.push_back(a.text);
  return out;
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string lowered;
  lowered.reserve(text.size());
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::ispunct(u)) continue;
    lowered += u < 0x80 ? static_cast<char>(std::tolower(u)) : c;
  }
  std::string out;
  for (const std::string& w : split_ws(lowered)) {
    if (is_article(w)) continue;
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::vector<std::string> answer_tokens(std::string_view text) { return split_ws(normalize_answer(text)); }

int compute_em(std::string_view prediction, std::span<const std::string> golds) {
  const std::string pred = normalize_answer(prediction);
  if (golds.empty()) return pred.empty() ? 1 : 0;
  for (const auto& g : golds) {
    if (normalize_answer(g) == pred) return 1;
  }
  return 0;
}

double compute_f1(std::string_view prediction, std::span<const std::string> golds) {
  const std::vector<std::string> pred = answer_tokens(prediction);
  if (golds.empty()) return pred.empty() ? 1.0 : 0.0;
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, f1_single(pred, answer_tokens(g)));
  return best;
}

EvalReport evaluate(const std::map<std::string, std::string>& predictions, const std::vector<RawExample>& gold) {
  std::set<std::string> seen;
  std::vector<std::string> missing;
  for (const auto& ex : gold) {
    if (!seen.insert(ex.qid).second) throw DataError("gold dataset repeats question " + ex.qid);
    if (!predictions.count(ex.qid)) missing.push_back(ex.qid);
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > 20) list += ", ...";
    throw DataError(std::to_string(missing.size()) + " question(s) have no prediction: " + list);
  }
  EvalReport report;
  double em_sum = 0.0;
  double f1_sum = 0.0;
  for (const auto& ex : gold) {
    const std::vector<std::string> golds = gold_texts(ex);
    QuestionScore s;
    s.prediction = predictions.at(ex.qid);
    s.em = compute_em(s.prediction, golds);
    s.f1 = compute_f1(s.prediction, golds);
    double best = -1.0;
    const std::vector<std::string> pred_tokens = answer_tokens(s.prediction);
    for (const auto& g : golds) {
      const double f = f1_single(pred_tokens, answer_tokens(g));
      if (f > best) {
        best = f;
        s.best_gold = g;
      }
    }
    em_sum += s.em;
    f1_sum += s.f1;
    (golds.empty() ? report.unanswerable : report.answerable) += 1;
    report.per_question.emplace(ex.qid, std::move(s));
  }
  report.total = gold.size();
  if (report.total > 0) {
    report.em = 100.0 * em_sum / static_cast<double>(report.total);
    report.f1 = 100.0 * f1_sum / static_cast<double>(report.total);
  }
  return report;
}

EvalReport evaluate(std::span<const QuestionPrediction> predictions, const std::vector<RawExample>& gold) {
  std::map<std::string, std::string> by_qid;
  for (const auto& p : predictions) {
    if (!by_qid.emplace(p.qid, p.answer.text).second) {
      throw DataError("prediction file repeats question " + p.qid);
    }
  }
  return evaluate(by_qid, gold);
}

ordered_json eval_report_to_json(const EvalReport& report) {
  ordered_json j;
  j["em"] = report.em;
  j["f1"] = report.f1;
  j["total"] = report.total;
  j["answerable"] = report.answerable;
  j["unanswerable"] = report.unanswerable;
  ordered_json per = ordered_json::object();
  for (const auto& [qid, s] : report.per_question) {
    per[qid] = {{"em", s.em}, {"f1", s.f1}, {"prediction", s.prediction}, {"best_gold", s.best_gold}};
  }
  j["per_question"] = std::move(per);
  return j;
}

std::string eval_summary_table(const EvalReport& report) {
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-14s %10s\n", "metric", "value");
  out += buf;
  std::snprintf(buf, sizeof buf, "%-14s %10.2f\n%-14s %10.2f\n", "EM", report.em, "F1", report.f1);
  out += buf;
  std::snprintf(buf, sizeof buf, "%-14s %10zu\n%-14s %10zu\n%-14s %10zu\n", "questions", report.total, "answerable",
                report.answerable, "unanswerable", report.unanswerable);
  out += buf;
  return out;
}

}  // namespace squadlab
