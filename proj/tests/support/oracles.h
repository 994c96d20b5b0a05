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

// Reference implementations written independently of the library code:
// exhaustive enumeration, explicit tallies and direct formula evaluation.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace squadlab::oracle {

struct Span {
  std::optional<std::size_t> start, end;  // nullopt = no answer
  double score = 0.0;
  std::size_t feature = 0;
};

// Every legal (s, e) of one feature plus the null candidate, fully sorted,
// then cut to the top n_best - 1 spans and the null candidate.
inline std::vector<Span> decode(const std::vector<double>& start, const std::vector<double>& end,
                                const std::vector<bool>& context, std::size_t n_best, std::size_t max_len,
                                std::size_t feature = 0) {
  std::vector<Span> spans;
  for (std::size_t s = 0; s < start.size(); ++s) {
    for (std::size_t e = 0; e < end.size(); ++e) {
      if (s <= e && e - s < max_len && context[s] && context[e]) {
        spans.push_back({s, e, start[s] + end[e], feature});
      }
    }
  }
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
    return std::make_tuple(-a.score, *a.start, *a.end) < std::make_tuple(-b.score, *b.start, *b.end);
  });
  if (spans.size() > n_best - 1) spans.resize(n_best - 1);
  Span null{std::nullopt, std::nullopt, start[0] + end[0], feature};
  auto pos = std::find_if(spans.begin(), spans.end(), [&](const Span& s) { return s.score < null.score; });
  spans.insert(pos, null);
  return spans;
}

// Official-style normalization via regular expressions (ASCII input).
inline std::string normalize(const std::string& text) {
  std::string s;
  for (char c : text) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::string no_punct;
  for (char c : s) {
    if (!std::ispunct(static_cast<unsigned char>(c))) no_punct += c;
  }
  static const std::regex articles("\\b(a|an|the)\\b");
  const std::string no_articles = std::regex_replace(no_punct, articles, " ");
  std::string out;
  std::string word;
  for (char c : no_articles + " ") {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!word.empty()) out += (out.empty() ? "" : " ") + word;
      word.clear();
    } else {
      word += c;
    }
  }
  return out;
}

inline std::vector<std::string> words(const std::string& normalized) {
  std::vector<std::string> out;
  std::string w;
  for (char c : normalized + " ") {
    if (c == ' ') {
      if (!w.empty()) out.push_back(w);
      w.clear();
    } else {
      w += c;
    }
  }
  return out;
}

// Multiset overlap through explicit per-word counts of both sides.
inline double f1(const std::string& pred, const std::vector<std::string>& golds) {
  const auto p = words(normalize(pred));
  if (golds.empty()) return p.empty() ? 1.0 : 0.0;
  double best = 0.0;
  for (const auto& g : golds) {
    const auto t = words(normalize(g));
    double score;
    if (p.empty() || t.empty()) {
      score = p.empty() && t.empty() ? 1.0 : 0.0;
    } else {
      std::map<std::string, int> cp, ct;
      for (const auto& w : p) ++cp[w];
      for (const auto& w : t) ++ct[w];
      int common = 0;
      for (const auto& [w, n] : cp) {
        auto it = ct.find(w);
        if (it != ct.end()) common += std::min(n, it->second);
      }
      if (common == 0) {
        score = 0.0;
      } else {
        const double precision = static_cast<double>(common) / static_cast<double>(p.size());
        const double recall = static_cast<double>(common) / static_cast<double>(t.size());
        score = 2.0 * precision * recall / (precision + recall);
      }
    }
    best = std::max(best, score);
  }
  return best;
}

inline int em(const std::string& pred, const std::vector<std::string>& golds) {
  if (golds.empty()) return normalize(pred).empty() ? 1 : 0;
  for (const auto& g : golds) {
    if (normalize(g) == normalize(pred)) return 1;
  }
  return 0;
}

// Vote of one model for one question.
struct Ballot {
  bool null = true;
  std::size_t feature = 0, start = 0, end = 0;
  double weight = 0.0;
};

struct Winner {
  bool null = true;
  std::size_t feature = 0, start = 0, end = 0;
  double total = 0.0;
};

// Tallies every distinct key, then scans for the best by the tie-break
// chain: total, max single weight, span over null... as a sort key.
inline Winner tally(const std::vector<Ballot>& ballots) {
  std::map<std::tuple<bool, std::size_t, std::size_t, std::size_t>, std::vector<double>> votes;
  for (const auto& b : ballots) {
    votes[{b.null, b.null ? 0 : b.feature, b.null ? 0 : b.start, b.null ? 0 : b.end}].push_back(b.weight);
  }
  std::optional<std::tuple<double, double, int, std::size_t, std::size_t, std::size_t>> best_key;
  Winner best;
  for (const auto& [key, weights] : votes) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double max_w = *std::max_element(weights.begin(), weights.end());
    const auto& [null, feature, start, end] = key;
    const auto sort_key = std::make_tuple(-total, -max_w, null ? 1 : 0, start, end, feature);
    if (!best_key || sort_key < *best_key) {
      best_key = sort_key;
      best = {null, feature, start, end, total};
    }
  }
  return best;
}

}  // namespace squadlab::oracle
