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

#include "squadlab/synthetic.h"

#include <array>
#include <cmath>
#include <string_view>

#include "squadlab/errors.h"
#include "squadlab/rng.h"

namespace squadlab {
namespace {

constexpr std::array<std::string_view, 24> kFiller = {
    "the",   "river", "runs",  "past", "old",   "stone", "walls", "near",
    "a",     "quiet", "town",  "where", "people", "walk", "slowly", "every",
    "day",   "under", "tall",  "trees", "and",  "small", "boats", "drift"};

// Answer words; the ones listed with a split point tokenize into two pieces.
struct AnswerWord {
  std::string_view word;
  std::size_t split;  // 0 = single piece
};
constexpr std::array<AnswerWord, 16> kAnswers = {{{"amber", 0},
                                                  {"harbor", 3},
                                                  {"violet", 0},
                                                  {"cobalt", 2},
                                                  {"falcon", 0},
                                                  {"meadow", 4},
                                                  {"lantern", 0},
                                                  {"orchid", 2},
                                                  {"granite", 0},
                                                  {"willow", 0},
                                                  {"saffron", 3},
                                                  {"thunder", 0},
                                                  {"marble", 0},
                                                  {"juniper", 3},
                                                  {"ember", 0},
                                                  {"quartz", 0}}};

constexpr std::array<std::string_view, 4> kQuestions = {
    "what is the hidden name ?", "which word is special here ?", "what name does the town keep ?",
    "what is the rare word ?"};

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& options) {
  if (options.examples == 0) throw Error("synthetic corpus needs at least one example");
  if (!(options.unanswerable_fraction >= 0.0 && options.unanswerable_fraction <= 1.0)) {
    throw Error("unanswerable_fraction must lie in [0, 1]");
  }
  if (options.min_context_words == 0 || options.min_context_words > options.max_context_words) {
    throw Error("context word range is empty");
  }
  SyntheticCorpus corpus;
  for (auto w : kFiller) corpus.vocab.emplace(w);
  for (const auto& a : kAnswers) {
    if (a.split == 0) {
      corpus.vocab.emplace(a.word);
    } else {
      corpus.vocab.emplace(a.word.substr(0, a.split));
      corpus.vocab.emplace(a.word.substr(a.split));
    }
  }
  for (auto q : kQuestions) {
    std::size_t start = 0;
    while (start < q.size()) {
      std::size_t end = q.find(' ', start);
      if (end == std::string_view::npos) end = q.size();
      corpus.vocab.emplace(q.substr(start, end - start));
      start = end + 1;
    }
  }

  Rng rng(options.seed);
  const auto unanswerable =
      static_cast<std::size_t>(std::llround(options.unanswerable_fraction * static_cast<double>(options.examples)));
  std::vector<bool> impossible(options.examples, false);
  for (std::size_t i = 0; i < unanswerable; ++i) impossible[i] = true;
  rng.shuffle(impossible);

  for (std::size_t i = 0; i < options.examples; ++i) {
    RawExample ex;
    ex.qid = "syn" + std::to_string(i);
    ex.question = std::string(kQuestions[rng.below(kQuestions.size())]);
    const std::size_t words =
        options.min_context_words + rng.below(options.max_context_words - options.min_context_words + 1);
    std::vector<std::string> context;
    for (std::size_t w = 0; w < words; ++w) context.emplace_back(kFiller[rng.below(kFiller.size())]);
    std::size_t answer_word = words;
    if (!impossible[i]) {
      answer_word = rng.below(words);
      context[answer_word] = std::string(kAnswers[rng.below(kAnswers.size())].word);
    }
    std::size_t offset = 0;
    for (std::size_t w = 0; w < words; ++w) {
      if (w > 0) {
        ex.context += ' ';
        ++offset;
      }
      if (w == answer_word) ex.answers.push_back({context[w], offset});
      ex.context += context[w];
      offset += context[w].size();
    }
    ex.context += '.';
    ex.is_impossible = impossible[i];
    corpus.examples.push_back(std::move(ex));
  }
  return corpus;
}

}  // namespace squadlab
