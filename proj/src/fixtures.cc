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

#include "squadlab/fixtures.h"

namespace squadlab {

std::unordered_set<std::string> obama_vocab() {
  return {"O", "ba", "ma", "was", "born", "in", "Au", "gust."};
}

GoldenFixture obama_fixture() {
  GoldenFixture f;
  f.example.qid = "obama";
  f.example.question = "In which month was Obama born?";
  f.example.context = "Obama was born in August.";
  f.example.answers = {{"August", 18}};
  const auto vocab = obama_vocab();
  f.context = toy_tokenize(f.example.context, vocab);
  f.question_tokens = toy_tokenize(f.example.question, vocab).tokens;
  f.config = {64, 32};
  return f;
}

GoldenFixture jay_fixture() {
  GoldenFixture f;
  f.example.qid = "jay";
  f.example.question = "How old is Jay?";
  f.example.context = "jay is 12 years old. he lives in flomo.";
  f.example.answers = {{"12", 7}};
  f.context.tokens = {"▁jay", "▁is", "▁12", "▁years", "▁old", ".",
                      "▁he",  "▁lives", "▁in", "▁flo", "mo", "."};
  f.context.spans = {{0, 3},   {4, 6},   {7, 9},   {10, 15}, {16, 19}, {16, 19},
                     {21, 23}, {24, 29}, {30, 32}, {33, 38}, {33, 38}, {33, 38}};
  f.question_tokens = {"▁how", "▁old", "▁is", "▁jay", "?"};
  // Five question tokens, three separators and five context tokens.
  f.config = {13, 5};
  return f;
}

std::vector<RawExample> einstein_corpus() {
  const std::string context = "The theory of relativity was developed by Albert Einstein.";
  RawExample a{"einstein-0", "Who developed the theory of relativity?", context, {{"Albert Einstein", 42}}, false};
  RawExample b{"einstein-1", "Who developed relativity?", context, {{"Albert Einstein", 42}}, false};
  return {a, b};
}

std::map<std::string, std::string> einstein_predictions() {
  return {{"einstein-0", "Einstein"}, {"einstein-1", "Albert Einstein"}};
}

}  // namespace squadlab
