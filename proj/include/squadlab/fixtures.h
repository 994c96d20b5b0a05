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
#include <string>
#include <unordered_set>
#include <vector>

#include "squadlab/squad_data.h"

namespace squadlab {

// Worked examples with known tokenizations and expected outputs.
struct GoldenFixture {
  RawExample example;
  TokenizedContext context;
  std::vector<std::string> question_tokens;
  PreprocessConfig config;
};

// "Obama was born in August." with Obama split into three pieces.
std::unordered_set<std::string> obama_vocab();
GoldenFixture obama_fixture();

// Long context split into five-token chunks; only the first holds "12".
GoldenFixture jay_fixture();

// Two questions with gold "Albert Einstein"; predictions "Einstein" and
// "Albert Einstein".
std::vector<RawExample> einstein_corpus();
std::map<std::string, std::string> einstein_predictions();

}  // namespace squadlab
