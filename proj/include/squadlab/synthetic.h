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

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "squadlab/squad_data.h"

namespace squadlab {

struct SyntheticOptions {
  std::size_t examples = 50;
  double unanswerable_fraction = 0.2;
  std::size_t min_context_words = 8;
  std::size_t max_context_words = 14;
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  std::vector<RawExample> examples;
  std::unordered_set<std::string> vocab;
};

// Small-vocabulary corpus: filler sentences with at most one answer word
// planted per context. Answer words come from a disjoint word list and
// some of them split into two vocabulary pieces.
SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& options);

}  // namespace squadlab
