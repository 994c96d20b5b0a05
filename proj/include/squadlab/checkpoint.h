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

#include "json.hpp"
#include "squadlab/optim.h"

namespace squadlab {

// Parameter snapshot plus the seed and configuration that produced it.
// Stored as JSON; fp64 values round-trip bit-exactly.
struct Checkpoint {
  std::uint64_t seed = 0;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<std::pair<std::string, Tensor>> parameters;
};

Checkpoint snapshot(const ParameterStore& store, std::uint64_t seed, nlohmann::ordered_json config);

// Copies checkpoint values into a store with matching names and shapes.
void restore(const Checkpoint& checkpoint, ParameterStore& store);

nlohmann::ordered_json checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::ordered_json& j);

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace squadlab
