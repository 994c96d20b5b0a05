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

#include <string>
#include <vector>

namespace squadlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Runs one subcommand: preprocess, pseudo-embed, train, predict, evaluate,
// ensemble, selftest or synth. `args` excludes the program name.
int cli_dispatch(const std::vector<std::string>& args);
int cli_dispatch(int argc, char** argv);

std::string toolkit_version();

}  // namespace squadlab
