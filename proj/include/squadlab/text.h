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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace squadlab {

// Byte offset of every code point in `text`, followed by text.size().
// Character offsets throughout the toolkit count code points, matching
// the SQuAD answer_start convention.
std::vector<std::size_t> codepoint_offsets(std::string_view text);

std::size_t codepoint_count(std::string_view text);

// Each code point of `text` as its own UTF-8 string.
std::vector<std::string> split_codepoints(std::string_view text);

// Substring by code-point range [begin, end).
std::string substr_codepoints(std::string_view text, std::size_t begin, std::size_t end);

bool is_ascii_space(char32_t c);

}  // namespace squadlab
