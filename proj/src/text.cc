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

#include "squadlab/text.h"

#include "squadlab/errors.h"

namespace squadlab {

std::vector<std::size_t> codepoint_offsets(std::string_view text) {
  std::vector<std::size_t> offsets;
  offsets.reserve(text.size() + 1);
  std::size_t i = 0;
  while (i < text.size()) {
    offsets.push_back(i);
    const unsigned char c = static_cast<unsigned char>(text[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > text.size()) {
      throw DataError("invalid UTF-8 at byte " + std::to_string(i));
    }
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        throw DataError("invalid UTF-8 continuation at byte " + std::to_string(i + k));
      }
    }
    i += len;
  }
  offsets.push_back(text.size());
  return offsets;
}

std::size_t codepoint_count(std::string_view text) { return codepoint_offsets(text).size() - 1; }

std::vector<std::string> split_codepoints(std::string_view text) {
  const auto offsets = codepoint_offsets(text);
  std::vector<std::string> out;
  out.reserve(offsets.size() - 1);
  for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
    out.emplace_back(text.substr(offsets[i], offsets[i + 1] - offsets[i]));
  }
  return out;
}

std::string substr_codepoints(std::string_view text, std::size_t begin, std::size_t end) {
  const auto offsets = codepoint_offsets(text);
  const std::size_t n = offsets.size() - 1;
  if (begin > end || end > n) {
    throw DataError("character range [" + std::to_string(begin) + ", " + std::to_string(end) +
                    ") outside text of length " + std::to_string(n));
  }
  return std::string(text.substr(offsets[begin], offsets[end] - offsets[begin]));
}

bool is_ascii_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace squadlab
