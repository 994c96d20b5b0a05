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
#include <string_view>
#include <vector>

#include "json.hpp"

namespace squadlab {

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// One compact JSON document per line.
std::vector<nlohmann::ordered_json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<nlohmann::ordered_json>& records);

// Little-endian encoding for the binary fixture formats.
class BinaryWriter {
 public:
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void bytes(std::string_view s);
  const std::string& buffer() const { return buffer_; }

 private:
  std::string buffer_;
};

class BinaryReader {
 public:
  BinaryReader(std::string data, std::string source);
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string bytes(std::size_t n);
  bool done() const { return pos_ == data_.size(); }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n);
  std::string data_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace squadlab
