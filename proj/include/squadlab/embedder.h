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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "squadlab/squad_data.h"
#include "squadlab/tensor.h"

namespace squadlab {

struct EmbeddingMatrix {
  std::string qid;
  std::size_t feature_index = 0;
  std::size_t seq_len = 0;
  std::size_t d_model = 0;
  std::vector<double> values;  // seq_len x d_model, row-major

  // Constant tensor: embeddings are inputs and receive no gradient.
  Tensor tensor() const { return Tensor({seq_len, d_model}, values); }
};

// Source of contextual token embeddings for features.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t d_model() const = 0;
  virtual EmbeddingMatrix embed(const Feature& feature) const = 0;
};

// Deterministic function of (token, position, seed) built from integer
// hashing only: a per-token base vector in [-1, 1) plus a fixed per-position
// vector in [-0.25, 0.25).
EmbeddingMatrix pseudo_embed(const Feature& feature, std::size_t d_model, std::uint64_t seed);

class PseudoEmbedder final : public EmbeddingProvider {
 public:
  PseudoEmbedder(std::size_t d_model, std::uint64_t seed);
  std::size_t d_model() const override { return d_model_; }
  EmbeddingMatrix embed(const Feature& feature) const override;

 private:
  std::size_t d_model_;
  std::uint64_t seed_;
};

// Embeddings read from a fixture file, keyed by (qid, feature_index).
class FixtureEmbeddings final : public EmbeddingProvider {
 public:
  FixtureEmbeddings(std::size_t d_model, std::vector<EmbeddingMatrix> matrices);

  std::size_t d_model() const override { return d_model_; }
  std::size_t size() const { return matrices_.size(); }
  const EmbeddingMatrix& lookup(const std::string& qid, std::size_t feature_index) const;
  EmbeddingMatrix embed(const Feature& feature) const override;

 private:
  std::size_t d_model_;
  std::map<std::pair<std::string, std::size_t>, EmbeddingMatrix> matrices_;
};

// Binary layout, little-endian: "SQEM", u32 version, u32 d_model, u64 count;
// then per record u32 qid length, qid bytes, u32 feature_index, u32 seq_len,
// seq_len*d_model f64.
void save_embeddings(const std::string& path, std::span<const EmbeddingMatrix> matrices);
FixtureEmbeddings load_embeddings(const std::string& path,
                                  std::optional<std::size_t> expected_d_model = std::nullopt);

// Character vectors for the char-CNN branch. Characters without an explicit
// row get a hashed pseudo row when a seed is set, else the fallback row.
class CharEmbeddingTable {
 public:
  CharEmbeddingTable() = default;
  CharEmbeddingTable(std::size_t d_char, std::optional<std::uint64_t> pseudo_seed);

  std::size_t d_char() const { return d_char_; }
  void set(std::string codepoint, std::vector<double> row);
  std::vector<double> row(std::string_view codepoint) const;

 private:
  std::size_t d_char_ = 0;
  std::optional<std::uint64_t> pseudo_seed_;
  std::unordered_map<std::string, std::vector<double>> rows_;
  std::vector<double> fallback_;
};

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace squadlab
