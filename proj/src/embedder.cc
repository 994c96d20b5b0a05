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

#include "squadlab/embedder.h"

#include "squadlab/errors.h"
#include "squadlab/io.h"
#include "squadlab/rng.h"

namespace squadlab {
namespace {

constexpr std::string_view kEmbeddingMagic = "SQEM";
constexpr std::uint32_t kEmbeddingVersion = 1;

// Maps 64 random bits to [-1, 1) using exact arithmetic only.
double unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-52 - 1.0;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

EmbeddingMatrix pseudo_embed(const Feature& feature, std::size_t d_model, std::uint64_t seed) {
  if (d_model == 0) throw Error("pseudo_embed needs d_model > 0");
  EmbeddingMatrix m;
  m.qid = feature.qid;
  m.feature_index = feature.feature_index;
  m.seq_len = feature.tokens.size();
  m.d_model = d_model;
  m.values.resize(m.seq_len * d_model);
  const std::uint64_t seed_key = mix64(seed ^ 0x243f6a8885a308d3ULL);
  for (std::size_t i = 0; i < m.seq_len; ++i) {
    const std::uint64_t token_key = mix64(fnv1a64(feature.tokens[i]) ^ seed_key);
    const std::uint64_t pos_key = mix64(0x13198a2e03707344ULL + i);
    for (std::size_t j = 0; j < d_model; ++j) {
      const double base = unit_interval(mix64(token_key + j));
      const double pos = 0.25 * unit_interval(mix64(pos_key ^ (j * 0x9e3779b97f4a7c15ULL)));
      m.values[i * d_model + j] = base + pos;
    }
  }
  return m;
}

PseudoEmbedder::PseudoEmbedder(std::size_t d_model, std::uint64_t seed) : d_model_(d_model), seed_(seed) {
  if (d_model == 0) throw Error("PseudoEmbedder needs d_model > 0");
}

EmbeddingMatrix PseudoEmbedder::embed(const Feature& feature) const {
  return pseudo_embed(feature, d_model_, seed_);
}

FixtureEmbeddings::FixtureEmbeddings(std::size_t d_model, std::vector<EmbeddingMatrix> matrices)
    : d_model_(d_model) {
  for (auto& m : matrices) {
    if (m.d_model != d_model) {
      throw DataError("embedding for " + m.qid + "#" + std::to_string(m.feature_index) + " has d_model " +
                      std::to_string(m.d_model) + ", expected " + std::to_string(d_model));
    }
    if (m.values.size() != m.seq_len * m.d_model) {
      throw DataError("embedding for " + m.qid + "#" + std::to_string(m.feature_index) + " has the wrong size");
    }
    auto key = std::make_pair(m.qid, m.feature_index);
    if (!matrices_.emplace(key, std::move(m)).second) {
      throw DataError("duplicate embedding key " + key.first + "#" + std::to_string(key.second));
    }
  }
}

const EmbeddingMatrix& FixtureEmbeddings::lookup(const std::string& qid, std::size_t feature_index) const {
  auto it = matrices_.find({qid, feature_index});
  if (it == matrices_.end()) {
    throw DataError("no embedding for key (" + qid + ", " + std::to_string(feature_index) + ")");
  }
  return it->second;
}

EmbeddingMatrix FixtureEmbeddings::embed(const Feature& feature) const {
  const EmbeddingMatrix& m = lookup(feature.qid, feature.feature_index);
  if (m.seq_len != feature.tokens.size()) {
    throw DataError("embedding for (" + feature.qid + ", " + std::to_string(feature.feature_index) + ") has " +
                    std::to_string(m.seq_len) + " rows but the feature has " +
                    std::to_string(feature.tokens.size()) + " tokens");
  }
  return m;
}

void save_embeddings(const std::string& path, std::span<const EmbeddingMatrix> matrices) {
  BinaryWriter w;
  w.bytes(kEmbeddingMagic);
  w.u32(kEmbeddingVersion);
  const std::size_t d_model = matrices.empty() ? 0 : matrices.front().d_model;
  w.u32(static_cast<std::uint32_t>(d_model));
  w.u64(matrices.size());
  for (const EmbeddingMatrix& m : matrices) {
    if (m.d_model != d_model) throw DataError("embeddings with mixed d_model cannot share a file");
    w.u32(static_cast<std::uint32_t>(m.qid.size()));
    w.bytes(m.qid);
    w.u32(static_cast<std::uint32_t>(m.feature_index));
    w.u32(static_cast<std::uint32_t>(m.seq_len));
    for (double v : m.values) w.f64(v);
  }
  write_file(path, w.buffer());
}

FixtureEmbeddings load_embeddings(const std::string& path, std::optional<std::size_t> expected_d_model) {
  BinaryReader r(read_file(path), path);
  if (r.bytes(4) != kEmbeddingMagic) throw DataError(path + ": not an embedding fixture");
  if (r.u32() != kEmbeddingVersion) throw DataError(path + ": unsupported embedding fixture version");
  const std::size_t d_model = r.u32();
  if (expected_d_model && *expected_d_model != d_model) {
    throw DataError(path + ": d_model " + std::to_string(d_model) + " does not match expected " +
                    std::to_string(*expected_d_model));
  }
  const std::uint64_t count = r.u64();
  std::vector<EmbeddingMatrix> matrices;
  for (std::uint64_t k = 0; k < count; ++k) {
    EmbeddingMatrix m;
    m.qid = r.bytes(r.u32());
    m.feature_index = r.u32();
    m.seq_len = r.u32();
    m.d_model = d_model;
    m.values.resize(m.seq_len * d_model);
    for (double& v : m.values) v = r.f64();
    matrices.push_back(std::move(m));
  }
  if (!r.done()) throw DataError(path + ": trailing bytes after " + std::to_string(count) + " records");
  return FixtureEmbeddings(d_model, std::move(matrices));
}

CharEmbeddingTable::CharEmbeddingTable(std::size_t d_char, std::optional<std::uint64_t> pseudo_seed)
    : d_char_(d_char), pseudo_seed_(pseudo_seed), fallback_(d_char, 0.0) {}

void CharEmbeddingTable::set(std::string codepoint, std::vector<double> row) {
  if (row.size() != d_char_) throw ShapeError("char embedding row has the wrong width");
  rows_[std::move(codepoint)] = std::move(row);
}

std::vector<double> CharEmbeddingTable::row(std::string_view codepoint) const {
  if (auto it = rows_.find(std::string(codepoint)); it != rows_.end()) return it->second;
  if (!pseudo_seed_) return fallback_;
  std::vector<double> out(d_char_);
  const std::uint64_t key = mix64(fnv1a64(codepoint) ^ mix64(*pseudo_seed_ + 0xa4093822299f31d0ULL));
  for (std::size_t j = 0; j < d_char_; ++j) out[j] = unit_interval(mix64(key + j));
  return out;
}

}  // namespace squadlab
