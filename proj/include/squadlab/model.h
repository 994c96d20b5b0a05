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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "squadlab/heads.h"
#include "squadlab/layers.h"

namespace squadlab {

enum class Architecture {
  kSquadOut,
  kHighwaySquadOut,
  kBilstmAttnBilstmBidaf,
  kGruHighwayGruBidaf,
  kGruAttnSelfattnGruBidaf,
};

std::string_view architecture_tag(Architecture arch);
Architecture parse_architecture(std::string_view tag);
const std::vector<Architecture>& all_architectures();
bool uses_bidaf_head(Architecture arch);

struct ModelConfig {
  Architecture architecture = Architecture::kSquadOut;
  std::size_t d_model = 64;
  std::size_t hidden = 32;
  std::size_t highway_layers = 1;  // highway_squad_out only
  bool use_char_embedding = false;
  std::size_t d_char = 16;
  std::size_t d_char_out = 16;
  std::uint64_t char_seed = 0x5eedc4a2ULL;
  double dropout_rate = 0.1;

  // Throws Error on inconsistent widths or flags.
  void validate() const;
  // Tag-appropriate defaults (char embedding on for the BiDAF stacks).
  static ModelConfig for_architecture(Architecture arch);
};

nlohmann::ordered_json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::ordered_json& j);

class QaModel {
 public:
  static QaModel build(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }
  void set_dropout_rate(double rate);

  // With a dropout generator the pass is in training mode; without one,
  // dropout is the identity.
  SpanLogits forward(const Feature& feature, const EmbeddingMatrix& embeddings, Rng* dropout_rng = nullptr) const;

 private:
  QaModel() = default;

  ModelConfig config_;
  std::uint64_t seed_ = 0;
  ParameterStore store_;
  CharEmbeddingTable chars_;
  std::optional<EmbeddingCombiner> combiner_;
  std::vector<HighwayLayer> highways_;
  std::optional<BiLstm> lstm_encoder_, lstm_decoder_;
  std::optional<GruLayer> gru_encoder_, gru_decoder_;
  std::optional<SquadOutHead> squad_head_;
  std::optional<BidafOutHead> bidaf_head_;
};

}  // namespace squadlab
