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

#include "squadlab/model.h"

#include <array>

namespace squadlab {

using nlohmann::ordered_json;

namespace {

struct TagEntry {
  Architecture arch;
  std::string_view tag;
};

constexpr std::array<TagEntry, 5> kTags = {{
    {Architecture::kSquadOut, "squad_out"},
    {Architecture::kHighwaySquadOut, "highway_squad_out"},
    {Architecture::kBilstmAttnBilstmBidaf, "bilstm_attn_bilstm_bidaf"},
    {Architecture::kGruHighwayGruBidaf, "gru_highway_gru_bidaf"},
    {Architecture::kGruAttnSelfattnGruBidaf, "gru_attn_selfattn_gru_bidaf"},
}};

}  // namespace

std::string_view architecture_tag(Architecture arch) {
  for (const auto& e : kTags) {
    if (e.arch == arch) return e.tag;
  }
  throw Error("unknown architecture value");
}

Architecture parse_architecture(std::string_view tag) {
  for (const auto& e : kTags) {
    if (e.tag == tag) return e.arch;
  }
  std::string known;
  for (const auto& e : kTags) known += (known.empty() ? "" : ", ") + std::string(e.tag);
  throw Error("unknown architecture '" + std::string(tag) + "' (expected one of " + known + ")");
}

const std::vector<Architecture>& all_architectures() {
  static const std::vector<Architecture> all = [] {
    std::vector<Architecture> v;
    for (const auto& e : kTags) v.push_back(e.arch);
    return v;
  }();
  return all;
}

bool uses_bidaf_head(Architecture arch) {
  return arch != Architecture::kSquadOut && arch != Architecture::kHighwaySquadOut;
}

void ModelConfig::validate() const {
  if (d_model == 0) throw Error("d_model must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw Error("dropout_rate must lie in [0, 1)");
  if (uses_bidaf_head(architecture)) {
    if (hidden == 0) throw Error("hidden must be positive for " + std::string(architecture_tag(architecture)));
    if (!use_char_embedding) {
      throw Error(std::string(architecture_tag(architecture)) + " requires the char embedding branch");
    }
    if (d_char == 0 || d_char_out == 0) throw Error("char embedding widths must be positive");
  } else if (use_char_embedding) {
    throw Error(std::string(architecture_tag(architecture)) + " has no char embedding branch");
  }
  if (architecture == Architecture::kHighwaySquadOut && highway_layers == 0) {
    throw Error("highway_squad_out needs at least one highway layer");
  }
}

ModelConfig ModelConfig::for_architecture(Architecture arch) {
  ModelConfig cfg;
  cfg.architecture = arch;
  cfg.use_char_embedding = uses_bidaf_head(arch);
  return cfg;
}

ordered_json model_config_to_json(const ModelConfig& cfg) {
  ordered_json j;
  j["architecture"] = architecture_tag(cfg.architecture);
  j["d_model"] = cfg.d_model;
  j["hidden"] = cfg.hidden;
  j["highway_layers"] = cfg.highway_layers;
  j["use_char_embedding"] = cfg.use_char_embedding;
  j["d_char"] = cfg.d_char;
  j["d_char_out"] = cfg.d_char_out;
  j["char_seed"] = cfg.char_seed;
  j["dropout_rate"] = cfg.dropout_rate;
  return j;
}

ModelConfig model_config_from_json(const ordered_json& j) {
  try {
    ModelConfig cfg;
    cfg.architecture = parse_architecture(j.at("architecture").get<std::string>());
    cfg.d_model = j.at("d_model").get<std::size_t>();
    cfg.hidden = j.at("hidden").get<std::size_t>();
    cfg.highway_layers = j.at("highway_layers").get<std::size_t>();
    cfg.use_char_embedding = j.at("use_char_embedding").get<bool>();
    cfg.d_char = j.at("d_char").get<std::size_t>();
    cfg.d_char_out = j.at("d_char_out").get<std::size_t>();
    cfg.char_seed = j.at("char_seed").get<std::uint64_t>();
    cfg.dropout_rate = j.at("dropout_rate").get<double>();
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model config: ") + e.what());
  }
}

QaModel QaModel::build(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  QaModel m;
  m.config_ = cfg;
  m.seed_ = seed;
  Rng rng(seed);
  const std::size_t d = cfg.d_model;
  const std::size_t h = cfg.hidden;
  switch (cfg.architecture) {
    case Architecture::kSquadOut:
      m.squad_head_ = SquadOutHead::create(m.store_, "head", d, rng);
      break;
    case Architecture::kHighwaySquadOut:
      for (std::size_t i = 0; i < cfg.highway_layers; ++i) {
        m.highways_.push_back(HighwayLayer::create(m.store_, "highway." + std::to_string(i), d, rng));
      }
      m.squad_head_ = SquadOutHead::create(m.store_, "head", d, rng);
      break;
    case Architecture::kBilstmAttnBilstmBidaf: {
      m.combiner_ = EmbeddingCombiner::create(m.store_, "embedding", d, cfg.d_char, cfg.d_char_out, rng);
      m.lstm_encoder_ = BiLstm::create(m.store_, "encoder", m.combiner_->output_width(), h, rng);
      m.lstm_decoder_ = BiLstm::create(m.store_, "decoder", 2 * h, h, rng);
      m.bidaf_head_ = BidafOutHead::create(m.store_, "head", 2 * h, 2 * h, rng);
      break;
    }
    case Architecture::kGruHighwayGruBidaf: {
      m.combiner_ = EmbeddingCombiner::create(m.store_, "embedding", d, cfg.d_char, cfg.d_char_out, rng);
      m.gru_encoder_ = GruLayer::create(m.store_, "encoder", m.combiner_->output_width(), h, true, rng);
      m.highways_.push_back(HighwayLayer::create(m.store_, "highway.0", 2 * h, rng));
      m.gru_decoder_ = GruLayer::create(m.store_, "decoder", 2 * h, h, true, rng);
      m.bidaf_head_ = BidafOutHead::create(m.store_, "head", 2 * h, 2 * h, rng);
      break;
    }
    case Architecture::kGruAttnSelfattnGruBidaf: {
      m.combiner_ = EmbeddingCombiner::create(m.store_, "embedding", d, cfg.d_char, cfg.d_char_out, rng);
      m.gru_encoder_ = GruLayer::create(m.store_, "encoder", m.combiner_->output_width(), h, true, rng);
      m.gru_decoder_ = GruLayer::create(m.store_, "decoder", 2 * h, h, true, rng);
      m.bidaf_head_ = BidafOutHead::create(m.store_, "head", 2 * h, 2 * h, rng);
      break;
    }
  }
  if (cfg.use_char_embedding) m.chars_ = CharEmbeddingTable(cfg.d_char, cfg.char_seed);
  return m;
}

void QaModel::set_dropout_rate(double rate) {
  ModelConfig next = config_;
  next.dropout_rate = rate;
  next.validate();
  config_ = next;
}

SpanLogits QaModel::forward(const Feature& feature, const EmbeddingMatrix& embeddings, Rng* dropout_rng) const {
  if (embeddings.seq_len != feature.size()) {
    throw DataError("embeddings for " + feature.qid + "#" + std::to_string(feature.feature_index) + " have " +
                    std::to_string(embeddings.seq_len) + " rows, feature has " + std::to_string(feature.size()) +
                    " tokens");
  }
  if (embeddings.d_model != config_.d_model) {
    throw ShapeError("embedding width " + std::to_string(embeddings.d_model) + " does not match d_model " +
                     std::to_string(config_.d_model));
  }
  const bool training = dropout_rng != nullptr && config_.dropout_rate > 0.0;
  auto drop = [&](const Tensor& t) { return training ? dropout(t, config_.dropout_rate, *dropout_rng, true) : t; };
  const std::vector<bool> all_keys(feature.size(), true);

  Tensor x = drop(embeddings.tensor());
  SpanLogits out;
  switch (config_.architecture) {
    case Architecture::kSquadOut:
      out = albert_squad_out(*squad_head_, x, feature.context_mask);
      break;
    case Architecture::kHighwaySquadOut:
      for (const auto& layer : highways_) x = highway_forward(layer, x);
      out = albert_squad_out(*squad_head_, drop(x), feature.context_mask);
      break;
    case Architecture::kBilstmAttnBilstmBidaf: {
      const Tensor combined = combine_embeddings(*combiner_, x, feature.tokens, chars_);
      const Tensor enc = bilstm_forward(*lstm_encoder_, combined);
      const Tensor att = drop(add(enc, dot_product_attention(enc, all_keys, false)));
      const Tensor dec = drop(bilstm_forward(*lstm_decoder_, att));
      out = bidaf_out(*bidaf_head_, att, dec, feature.context_mask);
      break;
    }
    case Architecture::kGruHighwayGruBidaf: {
      const Tensor combined = combine_embeddings(*combiner_, x, feature.tokens, chars_);
      const Tensor enc = gru_forward(*gru_encoder_, combined);
      const Tensor mid = drop(highway_forward(highways_.front(), enc));
      const Tensor dec = drop(gru_forward(*gru_decoder_, mid));
      out = bidaf_out(*bidaf_head_, mid, dec, feature.context_mask);
      break;
    }
    case Architecture::kGruAttnSelfattnGruBidaf: {
      const Tensor combined = combine_embeddings(*combiner_, x, feature.tokens, chars_);
      const Tensor enc = gru_forward(*gru_encoder_, combined);
      const Tensor att = add(enc, dot_product_attention(enc, all_keys, false));
      const Tensor self = drop(add(att, dot_product_attention(att, all_keys, true)));
      const Tensor dec = drop(gru_forward(*gru_decoder_, self));
      out = bidaf_out(*bidaf_head_, self, dec, feature.context_mask);
      break;
    }
  }
  out.qid = feature.qid;
  out.feature_index = feature.feature_index;
  return out;
}

}  // namespace squadlab
