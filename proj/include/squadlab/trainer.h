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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "squadlab/checkpoint.h"
#include "squadlab/model.h"

namespace squadlab {

struct Hyperparams {
  double learning_rate = 1e-2;
  std::size_t batch_size = 8;
  std::size_t epochs = 30;
  std::size_t max_seq_length = 384;
  std::size_t doc_stride = 128;
  double dropout_rate = 0.1;
  std::uint64_t seed = 0;
  double clip_norm = 5.0;

  void validate() const;
  PreprocessConfig preprocess_config() const { return {max_seq_length, doc_stride}; }

  // Published settings for the pretrained-encoder runs, by name.
  static Hyperparams preset(std::string_view name);
  static std::vector<std::string> preset_names();
};

nlohmann::ordered_json hyperparams_to_json(const Hyperparams& hp);

struct LossRecord {
  std::size_t step = 0;   // global batch counter, from 1
  std::size_t epoch = 0;  // from 1
  double loss = 0.0;      // mean loss over the batch's features
};

// Mini-batch Adam over seeded shuffles of the feature list. Each model gets
// its own trainer; parameters are updated in place.
class Trainer {
 public:
  Trainer(QaModel& model, const EmbeddingProvider& provider, const Hyperparams& hp);

  // Returns the mean of the epoch's batch losses.
  double run_epoch(std::span<const Feature> features);
  void fit(std::span<const Feature> features);

  const std::vector<LossRecord>& loss_curve() const { return curve_; }
  std::size_t epochs_completed() const { return epoch_; }

 private:
  QaModel& model_;
  const EmbeddingProvider& provider_;
  Hyperparams hp_;
  std::vector<Tensor> params_;
  AdamState adam_;
  Rng shuffle_rng_;
  Rng dropout_rng_;
  std::vector<LossRecord> curve_;
  std::size_t epoch_ = 0;
  std::size_t step_ = 0;
};

// CSV with header "step,loss".
void write_loss_curve(const std::string& path, std::span<const LossRecord> curve);

struct PredictionRun {
  std::vector<FeatureLogits> logits;
  std::vector<QuestionPrediction> predictions;
};

// Inference without dropout or gradient recording.
PredictionRun predict(const QaModel& model, std::span<const Feature> features, const EmbeddingProvider& provider,
                      const std::map<std::string, std::string>& contexts, const DecodeOptions& options,
                      std::size_t threads = 1);

// The checkpoint config holds the model config under "model"; `extra`
// fields (hyperparameters, embedding source) are stored alongside it.
Checkpoint model_checkpoint(const QaModel& model,
                            const nlohmann::ordered_json& extra = nlohmann::ordered_json::object());
QaModel model_from_checkpoint(const Checkpoint& checkpoint);

}  // namespace squadlab
