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

#include "squadlab/trainer.h"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "squadlab/io.h"
#include "squadlab/parallel.h"

namespace squadlab {

using nlohmann::ordered_json;

void Hyperparams::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw Error("learning_rate must be non-negative");
  if (batch_size == 0) throw Error("batch_size must be positive");
  if (epochs == 0) throw Error("epochs must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw Error("dropout_rate must lie in [0, 1)");
  if (!(clip_norm > 0.0)) throw Error("clip_norm must be positive");
  preprocess_config().validate();
}

Hyperparams Hyperparams::preset(std::string_view name) {
  Hyperparams hp;
  hp.max_seq_length = 384;
  hp.doc_stride = 128;
  hp.dropout_rate = 0.2;
  if (name == "albert-base-v2-squad-out") {
    hp.learning_rate = 3e-5;
    hp.batch_size = 7;
    hp.epochs = 3;
  } else if (name == "albert-base-v2") {
    hp.learning_rate = 3e-5;
    hp.batch_size = 5;
    hp.epochs = 3;
  } else if (name == "albert-xlarge") {
    hp.learning_rate = 1e-5;
    hp.batch_size = 1;
    hp.epochs = 2;
    hp.max_seq_length = 280;
  } else if (name == "albert-xxlarge") {
    hp.learning_rate = 8e-6;
    hp.batch_size = 1;
    hp.epochs = 1;
    hp.max_seq_length = 280;
  } else if (name == "desk") {
    return Hyperparams{};
  } else {
    throw Error("unknown preset '" + std::string(name) + "'");
  }
  return hp;
}

std::vector<std::string> Hyperparams::preset_names() {
  return {"desk", "albert-base-v2-squad-out", "albert-base-v2", "albert-xlarge", "albert-xxlarge"};
}

ordered_json hyperparams_to_json(const Hyperparams& hp) {
  ordered_json j;
  j["learning_rate"] = hp.learning_rate;
  j["batch_size"] = hp.batch_size;
  j["epochs"] = hp.epochs;
  j["max_seq_length"] = hp.max_seq_length;
  j["doc_stride"] = hp.doc_stride;
  j["dropout_rate"] = hp.dropout_rate;
  j["seed"] = hp.seed;
  j["clip_norm"] = hp.clip_norm;
  return j;
}

Trainer::Trainer(QaModel& model, const EmbeddingProvider& provider, const Hyperparams& hp)
    : model_(model),
      provider_(provider),
      hp_(hp),
      params_(model.parameters().tensors()),
      shuffle_rng_(mix64(hp.seed ^ 0x73687566ULL)),
      dropout_rng_(mix64(hp.seed ^ 0x64726f70ULL)) {
  hp_.validate();
  if (provider.d_model() != model.config().d_model) {
    throw ShapeError("embedding provider width " + std::to_string(provider.d_model()) +
                     " does not match model d_model " + std::to_string(model.config().d_model));
  }
  model_.set_dropout_rate(hp_.dropout_rate);
}

double Trainer::run_epoch(std::span<const Feature> features) {
  if (features.empty()) throw DataError("training needs at least one feature");
  ++epoch_;
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle_rng_.shuffle(order);

  Tape& tape = Tape::current();
  double epoch_total = 0.0;
  std::size_t batches = 0;
  for (std::size_t begin = 0; begin < order.size(); begin += hp_.batch_size) {
    const std::size_t end = std::min(order.size(), begin + hp_.batch_size);
    ++step_;
    tape.clear();
    model_.parameters().zero_grad();
    double batch_loss = 0.0;
    try {
      Tensor total;
      for (std::size_t k = begin; k < end; ++k) {
        const Feature& f = features[order[k]];
        const SpanLogits logits = model_.forward(f, provider_.embed(f), &dropout_rng_);
        const Tensor loss = span_loss(logits, f.start_position, f.end_position);
        total = total.defined() ? add(total, loss) : loss;
      }
      const Tensor batch_mean = scale(total, 1.0 / static_cast<double>(end - begin));
      batch_loss = batch_mean.item();
      backward(batch_mean);
    } catch (const NumericError& e) {
      tape.clear();
      throw NumericError("non-finite value in batch " + std::to_string(step_) + " (epoch " +
                         std::to_string(epoch_) + "): " + e.what());
    }
    tape.clear();
    clip_grad_norm(params_, hp_.clip_norm);
    adam_step(params_, adam_, hp_.learning_rate);
    curve_.push_back({step_, epoch_, batch_loss});
    epoch_total += batch_loss;
    ++batches;
  }
  return epoch_total / static_cast<double>(batches);
}

void Trainer::fit(std::span<const Feature> features) {
  for (std::size_t e = 0; e < hp_.epochs; ++e) run_epoch(features);
}

void write_loss_curve(const std::string& path, std::span<const LossRecord> curve) {
  std::string out = "step,loss\n";
  char buf[64];
  for (const auto& r : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", r.step, r.loss);
    out += buf;
  }
  write_file(path, out);
}

PredictionRun predict(const QaModel& model, std::span<const Feature> features, const EmbeddingProvider& provider,
                      const std::map<std::string, std::string>& contexts, const DecodeOptions& options,
                      std::size_t threads) {
  PredictionRun run;
  run.logits.resize(features.size());
  parallel_for(features.size(), threads, [&](std::size_t i) {
    NoGradGuard no_grad;
    run.logits[i] = to_values(model.forward(features[i], provider.embed(features[i])));
  });
  run.predictions = predictions_from_logits(run.logits, features, contexts, options);
  return run;
}

Checkpoint model_checkpoint(const QaModel& model, const ordered_json& extra) {
  ordered_json config;
  config["model"] = model_config_to_json(model.config());
  for (const auto& [key, value] : extra.items()) {
    if (key == "model") throw Error("checkpoint extra config may not override 'model'");
    config[key] = value;
  }
  return snapshot(model.parameters(), model.seed(), std::move(config));
}

QaModel model_from_checkpoint(const Checkpoint& checkpoint) {
  if (!checkpoint.config.contains("model")) throw DataError("checkpoint has no model config");
  QaModel model = QaModel::build(model_config_from_json(checkpoint.config.at("model")), checkpoint.seed);
  restore(checkpoint, model.parameters());
  return model;
}

}  // namespace squadlab
