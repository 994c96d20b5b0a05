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

#include "squadlab/cli.h"

#include <chrono>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "squadlab/embedder.h"
#include "squadlab/ensembler.h"
#include "squadlab/evaluator.h"
#include "squadlab/io.h"
#include "squadlab/parallel.h"
#include "squadlab/selftest.h"
#include "squadlab/synthetic.h"
#include "squadlab/trainer.h"

#ifndef SQUADLAB_VERSION
#define SQUADLAB_VERSION "0.0.0"
#endif

namespace squadlab {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string toolkit_version() { return SQUADLAB_VERSION; }

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Common {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
};

std::uint64_t resolve_seed(const Common& common) {
  if (common.seed) return *common.seed;
  if (const char* env = std::getenv("SQUADLAB_SEED"); env != nullptr && *env != '\0') {
    std::uint64_t value = 0;
    const char* end = env + std::char_traits<char>::length(env);
    auto [ptr, ec] = std::from_chars(env, end, value);
    if (ec != std::errc() || ptr != end) throw UsageError(std::string("SQUADLAB_SEED is not an integer: ") + env);
    return value;
  }
  return 0;
}

class Manifest {
 public:
  Manifest(std::string command, const Common& common, std::uint64_t seed)
      : start_(std::chrono::steady_clock::now()) {
    json_["command"] = std::move(command);
    json_["version"] = toolkit_version();
    json_["seed"] = seed;
    json_["threads"] = common.threads;
    json_["config"] = ordered_json::object();
    json_["inputs"] = ordered_json::object();
    json_["outputs"] = ordered_json::object();
  }
  ordered_json& config() { return json_["config"]; }
  void input(const std::string& role, const std::string& path) { json_["inputs"][role] = path; }
  void output(const std::string& role, const std::string& path) { json_["outputs"][role] = path; }

  void write(const std::string& path) {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json_["wall_time_seconds"] = seconds;
    write_file(path, json_.dump(2) + "\n");
  }

 private:
  ordered_json json_;
  std::chrono::steady_clock::time_point start_;
};

std::string manifest_path_for(const std::string& output) { return output + ".manifest.json"; }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
}

std::map<std::string, std::string> context_map(const std::vector<RawExample>& examples) {
  std::map<std::string, std::string> out;
  for (const auto& ex : examples) out[ex.qid] = ex.context;
  return out;
}

DecodeOptions decode_options(std::size_t n_best, std::size_t max_answer_length, double null_threshold) {
  if (n_best < 2) throw UsageError("--n-best must be at least 2 (it counts the no-answer candidate)");
  if (max_answer_length == 0) throw UsageError("--max-answer-length must be positive");
  return {n_best, max_answer_length, null_threshold};
}

ordered_json decode_json(const DecodeOptions& o) {
  return {{"n_best", o.n_best}, {"max_answer_length", o.max_answer_length}, {"null_threshold", o.null_threshold}};
}

// ---- preprocess ----

struct PreprocessArgs {
  std::string data, vocab, pretokenized, output;
  std::size_t max_seq_length = 384;
  std::size_t doc_stride = 128;
};

int run_preprocess(const PreprocessArgs& a, const Common& common) {
  const std::uint64_t seed = resolve_seed(common);
  Manifest manifest("preprocess", common, seed);
  const PreprocessConfig cfg{a.max_seq_length, a.doc_stride};
  try {
    cfg.validate();
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  if (a.vocab.empty() && a.pretokenized.empty()) throw UsageError("preprocess needs --vocab or --pretokenized");

  const std::vector<RawExample> examples = load_squad_json(a.data);
  std::unordered_set<std::string> vocab;
  if (!a.vocab.empty()) vocab = load_vocab(a.vocab);
  std::vector<Feature> features;
  if (a.pretokenized.empty()) {
    features = preprocess_examples(examples, vocab, cfg, common.threads);
  } else {
    std::map<std::string, PretokenizedRecord> records;
    for (auto& [qid, rec] : load_pretokenized(a.pretokenized)) {
      if (!records.emplace(qid, std::move(rec)).second) {
        throw DataError(a.pretokenized + ": question " + qid + " appears twice");
      }
    }
    for (const RawExample& ex : examples) {
      auto it = records.find(ex.qid);
      if (it == records.end()) throw DataError(a.pretokenized + ": no tokenization for question " + ex.qid);
      std::vector<std::string> question;
      if (it->second.question_tokens) {
        question = *it->second.question_tokens;
      } else if (!a.vocab.empty()) {
        question = toy_tokenize(ex.question, vocab).tokens;
      } else {
        throw DataError(a.pretokenized + ": question " + ex.qid + " has no question_tokens; pass --vocab");
      }
      for (Feature& f : chunk_context(ex, it->second.context, cfg, question)) features.push_back(std::move(f));
    }
  }
  write_features(a.output, features);
  std::cerr << "preprocess: " << examples.size() << " questions -> " << features.size() << " features\n";

  manifest.config() = {{"max_seq_length", cfg.max_seq_length}, {"doc_stride", cfg.doc_stride}};
  manifest.input("data", a.data);
  if (!a.vocab.empty()) manifest.input("vocab", a.vocab);
  if (!a.pretokenized.empty()) manifest.input("pretokenized", a.pretokenized);
  manifest.output("features", a.output);
  manifest.write(manifest_path_for(a.output));
  return kExitOk;
}

// ---- pseudo-embed ----

struct EmbedArgs {
  std::string features, output;
  std::size_t d_model = 64;
};

int run_pseudo_embed(const EmbedArgs& a, const Common& common) {
  const std::uint64_t seed = resolve_seed(common);
  Manifest manifest("pseudo-embed", common, seed);
  if (a.d_model == 0) throw UsageError("--d-model must be positive");
  const std::vector<Feature> features = read_features(a.features);
  std::vector<EmbeddingMatrix> matrices(features.size());
  parallel_for(features.size(), common.threads,
               [&](std::size_t i) { matrices[i] = pseudo_embed(features[i], a.d_model, seed); });
  save_embeddings(a.output, matrices);
  std::cerr << "pseudo-embed: " << matrices.size() << " matrices of width " << a.d_model << "\n";
  manifest.config() = {{"d_model", a.d_model}};
  manifest.input("features", a.features);
  manifest.output("embeddings", a.output);
  manifest.write(manifest_path_for(a.output));
  return kExitOk;
}

// ---- train ----

struct TrainArgs {
  std::string features, architecture, embeddings, output_dir, preset;
  std::optional<std::uint64_t> embedding_seed;
  std::size_t d_model = 64, hidden = 32, highway_layers = 1, char_dim = 16, char_out = 16;
  std::optional<double> learning_rate, dropout_rate;
  std::optional<std::size_t> batch_size, epochs, max_seq_length, doc_stride;
};

int run_train(const TrainArgs& a, const Common& common) {
  const std::uint64_t seed = resolve_seed(common);
  Manifest manifest("train", common, seed);

  Hyperparams hp;
  try {
    hp = a.preset.empty() ? Hyperparams{} : Hyperparams::preset(a.preset);
    ModelConfig cfg = ModelConfig::for_architecture(parse_architecture(a.architecture));
    cfg.d_model = a.d_model;
    cfg.hidden = a.hidden;
    cfg.highway_layers = a.highway_layers;
    cfg.d_char = a.char_dim;
    cfg.d_char_out = a.char_out;
    if (a.learning_rate) hp.learning_rate = *a.learning_rate;
    if (a.batch_size) hp.batch_size = *a.batch_size;
    if (a.epochs) hp.epochs = *a.epochs;
    if (a.dropout_rate) hp.dropout_rate = *a.dropout_rate;
    if (a.max_seq_length) hp.max_seq_length = *a.max_seq_length;
    if (a.doc_stride) hp.doc_stride = *a.doc_stride;
    hp.seed = seed;
    cfg.dropout_rate = hp.dropout_rate;
    hp.validate();
    cfg.validate();

    const std::vector<Feature> features = read_features(a.features);
    for (const Feature& f : features) {
      if (f.size() > hp.max_seq_length) {
        throw DataError("feature " + f.qid + "#" + std::to_string(f.feature_index) + " has " +
                        std::to_string(f.size()) + " tokens, more than --max-seq-length " +
                        std::to_string(hp.max_seq_length));
      }
    }
    std::unique_ptr<EmbeddingProvider> provider;
    ordered_json embedding_source;
    if (!a.embeddings.empty()) {
      provider = std::make_unique<FixtureEmbeddings>(load_embeddings(a.embeddings, cfg.d_model));
      embedding_source = {{"kind", "fixture"}, {"path", a.embeddings}};
      manifest.input("embeddings", a.embeddings);
    } else {
      const std::uint64_t es = a.embedding_seed.value_or(seed);
      provider = std::make_unique<PseudoEmbedder>(cfg.d_model, es);
      embedding_source = {{"kind", "pseudo"}, {"seed", es}, {"d_model", cfg.d_model}};
    }

    QaModel model = QaModel::build(cfg, seed);
    std::cerr << "train: " << architecture_tag(cfg.architecture) << ", " << model.parameters().parameter_count()
              << " parameters, " << features.size() << " features\n";
    Trainer trainer(model, *provider, hp);
    for (std::size_t e = 0; e < hp.epochs; ++e) {
      const double loss = trainer.run_epoch(features);
      std::cerr << "epoch " << (e + 1) << "/" << hp.epochs << " mean loss " << loss << "\n";
    }

    ensure_dir(a.output_dir);
    const std::string ckpt_path = (fs::path(a.output_dir) / "checkpoint.json").string();
    const std::string curve_path = (fs::path(a.output_dir) / "loss.csv").string();
    ordered_json extra;
    extra["hyperparams"] = hyperparams_to_json(hp);
    extra["embeddings"] = embedding_source;
    save_checkpoint(ckpt_path, model_checkpoint(model, extra));
    write_loss_curve(curve_path, trainer.loss_curve());

    manifest.config() = {{"model", model_config_to_json(cfg)},
                         {"hyperparams", hyperparams_to_json(hp)},
                         {"embeddings", embedding_source},
                         {"preset", a.preset}};
    manifest.input("features", a.features);
    manifest.output("checkpoint", ckpt_path);
    manifest.output("loss_curve", curve_path);
    manifest.write((fs::path(a.output_dir) / "manifest.json").string());
  } catch (const DataError&) {
    throw;
  } catch (const ShapeError&) {
    throw;
  } catch (const NumericError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return kExitOk;
}

// ---- predict ----

struct PredictArgs {
  std::string checkpoint, features, data, embeddings, output, logits_out;
  std::size_t n_best = 20, max_answer_length = 30;
  double null_threshold = 0.0;
  std::optional<double> model_f1_weight;
};

int run_predict(const PredictArgs& a, const Common& common) {
  const std::uint64_t seed = resolve_seed(common);
  Manifest manifest("predict", common, seed);
  const DecodeOptions options = decode_options(a.n_best, a.max_answer_length, a.null_threshold);
  if (a.model_f1_weight && !(*a.model_f1_weight > 0.0)) throw UsageError("--model-f1-weight must be positive");

  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const QaModel model = model_from_checkpoint(ckpt);
  const std::vector<Feature> features = read_features(a.features);
  const std::vector<RawExample> examples = load_squad_json(a.data);

  std::unique_ptr<EmbeddingProvider> provider;
  if (!a.embeddings.empty()) {
    provider = std::make_unique<FixtureEmbeddings>(load_embeddings(a.embeddings, model.config().d_model));
    manifest.input("embeddings", a.embeddings);
  } else {
    const ordered_json source = ckpt.config.value("embeddings", ordered_json::object());
    if (source.value("kind", "") != "pseudo") {
      throw UsageError("checkpoint was trained on fixture embeddings; pass --embeddings");
    }
    provider = std::make_unique<PseudoEmbedder>(model.config().d_model, source.at("seed").get<std::uint64_t>());
  }

  PredictionRun run = predict(model, features, *provider, context_map(examples), options, common.threads);
  for (auto& p : run.predictions) p.model_f1_weight = a.model_f1_weight;
  write_predictions(a.output, run.predictions);
  if (!a.logits_out.empty()) {
    save_logits(a.logits_out, run.logits);
    manifest.output("logits", a.logits_out);
  }
  std::cerr << "predict: " << run.predictions.size() << " questions from " << features.size() << " features\n";

  manifest.config() = decode_json(options);
  if (a.model_f1_weight) manifest.config()["model_f1_weight"] = *a.model_f1_weight;
  manifest.input("checkpoint", a.checkpoint);
  manifest.input("features", a.features);
  manifest.input("data", a.data);
  manifest.output("predictions", a.output);
  manifest.write(manifest_path_for(a.output));
  return kExitOk;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string pred, gold, output;
};

int run_evaluate(const EvaluateArgs& a, const Common& common) {
  const std::uint64_t seed = resolve_seed(common);
  Manifest manifest("evaluate", common, seed);
  const std::vector<QuestionPrediction> predictions = read_predictions(a.pred);
  const std::vector<RawExample> gold = load_squad_json(a.gold);
  const EvalReport report = evaluate(predictions, gold);
  std::cout << eval_summary_table(report);
  char line[96];
  std::snprintf(line, sizeof line, "EM=%.1f F1=%.1f\n", report.em, report.f1);
  std::cout << line;
  if (!a.output.empty()) {
    write_file(a.output, eval_report_to_json(report).dump(2) + "\n");
    manifest.input("predictions", a.pred);
    manifest.input("gold", a.gold);
    manifest.output("report", a.output);
    manifest.write(manifest_path_for(a.output));
  }
  return kExitOk;
}

// ---- ensemble ----

struct EnsembleArgs {
  std::string strategy, features, data, output;
  std::vector<std::string> preds, logits;
  std::vector<double> weights;
  std::optional<double> mean_weight;
  std::size_t n_best = 20, max_answer_length = 30;
  double null_threshold = 0.0;
};

int run_ensemble(const EnsembleArgs& a, const Common& common) {
  const std::uint64_t seed = resolve_seed(common);
  Manifest manifest("ensemble", common, seed);
  const DecodeOptions options = decode_options(a.n_best, a.max_answer_length, a.null_threshold);
  const bool needs_logits = a.strategy != "weighted-voting";
  const bool needs_sets = a.strategy != "mean-logits";
  if (needs_logits && (a.features.empty() || a.data.empty())) {
    throw UsageError(a.strategy + " needs --features and --data to decode summed logits");
  }
  if (needs_logits && a.logits.size() < 2) throw UsageError(a.strategy + " needs at least two --logits files");
  if (needs_sets && a.preds.empty()) throw UsageError(a.strategy + " needs --pred files");
  if (!a.weights.empty() && a.weights.size() != a.preds.size()) {
    throw UsageError("--weights must give one weight per --pred file");
  }
  if (a.strategy == "weighted-voting-mean-logits" && !a.mean_weight) {
    throw UsageError("weighted-voting-mean-logits needs --mean-weight");
  }

  std::vector<PredictionSet> sets;
  for (std::size_t i = 0; i < a.preds.size() && needs_sets; ++i) {
    sets.push_back(load_prediction_set(a.preds[i], a.weights.empty() ? std::nullopt : std::optional(a.weights[i])));
    manifest.input("pred." + std::to_string(i), a.preds[i]);
  }
  std::vector<LogitsDump> dumps;
  for (std::size_t i = 0; i < a.logits.size() && needs_logits; ++i) {
    dumps.push_back(load_logits(a.logits[i]));
    manifest.input("logits." + std::to_string(i), a.logits[i]);
  }

  std::vector<QuestionPrediction> result;
  if (a.strategy == "weighted-voting") {
    result = weighted_voting(sets);
  } else {
    const std::vector<Feature> features = read_features(a.features);
    const auto contexts = context_map(load_squad_json(a.data));
    manifest.input("features", a.features);
    manifest.input("data", a.data);
    if (a.strategy == "mean-logits") {
      result = predictions_from_logits(mean_logits(dumps), features, contexts, options);
    } else {
      result = weighted_voting_with_mean_logits(sets, dumps, *a.mean_weight, features, contexts, options);
    }
  }
  write_predictions(a.output, result);
  std::cerr << "ensemble: " << a.strategy << " over " << std::max(sets.size(), dumps.size()) << " models, "
            << result.size() << " questions\n";

  manifest.config() = decode_json(options);
  manifest.config()["strategy"] = a.strategy;
  manifest.config()["weights"] = a.weights;
  if (a.mean_weight) manifest.config()["mean_weight"] = *a.mean_weight;
  manifest.output("predictions", a.output);
  manifest.write(manifest_path_for(a.output));
  return kExitOk;
}

// ---- selftest ----

int run_selftest_command(const Common& common) {
  const std::uint64_t seed = resolve_seed(common);
  bool ok = true;
  for (const SelftestCheck& c : run_selftest(seed)) {
    std::cout << (c.passed ? "PASS  " : "FAIL  ") << c.name << ": " << c.detail << "\n";
    ok = ok && c.passed;
  }
  return ok ? kExitOk : kExitData;
}

// ---- synth ----

struct SynthArgs {
  std::string output_dir;
  std::size_t examples = 50;
  double unanswerable = 0.2;
};

int run_synth(const SynthArgs& a, const Common& common) {
  const std::uint64_t seed = resolve_seed(common);
  Manifest manifest("synth", common, seed);
  SyntheticOptions options;
  options.examples = a.examples;
  options.unanswerable_fraction = a.unanswerable;
  options.seed = seed;
  SyntheticCorpus corpus;
  try {
    corpus = make_synthetic_corpus(options);
  } catch (const DataError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  ensure_dir(a.output_dir);
  const std::string data_path = (fs::path(a.output_dir) / "data.json").string();
  const std::string vocab_path = (fs::path(a.output_dir) / "vocab.txt").string();
  write_file(data_path, squad_to_json(corpus.examples, "synthetic").dump(2) + "\n");
  std::vector<std::string> vocab(corpus.vocab.begin(), corpus.vocab.end());
  std::sort(vocab.begin(), vocab.end());
  std::string vocab_text;
  for (const auto& v : vocab) vocab_text += v + "\n";
  write_file(vocab_path, vocab_text);
  std::cerr << "synth: " << corpus.examples.size() << " questions, " << vocab.size() << " vocabulary entries\n";
  manifest.config() = {{"examples", a.examples}, {"unanswerable_fraction", a.unanswerable}};
  manifest.output("data", data_path);
  manifest.output("vocab", vocab_path);
  manifest.write((fs::path(a.output_dir) / "manifest.json").string());
  return kExitOk;
}

void add_decode_flags(CLI::App* cmd, std::size_t& n_best, std::size_t& max_len, double& threshold) {
  cmd->add_option("--n-best", n_best, "Candidates kept per feature and question")->capture_default_str();
  cmd->add_option("--max-answer-length", max_len, "Longest answer span in tokens")->capture_default_str();
  cmd->add_option("--null-threshold", threshold, "Predict no answer when null - best span exceeds this")
      ->capture_default_str();
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args) {
  CLI::App app{"squadlab: extractive question answering toolkit"};
  app.set_version_flag("--version", toolkit_version());
  app.set_config("--config", "", "Read options from a key=value (TOML/INI) file; flags override it");
  app.require_subcommand(1);

  Common common;
  app.add_option("--seed", common.seed, "Seed for all randomness (fallback: SQUADLAB_SEED, then 0)");
  app.add_option("--threads", common.threads, "Workers for per-example stages")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "Tokenize and chunk a SQuAD file into features");
  c_pre->add_option("--data", pre.data, "SQuAD 2.0 JSON file")->required();
  c_pre->add_option("--vocab", pre.vocab, "Vocabulary for the greedy subword tokenizer");
  c_pre->add_option("--pretokenized", pre.pretokenized, "JSON-lines context tokenizations");
  c_pre->add_option("--max-seq-length", pre.max_seq_length, "Tokens per feature, question included")
      ->capture_default_str();
  c_pre->add_option("--doc-stride", pre.doc_stride, "Context tokens between consecutive chunk starts")
      ->capture_default_str();
  c_pre->add_option("--output", pre.output, "Feature file (JSON lines)")->required();

  EmbedArgs emb;
  auto* c_emb = app.add_subcommand("pseudo-embed", "Write hash-based embeddings for a feature file");
  c_emb->add_option("--features", emb.features)->required();
  c_emb->add_option("--d-model", emb.d_model)->capture_default_str();
  c_emb->add_option("--output", emb.output, "Embedding file (binary)")->required();

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train one model");
  c_tr->add_option("--features", tr.features)->required();
  c_tr->add_option("--architecture", tr.architecture,
                   "squad_out | highway_squad_out | bilstm_attn_bilstm_bidaf | gru_highway_gru_bidaf | "
                   "gru_attn_selfattn_gru_bidaf")
      ->required();
  c_tr->add_option("--embeddings", tr.embeddings, "Embedding file; hash embeddings are used when absent");
  c_tr->add_option("--embedding-seed", tr.embedding_seed, "Seed of the hash embeddings (default: --seed)");
  c_tr->add_option("--output-dir", tr.output_dir)->required();
  c_tr->add_option("--preset", tr.preset, "Hyperparameter preset applied before explicit flags");
  c_tr->add_option("--learning-rate", tr.learning_rate);
  c_tr->add_option("--batch-size", tr.batch_size);
  c_tr->add_option("--epochs", tr.epochs);
  c_tr->add_option("--dropout-rate", tr.dropout_rate);
  c_tr->add_option("--max-seq-length", tr.max_seq_length, "Feature length the features were built with");
  c_tr->add_option("--doc-stride", tr.doc_stride, "Chunk stride the features were built with");
  c_tr->add_option("--d-model", tr.d_model)->capture_default_str();
  c_tr->add_option("--hidden", tr.hidden)->capture_default_str();
  c_tr->add_option("--highway-layers", tr.highway_layers)->capture_default_str();
  c_tr->add_option("--char-dim", tr.char_dim)->capture_default_str();
  c_tr->add_option("--char-out", tr.char_out)->capture_default_str();

  PredictArgs pr;
  auto* c_pr = app.add_subcommand("predict", "Decode answers with a trained checkpoint");
  c_pr->add_option("--checkpoint", pr.checkpoint)->required();
  c_pr->add_option("--features", pr.features)->required();
  c_pr->add_option("--data", pr.data, "SQuAD file the features came from")->required();
  c_pr->add_option("--embeddings", pr.embeddings);
  c_pr->add_option("--output", pr.output, "Prediction file (JSON lines)")->required();
  c_pr->add_option("--logits-out", pr.logits_out, "Also write per-feature logits (binary)");
  c_pr->add_option("--model-f1-weight", pr.model_f1_weight, "Vote weight recorded in every prediction record");
  add_decode_flags(c_pr, pr.n_best, pr.max_answer_length, pr.null_threshold);

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Score predictions with EM and F1");
  c_ev->add_option("--pred", ev.pred)->required();
  c_ev->add_option("--gold", ev.gold)->required();
  c_ev->add_option("--output", ev.output, "Report file (JSON)");

  EnsembleArgs en;
  auto* c_en = app.add_subcommand("ensemble", "Combine several models");
  c_en->add_option("--strategy", en.strategy)
      ->required()
      ->check(CLI::IsMember({"mean-logits", "weighted-voting", "weighted-voting-mean-logits"}));
  c_en->add_option("--pred", en.preds, "Prediction files, one per model");
  c_en->add_option("--weights", en.weights, "Vote weights in --pred order (default: from the files)");
  c_en->add_option("--logits", en.logits, "Logits files, one per model, in --pred order");
  c_en->add_option("--mean-weight", en.mean_weight, "Vote weight of the mean-logits voter");
  c_en->add_option("--features", en.features);
  c_en->add_option("--data", en.data);
  c_en->add_option("--output", en.output)->required();
  add_decode_flags(c_en, en.n_best, en.max_answer_length, en.null_threshold);

  auto* c_st = app.add_subcommand("selftest", "Run gradient checks and golden examples");

  SynthArgs sy;
  auto* c_sy = app.add_subcommand("synth", "Write a small synthetic SQuAD-format corpus and vocabulary");
  c_sy->add_option("--output-dir", sy.output_dir)->required();
  c_sy->add_option("--examples", sy.examples)->capture_default_str();
  c_sy->add_option("--unanswerable", sy.unanswerable, "Fraction of unanswerable questions")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_pre->parsed()) return run_preprocess(pre, common);
    if (c_emb->parsed()) return run_pseudo_embed(emb, common);
    if (c_tr->parsed()) return run_train(tr, common);
    if (c_pr->parsed()) return run_predict(pr, common);
    if (c_ev->parsed()) return run_evaluate(ev, common);
    if (c_en->parsed()) return run_ensemble(en, common);
    if (c_st->parsed()) return run_selftest_command(common);
    if (c_sy->parsed()) return run_synth(sy, common);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int cli_dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_dispatch(args);
}

}  // namespace squadlab
