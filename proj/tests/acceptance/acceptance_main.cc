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

// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "finite_diff.h"
#include "oracles.h"
#include "squadlab/cli.h"
#include "squadlab/ensembler.h"
#include "squadlab/evaluator.h"
#include "squadlab/fixtures.h"
#include "squadlab/heads.h"
#include "squadlab/io.h"
#include "squadlab/layers.h"
#include "squadlab/model.h"
#include "squadlab/ops.h"
#include "squadlab/synthetic.h"
#include "squadlab/trainer.h"
#include "test_support.h"

namespace squadlab {
namespace {

using testing::finite_difference_error;
using testing::random_tensor;

// Tolerances and budgets.
constexpr double kGoldenSeconds = 1.0;
constexpr double kF1Einstein = 2.0 / 3.0;
constexpr double kF1EinsteinTol = 1e-4;
constexpr double kGradOpTol = 1e-6;
constexpr double kGradStackTol = 1e-4;
constexpr double kGradSeconds = 60.0;
constexpr std::uint64_t kGradSeeds[] = {1, 2, 3, 4, 5};
constexpr int kMaskFeatures = 1000;
constexpr double kMaskedProbTol = 1e-9;
constexpr int kDecodeInstances = 1000;
constexpr std::size_t kDecodeMaxSeq = 12;
constexpr int kVotingCases = 1000;
constexpr std::size_t kOverfitExamples = 50;
constexpr std::size_t kOverfitDModel = 64;
constexpr std::size_t kOverfitMaxEpochs = 300;
constexpr double kOverfitSeconds = 300.0;
constexpr double kOverfitEm = 95.0;
constexpr int kScorerPairs = 10000;
constexpr double kScorerTol = 1e-12;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// [CLS] q0.. [SEP] w0 .. w(c-1) [SEP]; context words are "w<i>".
std::pair<Feature, std::string> packed(std::size_t q, std::size_t c, const std::string& qid = "q",
                                       std::size_t index = 0) {
  Feature f;
  f.qid = qid;
  f.feature_index = index;
  f.tokens.push_back("[CLS]");
  for (std::size_t i = 0; i < q; ++i) f.tokens.push_back("q" + std::to_string(i));
  f.tokens.push_back("[SEP]");
  f.context_mask.assign(f.tokens.size(), false);
  f.token_word_span.assign(f.tokens.size(), CharSpan{});
  std::string text;
  for (std::size_t w = 0; w < c; ++w) {
    if (w > 0) text += ' ';
    const std::size_t at = text.size();
    text += "w" + std::to_string(w);
    f.tokens.push_back("w" + std::to_string(w));
    f.context_mask.push_back(true);
    f.token_word_span.push_back({at, text.size()});
  }
  f.tokens.push_back("[SEP]");
  f.context_mask.push_back(false);
  f.token_word_span.push_back({});
  return {f, text};
}

// ---- 1: Obama golden ----
Outcome obama_golden() {
  Outcome o;
  const auto t0 = Clock::now();
  const GoldenFixture f = obama_fixture();
  const TokenizedContext ctx = toy_tokenize(f.example.context, obama_vocab());
  const std::vector<std::string> tokens = {"O", "ba", "ma", "was", "born", "in", "Au", "gust."};
  const std::vector<CharSpan> spans = {{0, 5}, {0, 5}, {0, 5}, {6, 9}, {10, 14}, {15, 17}, {18, 24}, {18, 24}};
  if (ctx.tokens != tokens || ctx.spans != spans) o.fail("token-span table differs");
  const std::vector<Feature> features = chunk_context(f.example, ctx, f.config, f.question_tokens);
  if (features.size() != 1) {
    o.fail("expected one feature");
    return o;
  }
  const Feature& feat = features[0];
  const std::size_t offset = feat.size() - 1 - ctx.tokens.size();
  FeatureLogits logits{feat.qid, 0, std::vector<double>(feat.size(), 0.0), std::vector<double>(feat.size(), 0.0)};
  logits.start[offset + 6] = 10.0;
  logits.end[offset + 6] = 10.0;
  const auto cands = decode_spans(logits, feat, f.example.context, {});
  if (cands.empty() || cands[0].text != "August") o.fail("(6,6) decoded to \"" + cands[0].text + "\"");
  if (span_to_text(ctx, 6, 6, f.example.context) != "August") o.fail("span (6,6) is not August");
  const double s = seconds_since(t0);
  if (s >= kGoldenSeconds) o.fail("took " + fmt("%.3f s", s));
  if (o.pass) o.detail = "8 tokens, (6,6) -> \"August\", " + fmt("%.3f s", s);
  return o;
}

// ---- 2: Jay golden ----
Outcome jay_golden() {
  Outcome o;
  const auto t0 = Clock::now();
  const GoldenFixture f = jay_fixture();
  const std::vector<Feature> features = chunk_context(f.example, f.context, f.config, f.question_tokens);
  if (features.size() < 2) {
    o.fail("expected several chunks");
    return o;
  }
  const Feature& first = features[0];
  if (!first.has_answer() ||
      span_to_text(first.token_word_span, first.start_position, first.end_position, f.example.context) != "12") {
    o.fail("first chunk does not carry \"12\"");
  }
  for (std::size_t i = 1; i < features.size(); ++i) {
    if (features[i].has_answer()) o.fail("chunk " + std::to_string(i) + " carries an answer");
  }
  const double s = seconds_since(t0);
  if (s >= kGoldenSeconds) o.fail("took " + fmt("%.3f s", s));
  if (o.pass) o.detail = std::to_string(features.size()) + " chunks, first \"12\", rest N/A, " + fmt("%.3f s", s);
  return o;
}

// ---- 3: Einstein scorer golden ----
Outcome einstein_golden() {
  Outcome o;
  const std::vector<std::string> gold = {"Albert Einstein"};
  const double f1 = compute_f1("Einstein", gold);
  if (std::abs(f1 - kF1Einstein) > kF1EinsteinTol) o.fail("F1 " + fmt("%.6f", f1));
  if (compute_em("Einstein", gold) != 0 || compute_em("Albert Einstein", gold) != 1) o.fail("EM table differs");
  const EvalReport r = evaluate(einstein_predictions(), einstein_corpus());
  if (r.em != 50.0) o.fail("corpus EM " + fmt("%.6f", r.em));
  if (o.pass) o.detail = "F1 " + fmt("%.4f", f1) + ", EM 0 then 1, corpus EM " + fmt("%.1f", r.em);
  return o;
}

// ---- 4: gradient suite ----
struct GradCase {
  std::string name;
  double tol;
  std::function<double(std::uint64_t)> run;  // returns the relative error for one seed
};

std::vector<Tensor> with_params(std::vector<Tensor> inputs, const ParameterStore& store) {
  for (const Tensor& t : store.tensors()) inputs.push_back(t);
  return inputs;
}

std::vector<GradCase> grad_cases() {
  std::vector<GradCase> cases;
  auto op = [&](std::string name, std::function<Tensor(const Tensor&, const Tensor&)> f) {
    cases.push_back({"op " + name, kGradOpTol, [f](std::uint64_t seed) {
                       Rng rng(seed);
                       const Tensor a = random_tensor({3, 4}, rng), b = random_tensor({3, 4}, rng);
                       const Tensor w = random_tensor({3, 4}, rng, false);
                       return finite_difference_error([&] { return sum(mul(f(a, b), w)); }, {a, b});
                     }});
  };
  op("add", [](const Tensor& a, const Tensor& b) { return add(a, b); });
  op("sub", [](const Tensor& a, const Tensor& b) { return sub(a, b); });
  op("mul", [](const Tensor& a, const Tensor& b) { return mul(a, b); });
  op("sigmoid", [](const Tensor& a, const Tensor&) { return sigmoid(a); });
  op("tanh", [](const Tensor& a, const Tensor&) { return tanh(a); });
  op("scale", [](const Tensor& a, const Tensor&) { return scale(a, -1.7); });
  op("softmax", [](const Tensor& a, const Tensor&) { return softmax(a, 1); });
  op("matmul", [](const Tensor& a, const Tensor& b) { return matmul(matmul(a, transpose(b)), a); });
  op("reverse_rows", [](const Tensor& a, const Tensor&) { return reverse_rows(a); });
  op("concat+slice", [](const Tensor& a, const Tensor& b) {
    const Tensor both[] = {a, b};
    return slice(concat(both, 1), 1, 2, 6);
  });
  op("reshape", [](const Tensor& a, const Tensor& b) { return add(reshape(reshape(a, {4, 3}), {3, 4}), b); });
  op("masked_fill", [](const Tensor& a, const Tensor&) {
    const Mask m{{3, 4}, {true, false, true, false, true, true, false, false, true, true, true, false}};
    return masked_fill(a, m, 0.25);
  });
  cases.push_back({"op cross_entropy", kGradOpTol, [](std::uint64_t seed) {
                     Rng rng(seed);
                     const Tensor x = random_tensor({3, 5}, rng);
                     const std::size_t targets[] = {1, 4, 0};
                     return finite_difference_error([&] { return cross_entropy_from_logits(x, targets); }, {x});
                   }});
  cases.push_back({"op segment_max", kGradOpTol, [](std::uint64_t seed) {
                     Rng rng(seed);
                     const Tensor x = random_tensor({5, 3}, rng);
                     const Tensor w = random_tensor({2, 3}, rng, false);
                     const std::size_t offsets[] = {0, 2, 5};
                     return finite_difference_error([&] { return sum(mul(segment_max(x, offsets), w)); }, {x});
                   }});

  auto layer = [&](std::string name, std::function<double(Rng&)> f) {
    cases.push_back({"layer " + name, kGradStackTol, [f](std::uint64_t seed) {
                       Rng rng(seed);
                       return f(rng);
                     }});
  };
  layer("highway", [](Rng& rng) {
    ParameterStore store;
    const HighwayLayer h = HighwayLayer::create(store, "hw", 4, rng);
    const Tensor x = random_tensor({3, 4}, rng), w = random_tensor({3, 4}, rng, false);
    return finite_difference_error([&] { return sum(mul(highway_forward(h, x), w)); }, with_params({x}, store));
  });
  layer("bilstm", [](Rng& rng) {
    ParameterStore store;
    const BiLstm l = BiLstm::create(store, "lstm", 3, 2, rng);
    const Tensor x = random_tensor({4, 3}, rng), w = random_tensor({4, 4}, rng, false);
    return finite_difference_error([&] { return sum(mul(bilstm_forward(l, x), w)); }, with_params({x}, store));
  });
  layer("bigru", [](Rng& rng) {
    ParameterStore store;
    const GruLayer l = GruLayer::create(store, "gru", 3, 2, true, rng);
    const Tensor x = random_tensor({4, 3}, rng), w = random_tensor({4, 4}, rng, false);
    return finite_difference_error([&] { return sum(mul(gru_forward(l, x), w)); }, with_params({x}, store));
  });
  layer("attention", [](Rng& rng) {
    const Tensor x = random_tensor({4, 3}, rng), w = random_tensor({4, 3}, rng, false);
    const std::vector<bool> keys = {true, true, false, true};
    return finite_difference_error([&] { return sum(mul(dot_product_attention(x, keys, false), w)); }, {x});
  });
  layer("causal self-attention", [](Rng& rng) {
    const Tensor x = random_tensor({4, 3}, rng), w = random_tensor({4, 3}, rng, false);
    const std::vector<bool> keys(4, true);
    return finite_difference_error([&] { return sum(mul(dot_product_attention(x, keys, true), w)); }, {x});
  });
  layer("weighted-avg attention", [](Rng& rng) {
    ParameterStore store;
    const WeightedAvgAttention a = WeightedAvgAttention::create(store, "wa", 3, rng);
    const Tensor e = random_tensor({4, 3}, rng), w = random_tensor({4, 3}, rng, false);
    return finite_difference_error([&] { return sum(mul(weighted_avg_attend(a, e), w)); }, with_params({e}, store));
  });
  layer("char cnn", [](Rng& rng) {
    ParameterStore store;
    const CharCnn cnn = CharCnn::create(store, "cnn", 3, 2, rng);
    const CharEmbeddingTable table(3, rng.below(1000));
    const std::vector<std::string> tokens = {"cat", "é", "sat", "on"};
    const Tensor w = random_tensor({4, 2}, rng, false);
    return finite_difference_error([&] { return sum(mul(char_cnn_forward(cnn, tokens, table), w)); },
                                   store.tensors());
  });
  layer("embedding combiner", [](Rng& rng) {
    ParameterStore store;
    const EmbeddingCombiner c = EmbeddingCombiner::create(store, "emb", 4, 3, 2, rng);
    const CharEmbeddingTable table(3, rng.below(1000));
    const Tensor e = random_tensor({4, 4}, rng), w = random_tensor({4, 6}, rng, false);
    const std::vector<std::string> tokens = {"the", "cat", "é", "sat"};
    return finite_difference_error([&] { return sum(mul(combine_embeddings(c, e, tokens, table), w)); },
                                   with_params({e}, store));
  });
  layer("squad-out head", [](Rng& rng) {
    ParameterStore store;
    const SquadOutHead h = SquadOutHead::create(store, "out", 4, rng);
    const Tensor x = random_tensor({5, 4}, rng);
    const std::vector<bool> mask = {false, true, true, true, false};
    return finite_difference_error([&] { return span_loss(albert_squad_out(h, x, mask), 1, 3); },
                                   with_params({x}, store));
  });
  layer("bidaf-out head", [](Rng& rng) {
    ParameterStore store;
    const BidafOutHead h = BidafOutHead::create(store, "bidaf", 3, 4, rng);
    const Tensor att = random_tensor({5, 3}, rng), dec = random_tensor({5, 4}, rng);
    const std::vector<bool> mask = {false, true, true, true, false};
    return finite_difference_error([&] { return span_loss(bidaf_out(h, att, dec, mask), 2, 3); },
                                   with_params({att, dec}, store));
  });

  for (Architecture arch : all_architectures()) {
    cases.push_back({"model " + std::string(architecture_tag(arch)), kGradStackTol, [arch](std::uint64_t seed) {
                       const GoldenFixture obama = obama_fixture();
                       const Feature f =
                           chunk_context(obama.example, obama.context, obama.config, obama.question_tokens)[0];
                       ModelConfig cfg = ModelConfig::for_architecture(arch);
                       cfg.d_model = 4;
                       cfg.hidden = 2;
                       cfg.d_char = 2;
                       cfg.d_char_out = 2;
                       cfg.dropout_rate = 0.0;
                       const QaModel model = QaModel::build(cfg, seed);
                       const EmbeddingMatrix emb = pseudo_embed(f, 4, seed);
                       return finite_difference_error(
                           [&] { return span_loss(model.forward(f, emb), f.start_position, f.end_position); },
                           model.parameters().tensors());
                     }});
  }
  return cases;
}

Outcome gradient_suite() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst_op = 0.0, worst_stack = 0.0;
  const std::vector<GradCase> cases = grad_cases();
  for (const GradCase& c : cases) {
    for (std::uint64_t seed : kGradSeeds) {
      const double err = c.run(seed);
      (c.tol == kGradOpTol ? worst_op : worst_stack) = std::max(c.tol == kGradOpTol ? worst_op : worst_stack, err);
      if (!(err < c.tol)) o.fail(c.name + " seed " + std::to_string(seed) + " error " + fmt("%.3g", err));
    }
  }
  const double s = seconds_since(t0);
  if (s >= kGradSeconds) o.fail("took " + fmt("%.1f s", s));
  if (o.pass) {
    o.detail = std::to_string(cases.size()) + " cases x 5 seeds, worst op " + fmt("%.2g", worst_op) +
               ", worst layer/stack " + fmt("%.2g", worst_stack) + ", " + fmt("%.1f s", s);
  }
  return o;
}

// ---- 5: masking suite ----
Outcome masking_suite() {
  Outcome o;
  Rng rng(505);
  std::size_t spans_checked = 0;
  double worst_prob = 0.0;
  for (int trial = 0; trial < kMaskFeatures; ++trial) {
    auto [f, text] = packed(rng.below(4), 1 + rng.below(12));
    // Knock out a random subset of context positions as well.
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f.context_mask[i] && rng.below(4) == 0) f.context_mask[i] = false;
    }
    FeatureLogits l{f.qid, 0, {}, {}};
    for (std::size_t i = 0; i < f.size(); ++i) {
      l.start.push_back(rng.uniform(-5, 5));
      l.end.push_back(rng.uniform(-5, 5));
    }
    DecodeOptions opts;
    opts.n_best = 2 + rng.below(20);
    opts.max_answer_length = 1 + rng.below(8);
    for (const AnswerCandidate& c : decode_spans(l, f, text, opts)) {
      if (c.is_null()) continue;
      ++spans_checked;
      if (!f.context_mask[*c.start_token] || !f.context_mask[*c.end_token]) {
        o.fail("trial " + std::to_string(trial) + " decoded a span outside the context");
      }
    }

    ParameterStore store;
    const std::size_t d = 3;
    const SquadOutHead sq = SquadOutHead::create(store, "sq", d, rng);
    const BidafOutHead bd = BidafOutHead::create(store, "bd", d, d, rng);
    const Tensor x = random_tensor({f.size(), d}, rng, false, -3, 3);
    const Tensor y = random_tensor({f.size(), d}, rng, false, -3, 3);
    NoGradGuard guard;
    for (const SpanLogits& out : {albert_squad_out(sq, x, f.context_mask), bidaf_out(bd, x, y, f.context_mask)}) {
      for (const Tensor* t : {&out.start, &out.end}) {
        const Tensor p = softmax(*t, 0);
        for (std::size_t i = 1; i < f.size(); ++i) {
          if (f.context_mask[i]) continue;
          worst_prob = std::max(worst_prob, p.at(i));
          if (!(p.at(i) < kMaskedProbTol)) o.fail("masked position " + std::to_string(i) + " has probability " +
                                                  fmt("%.3g", p.at(i)));
        }
      }
    }
  }
  if (o.pass) {
    o.detail = std::to_string(spans_checked) + " spans inside context, max masked probability " +
               fmt("%.3g", worst_prob);
  }
  return o;
}

// ---- 6: decode oracle ----
Outcome decode_oracle() {
  Outcome o;
  Rng rng(606);
  int mismatches = 0;
  for (int trial = 0; trial < kDecodeInstances; ++trial) {
    const std::size_t q = rng.below(3);
    const std::size_t c = 1 + rng.below(kDecodeMaxSeq - q - 3 + 1);
    auto [f, text] = packed(q, c);
    const bool integer = trial % 2 == 0;
    FeatureLogits l{f.qid, 0, {}, {}};
    for (std::size_t i = 0; i < f.size(); ++i) {
      l.start.push_back(integer ? static_cast<double>(rng.below(4)) : rng.uniform(-3, 3));
      l.end.push_back(integer ? static_cast<double>(rng.below(4)) : rng.uniform(-3, 3));
    }
    DecodeOptions opts;
    opts.n_best = 2 + rng.below(8);
    opts.max_answer_length = 1 + rng.below(5);
    const auto got = decode_spans(l, f, text, opts);
    const auto want = oracle::decode(l.start, l.end, f.context_mask, opts.n_best, opts.max_answer_length);
    bool ok = got.size() == want.size();
    for (std::size_t i = 0; ok && i < got.size(); ++i) {
      ok = got[i].start_token == want[i].start && got[i].end_token == want[i].end && got[i].score == want[i].score;
    }
    if (!ok) ++mismatches;
  }
  if (mismatches > 0) o.fail(std::to_string(mismatches) + " mismatches");
  if (o.pass) o.detail = std::to_string(kDecodeInstances) + " instances, 0 mismatches";
  return o;
}

// ---- 7: ensemble oracles ----
struct VoteKey {
  bool null = true;
  std::size_t feature = 0, start = 0, end = 0;
  bool operator==(const VoteKey&) const = default;
};

QuestionPrediction ballot(const std::string& qid, const VoteKey& k) {
  QuestionPrediction p;
  p.qid = qid;
  p.answer.qid = qid;
  if (!k.null) {
    p.answer.feature_index = k.feature;
    p.answer.start_token = k.start;
    p.answer.end_token = k.end;
    p.answer.text = "s" + std::to_string(k.start) + "e" + std::to_string(k.end) + "f" + std::to_string(k.feature);
  }
  p.nbest = {p.answer};
  return p;
}

VoteKey key_of(const AnswerCandidate& c) {
  if (c.is_null()) return {};
  return {false, c.feature_index, *c.start_token, *c.end_token};
}

Outcome ensemble_oracles() {
  Outcome o;
  Rng rng(707);
  const std::vector<VoteKey> pool = {{}, {false, 0, 1, 1}, {false, 0, 1, 2}, {false, 0, 2, 2}, {false, 1, 1, 1},
                                     {false, 1, 0, 3}};
  int voting_mismatches = 0;
  for (int trial = 0; trial < kVotingCases; ++trial) {
    const std::size_t models = 3 + rng.below(3);
    std::vector<PredictionSet> sets;
    std::vector<oracle::Ballot> ballots;
    for (std::size_t m = 0; m < models; ++m) {
      const double w = trial % 3 == 0 ? static_cast<double>(1 + rng.below(3)) : rng.uniform(50, 90);
      const VoteKey k = pool[rng.below(pool.size())];
      sets.push_back(make_prediction_set("m" + std::to_string(m), {ballot("q", k)}, w));
      ballots.push_back({k.null, k.feature, k.start, k.end, w});
    }
    const oracle::Winner want = oracle::tally(ballots);
    const auto got = weighted_voting(sets);
    const VoteKey want_key = want.null ? VoteKey{} : VoteKey{false, want.feature, want.start, want.end};
    if (!(key_of(got.at(0).answer) == want_key) || std::abs(got[0].answer.score - want.total) > 1e-9) {
      ++voting_mismatches;
    }
  }
  if (voting_mismatches > 0) o.fail(std::to_string(voting_mismatches) + " voting mismatches");

  int mean_mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto [f, text] = packed(1 + rng.below(3), 1 + rng.below(10));
    FeatureLogits l{f.qid, 0, {}, {}};
    for (std::size_t i = 0; i < f.size(); ++i) {
      l.start.push_back(rng.uniform(-3, 3));
      l.end.push_back(rng.uniform(-3, 3));
    }
    const std::vector<Feature> features = {f};
    const std::map<std::string, std::string> ctx = {{f.qid, text}};
    const auto alone = predictions_from_logits(std::vector<FeatureLogits>{l}, features, ctx, {});
    const std::size_t k = 2 + rng.below(4);
    const auto ens = predictions_from_logits(mean_logits(std::vector<LogitsDump>(k, LogitsDump{{l}})), features, ctx, {});
    bool same = ens[0].answer.text == alone[0].answer.text && ens[0].nbest.size() == alone[0].nbest.size();
    for (std::size_t r = 0; same && r < ens[0].nbest.size(); ++r) {
      same = key_of(ens[0].nbest[r]) == key_of(alone[0].nbest[r]);
    }
    if (!same) ++mean_mismatches;
  }
  if (mean_mismatches > 0) o.fail(std::to_string(mean_mismatches) + " mean-logits mismatches");

  // Two models for X, two for Y with equal totals; the fifth decides.
  const VoteKey x{false, 0, 3, 4}, y{false, 0, 7, 7};
  bool split_ok = true;
  for (const VoteKey& fifth : {x, y}) {
    const std::vector<PredictionSet> sets = {
        make_prediction_set("a", {ballot("q", x)}, 85), make_prediction_set("b", {ballot("q", y)}, 85),
        make_prediction_set("c", {ballot("q", y)}, 80), make_prediction_set("d", {ballot("q", x)}, 80),
        make_prediction_set("e", {ballot("q", fifth)}, 70)};
    split_ok = split_ok && key_of(weighted_voting(sets)[0].answer) == fifth;
  }
  if (!split_ok) o.fail("2-2 split not resolved by the fifth voter");
  if (o.pass) {
    o.detail = std::to_string(kVotingCases) + " voting cases, 200 mean-logits cases, split case resolved";
  }
  return o;
}

// ---- 8: overfit ----
Outcome overfit_check() {
  Outcome o;
  SyntheticOptions so;
  so.examples = kOverfitExamples;
  so.seed = 808;
  const SyntheticCorpus corpus = make_synthetic_corpus(so);
  Hyperparams hp;
  hp.seed = 1;
  const std::vector<Feature> features = preprocess_examples(corpus.examples, corpus.vocab, hp.preprocess_config());
  std::map<std::string, std::string> contexts;
  for (const RawExample& ex : corpus.examples) contexts[ex.qid] = ex.context;
  const PseudoEmbedder provider(kOverfitDModel, 7);
  std::string summary;
  for (Architecture arch : all_architectures()) {
    ModelConfig cfg = ModelConfig::for_architecture(arch);
    cfg.d_model = kOverfitDModel;
    QaModel model = QaModel::build(cfg, 1);
    Trainer trainer(model, provider, hp);
    const auto t0 = Clock::now();
    double em = 0.0;
    std::size_t epoch = 0;
    while (epoch < kOverfitMaxEpochs && seconds_since(t0) < kOverfitSeconds) {
      trainer.run_epoch(features);
      ++epoch;
      if (epoch % 5 == 0 || epoch == kOverfitMaxEpochs) {
        em = evaluate(predict(model, features, provider, contexts, {}).predictions, corpus.examples).em;
        if (em >= kOverfitEm) break;
      }
    }
    const double s = seconds_since(t0);
    const std::string tag(architecture_tag(arch));
    if (em < kOverfitEm || s > kOverfitSeconds) {
      o.fail(tag + " reached EM " + fmt("%.1f", em) + " after " + std::to_string(epoch) + " epochs, " +
             fmt("%.1f s", s));
    }
    summary += (summary.empty() ? "" : "; ") + tag + " EM " + fmt("%.0f", em) + " @" + std::to_string(epoch) +
               " ep " + fmt("%.1fs", s);
  }
  if (o.pass) o.detail = summary;
  return o;
}

// ---- 9: determinism ----
// Runs one command with its console output captured; returns the stderr text on failure.
std::optional<std::string> quiet_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = cli_dispatch(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  if (code == kExitOk) return std::nullopt;
  return err.str();
}

Outcome determinism() {
  Outcome o;
  testing::TempDir dir;
  const std::vector<std::string> files = {"features.jsonl", "model/checkpoint.json", "model/loss.csv", "pred.jsonl",
                                          "pred.logits", "report.json"};
  std::vector<std::string> contents[2];
  for (int run = 0; run < 2; ++run) {
    const std::string root = dir.file("run" + std::to_string(run));
    const std::vector<std::vector<std::string>> steps = {
        {"--seed", "9", "synth", "--output-dir", root, "--examples", "20"},
        {"--seed", "9", "--threads", "2", "preprocess", "--data", root + "/data.json", "--vocab", root + "/vocab.txt",
         "--max-seq-length", "64", "--doc-stride", "16", "--output", root + "/features.jsonl"},
        {"--seed", "9", "train", "--features", root + "/features.jsonl", "--architecture",
         "gru_attn_selfattn_gru_bidaf", "--output-dir", root + "/model", "--epochs", "2", "--d-model", "16",
         "--hidden", "8"},
        {"--seed", "9", "--threads", "2", "predict", "--checkpoint", root + "/model/checkpoint.json", "--features",
         root + "/features.jsonl", "--data", root + "/data.json", "--output", root + "/pred.jsonl", "--logits-out",
         root + "/pred.logits"},
        {"evaluate", "--pred", root + "/pred.jsonl", "--gold", root + "/data.json", "--output", root + "/report.json"}};
    for (const auto& step : steps) {
      if (const auto err = quiet_cli(step)) {
        o.fail("step " + step[step[0] == "--seed" ? 2 : 0] + " failed: " + *err);
        return o;
      }
    }
    for (const std::string& name : files) contents[run].push_back(read_file(root + "/" + name));
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (contents[0][i] != contents[1][i]) o.fail(files[i] + " differs between runs");
  }
  if (o.pass) o.detail = std::to_string(files.size()) + " artifacts byte-identical across two runs";
  return o;
}

// ---- 10: scorer vs brute force ----
Outcome scorer_oracle() {
  Outcome o;
  const std::vector<std::string> words = {"the", "a",  "an",    "cat",     "Cat", "dog", "Einstein", "albert",
                                          "sat", "on", "mat",   "THE",     "x",   "An",  "theory",   "another"};
  const std::vector<std::string> punct = {"", "", "", ".", ",", "!", "'s", "-", "?", "\""};
  Rng rng(1010);
  auto phrase = [&] {
    std::string out;
    const std::size_t n = rng.below(7);
    for (std::size_t i = 0; i < n; ++i) {
      out += std::string(rng.below(3) == 0 ? "  " : " ") + words[rng.below(words.size())] + punct[rng.below(punct.size())];
    }
    return out;
  };
  double worst = 0.0;
  int em_mismatches = 0;
  for (int trial = 0; trial < kScorerPairs; ++trial) {
    const std::string pred = phrase();
    std::vector<std::string> golds;
    const std::size_t n = trial % 10 == 0 ? 0 : 1 + rng.below(3);
    for (std::size_t g = 0; g < n; ++g) golds.push_back(phrase());
    worst = std::max(worst, std::abs(compute_f1(pred, golds) - oracle::f1(pred, golds)));
    if (compute_em(pred, golds) != oracle::em(pred, golds)) ++em_mismatches;
  }
  if (!(worst <= kScorerTol)) o.fail("max F1 difference " + fmt("%.3g", worst));
  if (em_mismatches > 0) o.fail(std::to_string(em_mismatches) + " EM mismatches");
  if (o.pass) o.detail = std::to_string(kScorerPairs) + " pairs, max F1 difference " + fmt("%.3g", worst);
  return o;
}

}  // namespace
}  // namespace squadlab

int main() {
  using namespace squadlab;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"obama golden", obama_golden},
      {"jay chunking golden", jay_golden},
      {"einstein scorer golden", einstein_golden},
      {"gradient suite", gradient_suite},
      {"masking suite", masking_suite},
      {"decode oracle", decode_oracle},
      {"ensemble oracles", ensemble_oracles},
      {"overfit check", overfit_check},
      {"determinism", determinism},
      {"scorer oracle", scorer_oracle},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
