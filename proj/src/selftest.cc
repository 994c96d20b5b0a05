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

#include "squadlab/selftest.h"

#include <cmath>
#include <functional>
#include <sstream>

#include "squadlab/evaluator.h"
#include "squadlab/fixtures.h"
#include "squadlab/gradcheck.h"
#include "squadlab/heads.h"

namespace squadlab {
namespace {

constexpr double kStackTolerance = 1e-4;

Tensor random_input(Shape shape, Rng& rng) {
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor(std::move(shape), std::move(v), true);
}

// Random fixed projection to a scalar, so every output element matters.
std::function<Tensor(const Tensor&)> projector(const Shape& shape, Rng& rng) {
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  Tensor r(shape, std::move(v));
  return [r](const Tensor& y) { return sum(mul(y, r)); };
}

std::vector<std::pair<std::string, Tensor>> with_params(const ParameterStore& store,
                                                        std::vector<std::pair<std::string, Tensor>> extra) {
  for (const auto& e : store.entries()) extra.emplace_back(e.name, e.tensor);
  return extra;
}

SelftestCheck grad_check(const std::string& name, const std::function<Tensor()>& loss,
                         const std::vector<std::pair<std::string, Tensor>>& inputs) {
  const GradCheckResult r = gradient_check(loss, inputs);
  std::ostringstream detail;
  detail << "max relative error " << r.max_relative_error << " (" << r.worst_input << ")";
  return {name, r.max_relative_error < kStackTolerance, detail.str()};
}

std::vector<bool> feature_mask(std::size_t seq, std::size_t first_context) {
  std::vector<bool> m(seq, false);
  for (std::size_t i = first_context; i < seq; ++i) m[i] = true;
  return m;
}

}  // namespace

std::vector<SelftestCheck> run_selftest(std::uint64_t seed) {
  std::vector<SelftestCheck> checks;
  Rng rng(seed);
  const std::size_t seq = 5;
  const std::size_t d = 4;
  const std::size_t h = 3;

  {
    ParameterStore store;
    const HighwayLayer layer = HighwayLayer::create(store, "highway", d, rng);
    const Tensor x = random_input({seq, d}, rng);
    auto proj = projector({seq, d}, rng);
    checks.push_back(grad_check("gradient: highway", [&] { return proj(highway_forward(layer, x)); },
                                with_params(store, {{"x", x}})));
  }
  {
    ParameterStore store;
    const BiLstm layer = BiLstm::create(store, "bilstm", d, h, rng);
    const Tensor x = random_input({seq, d}, rng);
    auto proj = projector({seq, 2 * h}, rng);
    checks.push_back(grad_check("gradient: bilstm", [&] { return proj(bilstm_forward(layer, x)); },
                                with_params(store, {{"x", x}})));
  }
  {
    ParameterStore store;
    const GruLayer layer = GruLayer::create(store, "gru", d, h, true, rng);
    const Tensor x = random_input({seq, d}, rng);
    auto proj = projector({seq, 2 * h}, rng);
    checks.push_back(grad_check("gradient: bigru", [&] { return proj(gru_forward(layer, x)); },
                                with_params(store, {{"x", x}})));
  }
  {
    const Tensor x = random_input({seq, d}, rng);
    auto proj = projector({seq, d}, rng);
    std::vector<bool> keys(seq, true);
    keys[seq - 1] = false;
    checks.push_back(grad_check("gradient: attention", [&] { return proj(dot_product_attention(x, keys, false)); },
                                {{"x", x}}));
    checks.push_back(grad_check("gradient: causal self-attention",
                                [&] { return proj(dot_product_attention(x, keys, true)); }, {{"x", x}}));
  }
  {
    ParameterStore store;
    const EmbeddingCombiner combiner = EmbeddingCombiner::create(store, "embedding", d, 3, 2, rng);
    const CharEmbeddingTable chars(3, seed);
    const std::vector<std::string> tokens = {"[CLS]", "ab", "c", "déf", "[SEP]"};
    const Tensor x = random_input({seq, d}, rng);
    auto proj = projector({seq, d + 2}, rng);
    checks.push_back(grad_check("gradient: embedding combiner",
                                [&] { return proj(combine_embeddings(combiner, x, tokens, chars)); },
                                with_params(store, {{"x", x}})));
  }
  {
    ParameterStore store;
    const SquadOutHead head = SquadOutHead::create(store, "head", d, rng);
    const Tensor x = random_input({seq, d}, rng);
    const std::vector<bool> mask = feature_mask(seq, 2);
    checks.push_back(grad_check("gradient: squad-out head + loss",
                                [&] { return span_loss(albert_squad_out(head, x, mask), 2, 3); },
                                with_params(store, {{"x", x}})));
  }
  {
    ParameterStore store;
    const BidafOutHead head = BidafOutHead::create(store, "head", d, h, rng);
    const Tensor att = random_input({seq, d}, rng);
    const Tensor dec = random_input({seq, h}, rng);
    const std::vector<bool> mask = feature_mask(seq, 2);
    checks.push_back(grad_check("gradient: bidaf-out head + loss",
                                [&] { return span_loss(bidaf_out(head, att, dec, mask), 3, 4); },
                                with_params(store, {{"att", att}, {"dec", dec}})));
  }

  {
    const GoldenFixture f = obama_fixture();
    const std::vector<std::string> tokens = {"O", "ba", "ma", "was", "born", "in", "Au", "gust."};
    const std::vector<CharSpan> spans = {{0, 5}, {0, 5}, {0, 5}, {6, 9}, {10, 14}, {15, 17}, {18, 24}, {18, 24}};
    const auto aligned = align_answer_to_tokens(f.context, {18, 24});
    const std::string text = span_to_text(f.context, 6, 6, f.example.context);
    const bool ok = f.context.tokens == tokens && f.context.spans == spans && aligned.first == 6 &&
                    aligned.second == 7 && text == "August";
    checks.push_back({"golden: token relabeling", ok, "span (6,6) decodes to \"" + text + "\""});
  }
  {
    const GoldenFixture f = jay_fixture();
    const std::vector<Feature> features = chunk_context(f.example, f.context, f.config, f.question_tokens);
    bool ok = features.size() >= 2 && features[0].has_answer();
    std::string first;
    if (ok) {
      first = span_to_text(features[0].token_word_span, features[0].start_position, features[0].end_position,
                           f.example.context);
      ok = first == "12";
      for (std::size_t i = 1; i < features.size(); ++i) ok = ok && !features[i].has_answer();
    }
    checks.push_back({"golden: long-context chunking", ok,
                      std::to_string(features.size()) + " chunks, first answer \"" + first + "\""});
  }
  {
    const std::vector<std::string> gold = {"Albert Einstein"};
    const double f1 = compute_f1("Einstein", gold);
    const EvalReport report = evaluate(einstein_predictions(), einstein_corpus());
    const bool ok = std::abs(f1 - 2.0 / 3.0) < 1e-4 && compute_em("Einstein", gold) == 0 &&
                    compute_em("Albert Einstein", gold) == 1 && report.em == 50.0;
    std::ostringstream detail;
    detail << "F1 " << f1 << ", corpus EM " << report.em;
    checks.push_back({"golden: EM/F1 examples", ok, detail.str()});
  }
  return checks;
}

}  // namespace squadlab
