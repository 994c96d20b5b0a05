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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

namespace squadlab {

// Half-open character range [start, end) in code points.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const CharSpan&) const = default;
};

struct Answer {
  std::string text;
  std::size_t start = 0;  // code-point offset into the context
};

struct RawExample {
  std::string qid;
  std::string question;
  std::string context;
  std::vector<Answer> answers;
  bool is_impossible = false;
};

// Subword tokens of a context; each token carries the span of the word it
// belongs to, so all tokens of one word share a span.
struct TokenizedContext {
  std::vector<std::string> tokens;
  std::vector<CharSpan> spans;
};

struct PreprocessConfig {
  std::size_t max_seq_length = 384;
  // Number of context tokens between the starts of consecutive chunks.
  std::size_t doc_stride = 128;

  void validate() const;
};

inline constexpr std::size_t kNullPosition = 0;
inline constexpr std::string_view kSentinelToken = "[CLS]";
inline constexpr std::string_view kSeparatorToken = "[SEP]";

// Model-ready window: [CLS] question [SEP] context-chunk [SEP].
struct Feature {
  std::string qid;
  std::size_t feature_index = 0;
  std::vector<std::string> tokens;
  std::vector<bool> context_mask;
  // Meaningful only where context_mask is true.
  std::vector<CharSpan> token_word_span;
  std::size_t start_position = kNullPosition;
  std::size_t end_position = kNullPosition;

  bool has_answer() const { return start_position != kNullPosition; }
  std::size_t size() const { return tokens.size(); }
};

// Minimal token range whose word spans cover `answer`.
std::pair<std::size_t, std::size_t> align_answer_to_tokens(const TokenizedContext& ctx,
                                                           CharSpan answer);

std::string span_to_text(std::span<const CharSpan> spans, std::size_t start_token,
                         std::size_t end_token, std::string_view context_text);
std::string span_to_text(const TokenizedContext& ctx, std::size_t start_token,
                         std::size_t end_token, std::string_view context_text);

// Splits a long context into windows of at most max_seq_length tokens
// including the question and separators. Exactly one window of an
// answerable example carries the gold span: among windows that contain
// the whole answer, the one giving it the most surrounding context.
std::vector<Feature> chunk_context(const RawExample& example, const TokenizedContext& ctx,
                                   const PreprocessConfig& cfg,
                                   const std::vector<std::string>& question_tokens);

// Greedy longest-match subword tokenizer over a fixed vocabulary, used for
// fixtures and synthetic corpora. Words split on ASCII whitespace; a word's
// span excludes trailing sentence punctuation (. , ; : ! ?).
TokenizedContext toy_tokenize(std::string_view text, const std::unordered_set<std::string>& vocab);

std::unordered_set<std::string> load_vocab(const std::string& path);

// Tokenizes question and context with toy_tokenize and chunks each example.
std::vector<Feature> preprocess_examples(const std::vector<RawExample>& examples,
                                         const std::unordered_set<std::string>& vocab,
                                         const PreprocessConfig& cfg, std::size_t threads = 1);

std::vector<RawExample> parse_squad_json(const nlohmann::json& root);
std::vector<RawExample> load_squad_json(const std::string& path);
nlohmann::ordered_json squad_to_json(const std::vector<RawExample>& examples,
                                     const std::string& title = "squadlab");

// Pre-tokenized input record: {qid, tokens, spans, question_tokens?}.
struct PretokenizedRecord {
  TokenizedContext context;
  std::optional<std::vector<std::string>> question_tokens;
};
std::vector<std::pair<std::string, PretokenizedRecord>> load_pretokenized(const std::string& path);

nlohmann::ordered_json feature_to_json(const Feature& f);
Feature feature_from_json(const nlohmann::ordered_json& j);
void write_features(const std::string& path, const std::vector<Feature>& features);
std::vector<Feature> read_features(const std::string& path);

}  // namespace squadlab
