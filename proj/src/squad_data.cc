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

#include "squadlab/squad_data.h"

#include <algorithm>
#include <sstream>

#include "squadlab/errors.h"
#include "squadlab/io.h"
#include "squadlab/parallel.h"
#include "squadlab/text.h"

namespace squadlab {

using nlohmann::json;
using nlohmann::ordered_json;

void PreprocessConfig::validate() const {
  if (doc_stride == 0 || doc_stride >= max_seq_length) {
    throw DataError("invalid preprocess config: need 0 < doc_stride (" + std::to_string(doc_stride) +
                    ") < max_seq_length (" + std::to_string(max_seq_length) + ")");
  }
}

std::pair<std::size_t, std::size_t> align_answer_to_tokens(const TokenizedContext& ctx,
                                                           CharSpan answer) {
  if (ctx.tokens.size() != ctx.spans.size()) {
    throw DataError("tokenized context has " + std::to_string(ctx.tokens.size()) + " tokens but " +
                    std::to_string(ctx.spans.size()) + " spans");
  }
  std::optional<std::size_t> first, last;
  if (answer.end > answer.start) {
    for (std::size_t i = 0; i < ctx.spans.size(); ++i) {
      const CharSpan& s = ctx.spans[i];
      if (s.end > answer.start && s.start < answer.end) {
        if (!first) first = i;
        last = i;
      }
    }
  }
  if (!first) {
    std::ostringstream os;
    os << "answer span [" << answer.start << ", " << answer.end << ") overlaps no token";
    // Name the closest token on each side of the answer.
    std::optional<std::size_t> before, after;
    for (std::size_t i = 0; i < ctx.spans.size(); ++i) {
      if (ctx.spans[i].end <= answer.start) before = i;
      if (!after && ctx.spans[i].start >= answer.end) after = i;
    }
    if (before || after) os << "; nearest tokens:";
    for (const auto& i : {before, after}) {
      if (i) os << " #" << *i << " '" << ctx.tokens[*i] << "' [" << ctx.spans[*i].start << ", " << ctx.spans[*i].end << ")";
    }
    throw DataError(os.str());
  }
  return {*first, *last};
}

std::string span_to_text(std::span<const CharSpan> spans, std::size_t start_token,
                         std::size_t end_token, std::string_view context_text) {
  if (start_token > end_token || end_token >= spans.size()) {
    throw DataError("token range (" + std::to_string(start_token) + ", " + std::to_string(end_token) +
                    ") invalid for " + std::to_string(spans.size()) + " tokens");
  }
  return substr_codepoints(context_text, spans[start_token].start, spans[end_token].end);
}

std::string span_to_text(const TokenizedContext& ctx, std::size_t start_token, std::size_t end_token,
                         std::string_view context_text) {
  return span_to_text(std::span<const CharSpan>(ctx.spans), start_token, end_token, context_text);
}

std::vector<Feature> chunk_context(const RawExample& example, const TokenizedContext& ctx,
                                   const PreprocessConfig& cfg,
                                   const std::vector<std::string>& question_tokens) {
  cfg.validate();
  const std::size_t overhead = question_tokens.size() + 3;
  if (overhead >= cfg.max_seq_length) {
    throw DataError("question " + example.qid + " has " + std::to_string(question_tokens.size()) +
                    " tokens; with separators it does not fit max_seq_length " +
                    std::to_string(cfg.max_seq_length));
  }
  if (ctx.tokens.size() != ctx.spans.size()) {
    throw DataError("context of " + example.qid + " has mismatched tokens and spans");
  }
  const std::size_t capacity = cfg.max_seq_length - overhead;
  const std::size_t n = ctx.tokens.size();

  std::optional<std::pair<std::size_t, std::size_t>> gold;
  if (!example.is_impossible) {
    if (example.answers.empty()) throw DataError("answerable question " + example.qid + " has no answers");
    const Answer& a = example.answers.front();
    gold = align_answer_to_tokens(ctx, {a.start, a.start + codepoint_count(a.text)});
  }

  std::vector<std::pair<std::size_t, std::size_t>> windows;
  for (std::size_t start = 0;;) {
    const std::size_t end = std::min(start + capacity, n);
    windows.emplace_back(start, end);
    if (end >= n) break;
    start += std::min(cfg.doc_stride, capacity);
  }

  std::optional<std::size_t> gold_window;
  if (gold) {
    double best = -1.0;
    for (std::size_t w = 0; w < windows.size(); ++w) {
      const auto [ws, we] = windows[w];
      if (gold->first < ws || gold->second >= we) continue;
      const double score = static_cast<double>(std::min(gold->first - ws, we - 1 - gold->second)) +
                           0.01 * static_cast<double>(we - ws);
      if (score > best) {
        best = score;
        gold_window = w;
      }
    }
  }

  std::vector<Feature> features;
  const std::size_t offset = question_tokens.size() + 2;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const auto [ws, we] = windows[w];
    Feature f;
    f.qid = example.qid;
    f.feature_index = w;
    f.tokens.emplace_back(kSentinelToken);
    f.tokens.insert(f.tokens.end(), question_tokens.begin(), question_tokens.end());
    f.tokens.emplace_back(kSeparatorToken);
    f.tokens.insert(f.tokens.end(), ctx.tokens.begin() + static_cast<std::ptrdiff_t>(ws),
                    ctx.tokens.begin() + static_cast<std::ptrdiff_t>(we));
    f.tokens.emplace_back(kSeparatorToken);
    f.context_mask.assign(f.tokens.size(), false);
    f.token_word_span.assign(f.tokens.size(), CharSpan{});
    for (std::size_t i = ws; i < we; ++i) {
      f.context_mask[offset + i - ws] = true;
      f.token_word_span[offset + i - ws] = ctx.spans[i];
    }
    if (gold_window && *gold_window == w) {
      f.start_position = offset + gold->first - ws;
      f.end_position = offset + gold->second - ws;
    }
    features.push_back(std::move(f));
  }
  return features;
}

namespace {

bool is_trailing_punct(const std::string& cp) {
  return cp.size() == 1 && std::string_view(".,;:!?").find(cp[0]) != std::string_view::npos;
}

}  // namespace

TokenizedContext toy_tokenize(std::string_view text, const std::unordered_set<std::string>& vocab) {
  std::size_t max_piece = 1;
  for (const auto& v : vocab) max_piece = std::max(max_piece, codepoint_count(v));
  const std::vector<std::string> chars = split_codepoints(text);
  TokenizedContext out;
  std::size_t i = 0;
  while (i < chars.size()) {
    if (chars[i].size() == 1 && is_ascii_space(static_cast<unsigned char>(chars[i][0]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < chars.size() && !(chars[j].size() == 1 && is_ascii_space(static_cast<unsigned char>(chars[j][0])))) ++j;
    std::size_t span_end = j;
    while (span_end > i + 1 && is_trailing_punct(chars[span_end - 1])) --span_end;
    bool all_punct = true;
    for (std::size_t k = i; k < j; ++k) all_punct = all_punct && is_trailing_punct(chars[k]);
    const CharSpan span{i, all_punct ? j : span_end};

    std::size_t p = i;
    while (p < j) {
      std::size_t take = 1;
      std::string piece = chars[p];
      std::string candidate;
      for (std::size_t len = 1; len <= max_piece && p + len <= j; ++len) {
        candidate += chars[p + len - 1];
        if (vocab.count(candidate)) {
          take = len;
          piece = candidate;
        }
      }
      out.tokens.push_back(piece);
      out.spans.push_back(span);
      p += take;
    }
    i = j;
  }
  return out;
}

std::unordered_set<std::string> load_vocab(const std::string& path) {
  std::istringstream in(read_file(path));
  std::unordered_set<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) vocab.insert(line);
  }
  return vocab;
}

std::vector<Feature> preprocess_examples(const std::vector<RawExample>& examples,
                                         const std::unordered_set<std::string>& vocab,
                                         const PreprocessConfig& cfg, std::size_t threads) {
  std::vector<std::vector<Feature>> per_example(examples.size());
  parallel_for(examples.size(), threads, [&](std::size_t i) {
    const RawExample& ex = examples[i];
    const TokenizedContext ctx = toy_tokenize(ex.context, vocab);
    const std::vector<std::string> question = toy_tokenize(ex.question, vocab).tokens;
    per_example[i] = chunk_context(ex, ctx, cfg, question);
  });
  std::vector<Feature> out;
  for (auto& chunk : per_example) {
    for (Feature& f : chunk) out.push_back(std::move(f));
  }
  return out;
}

namespace {

const json& child(const json& node, const char* key, const std::string& path) {
  if (!node.is_object() || !node.contains(key)) throw DataError(path + ": missing field '" + key + "'");
  return node.at(key);
}

const json& typed(const json& node, json::value_t type, const std::string& path) {
  const bool ok = type == json::value_t::number_unsigned ? node.is_number_integer() && node.get<long long>() >= 0
                                                         : node.type() == type;
  if (!ok) throw DataError(path + ": unexpected type " + std::string(node.type_name()));
  return node;
}

}  // namespace

std::vector<RawExample> parse_squad_json(const json& root) {
  std::vector<RawExample> out;
  const json& data = typed(child(root, "data", "$"), json::value_t::array, "$.data");
  for (std::size_t a = 0; a < data.size(); ++a) {
    const std::string apath = "$.data[" + std::to_string(a) + "]";
    const json& paragraphs = typed(child(data[a], "paragraphs", apath), json::value_t::array, apath + ".paragraphs");
    for (std::size_t p = 0; p < paragraphs.size(); ++p) {
      const std::string ppath = apath + ".paragraphs[" + std::to_string(p) + "]";
      const std::string context =
          typed(child(paragraphs[p], "context", ppath), json::value_t::string, ppath + ".context").get<std::string>();
      const std::size_t context_len = codepoint_count(context);
      const json& qas = typed(child(paragraphs[p], "qas", ppath), json::value_t::array, ppath + ".qas");
      for (std::size_t q = 0; q < qas.size(); ++q) {
        const std::string qpath = ppath + ".qas[" + std::to_string(q) + "]";
        RawExample ex;
        ex.qid = typed(child(qas[q], "id", qpath), json::value_t::string, qpath + ".id").get<std::string>();
        ex.question = typed(child(qas[q], "question", qpath), json::value_t::string, qpath + ".question").get<std::string>();
        ex.context = context;
        const json& answers = typed(child(qas[q], "answers", qpath), json::value_t::array, qpath + ".answers");
        for (std::size_t k = 0; k < answers.size(); ++k) {
          const std::string kpath = qpath + ".answers[" + std::to_string(k) + "]";
          Answer ans;
          ans.text = typed(child(answers[k], "text", kpath), json::value_t::string, kpath + ".text").get<std::string>();
          ans.start = typed(child(answers[k], "answer_start", kpath), json::value_t::number_unsigned,
                            kpath + ".answer_start").get<std::size_t>();
          const std::size_t len = codepoint_count(ans.text);
          if (ans.start + len > context_len || substr_codepoints(context, ans.start, ans.start + len) != ans.text) {
            throw DataError(kpath + ": answer text does not match the context at answer_start " +
                            std::to_string(ans.start));
          }
          ex.answers.push_back(std::move(ans));
        }
        if (qas[q].contains("is_impossible")) {
          ex.is_impossible = typed(qas[q].at("is_impossible"), json::value_t::boolean, qpath + ".is_impossible").get<bool>();
        } else {
          ex.is_impossible = ex.answers.empty();
        }
        if (ex.is_impossible != ex.answers.empty()) {
          throw DataError(qpath + ": is_impossible must hold exactly when answers is empty");
        }
        out.push_back(std::move(ex));
      }
    }
  }
  return out;
}

std::vector<RawExample> load_squad_json(const std::string& path) {
  json root;
  try {
    root = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  try {
    return parse_squad_json(root);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

ordered_json squad_to_json(const std::vector<RawExample>& examples, const std::string& title) {
  ordered_json paragraphs = ordered_json::array();
  for (const RawExample& ex : examples) {
    if (paragraphs.empty() || paragraphs.back()["context"] != ex.context) {
      ordered_json p;
      p["context"] = ex.context;
      p["qas"] = ordered_json::array();
      paragraphs.push_back(std::move(p));
    }
    ordered_json qa;
    qa["id"] = ex.qid;
    qa["question"] = ex.question;
    qa["answers"] = ordered_json::array();
    for (const Answer& a : ex.answers) qa["answers"].push_back({{"text", a.text}, {"answer_start", a.start}});
    qa["is_impossible"] = ex.is_impossible;
    paragraphs.back()["qas"].push_back(std::move(qa));
  }
  ordered_json root;
  root["version"] = "v2.0";
  root["data"] = ordered_json::array({{{"title", title}, {"paragraphs", std::move(paragraphs)}}});
  return root;
}

std::vector<std::pair<std::string, PretokenizedRecord>> load_pretokenized(const std::string& path) {
  std::vector<std::pair<std::string, PretokenizedRecord>> out;
  const auto records = read_jsonl(path);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    try {
      PretokenizedRecord rec;
      rec.context.tokens = r.at("tokens").get<std::vector<std::string>>();
      for (const auto& s : r.at("spans")) {
        rec.context.spans.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()});
      }
      if (rec.context.spans.size() != rec.context.tokens.size()) {
        throw DataError("tokens and spans differ in length");
      }
      if (r.contains("question_tokens")) {
        rec.question_tokens = r.at("question_tokens").get<std::vector<std::string>>();
      }
      out.emplace_back(r.at("qid").get<std::string>(), std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ": record " + std::to_string(i) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path + ": record " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

ordered_json feature_to_json(const Feature& f) {
  ordered_json j;
  j["qid"] = f.qid;
  j["feature_index"] = f.feature_index;
  j["tokens"] = f.tokens;
  j["context_mask"] = f.context_mask;
  ordered_json spans = ordered_json::array();
  for (std::size_t i = 0; i < f.tokens.size(); ++i) {
    if (f.context_mask[i]) spans.push_back({f.token_word_span[i].start, f.token_word_span[i].end});
    else spans.push_back(nullptr);
  }
  j["token_word_span"] = std::move(spans);
  j["start_position"] = f.start_position;
  j["end_position"] = f.end_position;
  return j;
}

Feature feature_from_json(const ordered_json& j) {
  try {
    Feature f;
    f.qid = j.at("qid").get<std::string>();
    f.feature_index = j.at("feature_index").get<std::size_t>();
    f.tokens = j.at("tokens").get<std::vector<std::string>>();
    f.context_mask = j.at("context_mask").get<std::vector<bool>>();
    const auto& spans = j.at("token_word_span");
    if (f.context_mask.size() != f.tokens.size() || spans.size() != f.tokens.size()) {
      throw DataError("feature " + f.qid + "#" + std::to_string(f.feature_index) + " has inconsistent field lengths");
    }
    for (std::size_t i = 0; i < spans.size(); ++i) {
      if (spans[i].is_null()) f.token_word_span.push_back({});
      else f.token_word_span.push_back({spans[i].at(0).get<std::size_t>(), spans[i].at(1).get<std::size_t>()});
    }
    f.start_position = j.at("start_position").get<std::size_t>();
    f.end_position = j.at("end_position").get<std::size_t>();
    if (f.start_position > f.end_position || f.end_position >= f.tokens.size()) {
      throw DataError("feature " + f.qid + "#" + std::to_string(f.feature_index) + " has an invalid gold span");
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed feature record: ") + e.what());
  }
}

void write_features(const std::string& path, const std::vector<Feature>& features) {
  std::vector<ordered_json> records;
  records.reserve(features.size());
  for (const Feature& f : features) records.push_back(feature_to_json(f));
  write_jsonl(path, records);
}

std::vector<Feature> read_features(const std::string& path) {
  std::vector<Feature> out;
  for (const auto& r : read_jsonl(path)) out.push_back(feature_from_json(r));
  return out;
}

}  // namespace squadlab
