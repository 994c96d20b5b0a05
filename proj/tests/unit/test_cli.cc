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

#include <cstdlib>
#include <filesystem>

#include "gtest/gtest.h"
#include "squadlab/cli.h"
#include "squadlab/fixtures.h"
#include "squadlab/heads.h"
#include "squadlab/io.h"
#include "squadlab/squad_data.h"
#include "test_support.h"

namespace squadlab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  const int code = cli_dispatch(args);
  Result r;
  r.out = ::testing::internal::GetCapturedStdout();
  r.err = ::testing::internal::GetCapturedStderr();
  r.code = code;
  return r;
}

json without_wall_time(const std::string& path) {
  json j = json::parse(read_file(path));
  j.erase("wall_time_seconds");
  return j;
}

void write_einstein(const testing::TempDir& dir) {
  write_file(dir.file("gold.json"), squad_to_json(einstein_corpus()).dump());
  std::vector<QuestionPrediction> preds;
  for (const auto& [qid, text] : einstein_predictions()) {
    QuestionPrediction p;
    p.qid = qid;
    p.answer.qid = qid;
    p.answer.text = text;
    p.answer.start_token = 8;
    p.answer.end_token = 9;
    p.answer.score = 1.0;
    p.nbest = {p.answer};
    preds.push_back(p);
  }
  write_predictions(dir.file("pred.jsonl"), preds);
}

TEST(CliTest, EvaluateEinsteinPrintsFifty) {
  testing::TempDir dir;
  write_einstein(dir);
  const Result r = run({"evaluate", "--pred", dir.file("pred.jsonl"), "--gold", dir.file("gold.json"), "--output",
                        dir.file("report.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("EM=50.0"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("F1=83.3"), std::string::npos) << r.out;
  EXPECT_DOUBLE_EQ(json::parse(read_file(dir.file("report.json")))["em"].get<double>(), 50.0);
  EXPECT_TRUE(fs::exists(dir.file("report.json.manifest.json")));
}

TEST(CliTest, PreprocessJayFixture) {
  testing::TempDir dir;
  const GoldenFixture jay = jay_fixture();
  write_file(dir.file("jay.json"), squad_to_json({jay.example}).dump());
  json rec = {{"qid", "jay"}, {"tokens", jay.context.tokens}, {"question_tokens", jay.question_tokens}};
  rec["spans"] = json::array();
  for (const CharSpan& s : jay.context.spans) rec["spans"].push_back({s.start, s.end});
  write_file(dir.file("jay.tok.jsonl"), rec.dump() + "\n");

  const Result r = run({"preprocess", "--data", dir.file("jay.json"), "--pretokenized", dir.file("jay.tok.jsonl"),
                        "--max-seq-length", "13", "--doc-stride", "5", "--output", dir.file("jay.features.jsonl")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::vector<Feature> features = read_features(dir.file("jay.features.jsonl"));
  ASSERT_EQ(features.size(), 3u);
  EXPECT_TRUE(features[0].has_answer());
  EXPECT_EQ(span_to_text(features[0].token_word_span, features[0].start_position, features[0].end_position,
                         jay.example.context),
            "12");
  EXPECT_FALSE(features[1].has_answer());
  EXPECT_FALSE(features[2].has_answer());
  const std::vector<std::string> second = {"[CLS]", "▁how", "▁old", "▁is", "▁jay", "?", "[SEP]",
                                           ".",     "▁he",  "▁lives", "▁in", "▁flo", "[SEP]"};
  EXPECT_EQ(features[1].tokens, second);

  const json manifest = json::parse(read_file(dir.file("jay.features.jsonl.manifest.json")));
  EXPECT_EQ(manifest["command"], "preprocess");
  EXPECT_EQ(manifest["config"]["max_seq_length"], 13);
  EXPECT_EQ(manifest["inputs"]["pretokenized"], dir.file("jay.tok.jsonl"));

  // A budget smaller than the question plus separators is refused.
  const Result tiny = run({"preprocess", "--data", dir.file("jay.json"), "--pretokenized", dir.file("jay.tok.jsonl"),
                           "--max-seq-length", "5", "--doc-stride", "2", "--output", dir.file("tiny.jsonl")});
  EXPECT_EQ(tiny.code, kExitData);
  EXPECT_NE(tiny.err.find("max_seq_length"), std::string::npos) << tiny.err;
}

TEST(CliTest, ExitCodes) {
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"evaluate", "--pred", "x"}).code, kExitUsage);
  EXPECT_EQ(run({"evaluate", "--pred", "x", "--gold", "y", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_EQ(run({"evaluate", "--pred", "/nonexistent/p.jsonl", "--gold", "/nonexistent/g.json"}).code, kExitData);

  testing::TempDir dir;
  write_file(dir.file("broken.json"), "{\"data\": [{}]}");
  write_einstein(dir);
  const Result bad = run({"evaluate", "--pred", dir.file("pred.jsonl"), "--gold", dir.file("broken.json")});
  EXPECT_EQ(bad.code, kExitData);
  EXPECT_NE(bad.err.find("$.data[0]"), std::string::npos) << bad.err;
  EXPECT_EQ(run({"preprocess", "--data", dir.file("gold.json"), "--output", dir.file("f.jsonl")}).code, kExitUsage);
  EXPECT_EQ(run({"preprocess", "--data", dir.file("gold.json"), "--vocab", dir.file("v.txt"), "--max-seq-length",
                 "10", "--doc-stride", "10", "--output", dir.file("f.jsonl")})
                .code,
            kExitUsage);
  EXPECT_EQ(run({"ensemble", "--strategy", "majority", "--output", dir.file("e.jsonl")}).code, kExitUsage);
}

TEST(CliTest, SeedFromConfigFileAndEnvironment) {
  testing::TempDir dir;
  const std::string out = dir.path().string();
  ASSERT_EQ(run({"synth", "--output-dir", out + "/a", "--examples", "5"}).code, kExitOk);
  write_file(dir.file("run.ini"), "seed=42\n");
  ASSERT_EQ(run({"--config", dir.file("run.ini"), "synth", "--output-dir", out + "/b", "--examples", "5"}).code,
            kExitOk);
  EXPECT_EQ(json::parse(read_file(out + "/b/manifest.json"))["seed"], 42);
  ASSERT_EQ(run({"--config", dir.file("run.ini"), "--seed", "7", "synth", "--output-dir", out + "/c", "--examples",
                 "5"})
                .code,
            kExitOk);
  EXPECT_EQ(json::parse(read_file(out + "/c/manifest.json"))["seed"], 7);
  setenv("SQUADLAB_SEED", "42", 1);
  ASSERT_EQ(run({"synth", "--output-dir", out + "/d", "--examples", "5"}).code, kExitOk);
  unsetenv("SQUADLAB_SEED");
  EXPECT_EQ(json::parse(read_file(out + "/d/manifest.json"))["seed"], 42);
  EXPECT_EQ(read_file(out + "/b/data.json"), read_file(out + "/d/data.json"));
  EXPECT_NE(read_file(out + "/a/data.json"), read_file(out + "/b/data.json"));
}

TEST(CliTest, SelftestPasses) {
  const Result r = run({"selftest"});
  EXPECT_EQ(r.code, kExitOk) << r.out << r.err;
}

// synth -> preprocess -> pseudo-embed -> train x2 -> predict -> evaluate -> ensemble.
class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = dir_.path().string();
    ASSERT_EQ(run({"--seed", "3", "synth", "--output-dir", root_ + "/data", "--examples", "20"}).code, kExitOk);
    ASSERT_EQ(run({"--threads", "2", "preprocess", "--data", data(), "--vocab", root_ + "/data/vocab.txt",
                   "--max-seq-length", "64", "--doc-stride", "16", "--output", features()})
                  .code,
              kExitOk);
  }

  std::string data() const { return root_ + "/data/data.json"; }
  std::string features() const { return root_ + "/features.jsonl"; }

  Result train(const std::string& out, const std::string& arch, const std::string& seed,
               std::vector<std::string> extra = {}) {
    std::vector<std::string> args = {"--seed", seed, "train", "--features", features(), "--architecture", arch,
                                     "--output-dir", out, "--epochs", "3", "--d-model", "16", "--hidden", "8"};
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  }

  Result predict(const std::string& model_dir, const std::string& out, const std::string& weight) {
    return run({"--threads", "2", "predict", "--checkpoint", model_dir + "/checkpoint.json", "--features", features(),
                "--data", data(), "--output", out + ".jsonl", "--logits-out", out + ".logits", "--model-f1-weight",
                weight});
  }

  testing::TempDir dir_;
  std::string root_;
};

TEST_F(PipelineTest, EndToEndAndDeterminism) {
  const std::string m1 = root_ + "/m1", m2 = root_ + "/m2", again = root_ + "/m1again";
  ASSERT_EQ(train(m1, "gru_highway_gru_bidaf", "5").code, kExitOk);
  ASSERT_EQ(train(again, "gru_highway_gru_bidaf", "5").code, kExitOk);
  EXPECT_EQ(read_file(m1 + "/checkpoint.json"), read_file(again + "/checkpoint.json"));
  EXPECT_EQ(read_file(m1 + "/loss.csv"), read_file(again + "/loss.csv"));
  json ma = without_wall_time(m1 + "/manifest.json"), mb = without_wall_time(again + "/manifest.json");
  EXPECT_EQ(ma["config"], mb["config"]);
  EXPECT_EQ(ma["command"], "train");

  ASSERT_EQ(train(m2, "squad_out", "6", {"--learning-rate", "0.05"}).code, kExitOk);
  ASSERT_EQ(predict(m1, root_ + "/p1", "0.6").code, kExitOk);
  ASSERT_EQ(predict(m2, root_ + "/p2", "0.4").code, kExitOk);
  const std::string first = read_file(root_ + "/p1.jsonl");
  ASSERT_EQ(predict(m1, root_ + "/p1", "0.6").code, kExitOk);
  EXPECT_EQ(read_file(root_ + "/p1.jsonl"), first);
  EXPECT_TRUE(fs::exists(root_ + "/p1.jsonl.manifest.json"));

  const Result ev = run({"evaluate", "--pred", root_ + "/p1.jsonl", "--gold", data()});
  ASSERT_EQ(ev.code, kExitOk) << ev.err;
  EXPECT_NE(ev.out.find("EM="), std::string::npos);

  const std::vector<std::string> preds = {"--pred", root_ + "/p1.jsonl", "--pred", root_ + "/p2.jsonl"};
  const std::vector<std::string> logits = {"--logits", root_ + "/p1.logits", "--logits", root_ + "/p2.logits"};
  auto ensemble = [&](const std::string& strategy, std::vector<std::string> extra, const std::string& out) {
    std::vector<std::string> args = {"ensemble", "--strategy", strategy, "--output", out};
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  };
  std::vector<std::string> ml = logits;
  ml.insert(ml.end(), {"--features", features(), "--data", data()});
  ASSERT_EQ(ensemble("mean-logits", ml, root_ + "/ml.jsonl").code, kExitOk);
  ASSERT_EQ(ensemble("weighted-voting", preds, root_ + "/wv.jsonl").code, kExitOk);
  std::vector<std::string> wvml = preds;
  wvml.insert(wvml.end(), ml.begin(), ml.end());
  wvml.insert(wvml.end(), {"--mean-weight", "0.7"});
  ASSERT_EQ(ensemble("weighted-voting-mean-logits", wvml, root_ + "/wvml.jsonl").code, kExitOk);
  for (const char* name : {"/ml.jsonl", "/wv.jsonl", "/wvml.jsonl"}) {
    const Result r = run({"evaluate", "--pred", root_ + name, "--gold", data()});
    EXPECT_EQ(r.code, kExitOk) << name << r.err;
  }
  const std::string wv = read_file(root_ + "/wv.jsonl");
  ASSERT_EQ(ensemble("weighted-voting", preds, root_ + "/wv.jsonl").code, kExitOk);
  EXPECT_EQ(read_file(root_ + "/wv.jsonl"), wv);

  // Weighted voting with weights taken from the files must equal explicit weights.
  std::vector<std::string> explicit_w = preds;
  explicit_w.insert(explicit_w.end(), {"--weights", "0.6", "--weights", "0.4"});
  ASSERT_EQ(ensemble("weighted-voting", explicit_w, root_ + "/wv2.jsonl").code, kExitOk);
  EXPECT_EQ(read_file(root_ + "/wv2.jsonl"), wv);

  EXPECT_EQ(ensemble("mean-logits", {"--logits", root_ + "/p1.logits", "--features", features(), "--data", data()},
                     root_ + "/bad.jsonl")
                .code,
            kExitUsage);
  EXPECT_EQ(ensemble("weighted-voting-mean-logits", preds, root_ + "/bad.jsonl").code, kExitUsage);
}

TEST_F(PipelineTest, FixtureEmbeddingsFlowThrough) {
  ASSERT_EQ(run({"pseudo-embed", "--features", features(), "--d-model", "16", "--output", root_ + "/emb.bin"}).code,
            kExitOk);
  ASSERT_EQ(train(root_ + "/m", "squad_out", "1", {"--embeddings", root_ + "/emb.bin"}).code, kExitOk);
  const Result r = run({"predict", "--checkpoint", root_ + "/m/checkpoint.json", "--features", features(), "--data",
                        data(), "--embeddings", root_ + "/emb.bin", "--output", root_ + "/p.jsonl"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  const Result wrong = train(root_ + "/w", "squad_out", "1", {"--embeddings", root_ + "/emb.bin", "--d-model", "8"});
  EXPECT_NE(wrong.code, kExitOk);
  const Result stride = train(root_ + "/s", "squad_out", "1", {"--max-seq-length", "32"});
  EXPECT_NE(stride.code, kExitOk);
}

}  // namespace
}  // namespace squadlab
