// Copyright 2026 The tokenlens Authors
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

#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "support/cli.hpp"
#include "support/fixtures.hpp"
#include "tokenlens/bpe.hpp"
#include "tokenlens/corpus.hpp"
#include "tokenlens/io.hpp"
#include "tokenlens/loss.hpp"

namespace tokenlens {
namespace {

using testing::CliResult;
using testing::fixture;
using testing::quoted;
using testing::run_cli;
using testing::slurp;
using testing::TempDir;

std::string hello_vocab_args() {
  return "--vocab " + quoted(fixture("hello_world/vocab.json")) + " --merges " +
         quoted(fixture("hello_world/merges.txt"));
}

std::string hello_corpus(const TempDir& dir) {
  const std::string path = dir / "hello.jsonl";
  const std::vector<CorpusFile> files{
      {"demo", "hello.py", read_file(fixture("hello_world/hello.py")), "mit"}};
  std::ostringstream out;
  write_corpus(out, files);
  write_file(path, out.str());
  return path;
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  const CliResult r = run_cli("frobnicate");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("Usage"), std::string::npos) << r.err;
}

TEST(Cli, UnknownFlagIsUsageError) {
  const CliResult r = run_cli("analyze --records x.jsonl --bogus");
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, HelpSucceeds) {
  const CliResult r = run_cli("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"tokenize", "align", "check-tokenizer", "fit-lm", "score", "pipeline", "analyze", "report"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
}

TEST(Cli, AlignReproducesHelloWorldGolden) {
  const CliResult r = run_cli("align --file " + quoted(fixture("hello_world/hello.py")) + " " + hello_vocab_args());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, slurp(fixture("hello_world/golden_alignment.jsonl")));
}

TEST(Cli, BoundaryViolationExitsThree) {
  const std::string vocab = "--vocab " + quoted(fixture("boundary_violation/vocab.json")) + " --merges " +
                            quoted(fixture("boundary_violation/merges.txt"));
  const CliResult check = run_cli("check-tokenizer " + vocab);
  EXPECT_EQ(check.code, 3);
  const auto report = nlohmann::json::parse(check.out);
  EXPECT_FALSE(report.at("compatible").get<bool>());
  EXPECT_EQ(report.at("boundary_violations").back().at("text"), "import numpy as np");

  const CliResult align =
      run_cli("align --no-pretokenize --file " + quoted(fixture("boundary_violation/snippet.py")) + " " + vocab);
  EXPECT_EQ(align.code, 3);
  EXPECT_NE(align.err.find("snippet.py"), std::string::npos) << align.err;
  EXPECT_NE(align.err.find("TokenCrossesNodeBoundary"), std::string::npos) << align.err;
}

TEST(Cli, CompatibleTokenizerPassesCheck) {
  const CliResult r = run_cli("check-tokenizer " + hello_vocab_args());
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST(Cli, DataErrorsNameFileAndLine) {
  TempDir dir;
  const std::string bad = dir / "bad.jsonl";
  write_file(bad, "{\"repo_name\":\"r\",\"path\":\"a.py\",\"content\":\"x\",\"license\":\"mit\"}\n{\"repo_name\":1}\n");
  const CliResult r = run_cli("tokenize --corpus " + quoted(bad) + " " + hello_vocab_args());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad.jsonl:2"), std::string::npos) << r.err;
}

TEST(Cli, MissingVocabularyIsDataError) {
  TempDir dir;
  const CliResult r = run_cli("tokenize --corpus " + quoted(hello_corpus(dir)) + " --vocab " +
                              quoted(dir / "nope.json") + " --merges " + quoted(dir / "nope.txt"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("nope.json"), std::string::npos) << r.err;
}

TEST(Cli, PipelineTraceCallsAndFrequencies) {
  TempDir dir;
  const CliResult r = run_cli("pipeline --corpus " + quoted(fixture("pipeline_corpus.jsonl")) +
                              " --sample 1 --seed 42 --max-chars 4096 --require-multi-file --require-internal-call" +
                              " -o " + quoted(dir / "kept.jsonl") + " --calls " + quoted(dir / "calls.jsonl"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out,
            "{\"stages\":[{\"stage\":\"input\",\"surviving\":8},{\"stage\":\"sample\",\"surviving\":8},"
            "{\"stage\":\"max_chars\",\"surviving\":5},{\"stage\":\"multi_file\",\"surviving\":4},"
            "{\"stage\":\"internal_call\",\"surviving\":2}]}\n");
  const auto kept = load_corpus(dir / "kept.jsonl");
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].doc_id(), "alpha/main.py");
  EXPECT_EQ(kept[1].doc_id(), "beta/models.py");

  const CliResult internal = run_cli("report --frequencies internal --calls " + quoted(dir / "calls.jsonl"));
  ASSERT_EQ(internal.code, 0) << internal.err;
  EXPECT_EQ(internal.out, "name,count\nfoo,1\nhelper,1\nlocal_only,1\n");
  const CliResult external = run_cli("report --frequencies external --calls " + quoted(dir / "calls.jsonl"));
  EXPECT_EQ(external.out, "name,count\nzeros,1\n");
}

TEST(Cli, ScoreWithNoDocumentsWritesEmptyFile) {
  TempDir dir;
  const std::string corpus = hello_corpus(dir);
  ASSERT_EQ(run_cli("fit-lm --corpus " + quoted(corpus) + " " + hello_vocab_args() + " -o " + quoted(dir / "lm.json"))
                .code,
            0);
  const std::string empty = dir / "empty.jsonl";
  write_file(empty, "");
  const std::string out = dir / "loss.jsonl";
  write_file(out, "stale\n");
  const CliResult r = run_cli("score --corpus " + quoted(empty) + " " + hello_vocab_args() + " --model " +
                              quoted(dir / "lm.json") + " -o " + quoted(out));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_EQ(slurp(out), "");
}

TEST(Cli, ScoreRejectsModelOfOtherVocabulary) {
  TempDir dir;
  const std::string corpus = hello_corpus(dir);
  ASSERT_EQ(run_cli("fit-lm --corpus " + quoted(corpus) + " " + hello_vocab_args() + " --vocab-size 999 -o " +
                    quoted(dir / "lm.json"))
                .code,
            0);
  // --vocab wins over --vocab-size, so this model matches
  const CliResult ok = run_cli("score --corpus " + quoted(corpus) + " " + hello_vocab_args() + " --model " +
                               quoted(dir / "lm.json") + " -o " + quoted(dir / "a.jsonl"));
  EXPECT_EQ(ok.code, 0) << ok.err;

  ASSERT_EQ(run_cli("tokenize --corpus " + quoted(corpus) + " " + hello_vocab_args() + " -o " +
                    quoted(dir / "tok.jsonl"))
                .code,
            0);
  ASSERT_EQ(run_cli("fit-lm --tokens " + quoted(dir / "tok.jsonl") + " --vocab-size 999 -o " +
                    quoted(dir / "lm999.json"))
                .code,
            0);
  const CliResult bad = run_cli("score --corpus " + quoted(corpus) + " " + hello_vocab_args() + " --model " +
                                quoted(dir / "lm999.json") + " -o " + quoted(dir / "b.jsonl"));
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("vocab_size"), std::string::npos) << bad.err;
}

TEST(Cli, ExternalStreamScoresUniformLogprobs) {
  TempDir dir;
  const std::string corpus = hello_corpus(dir);
  const auto vocab = bpe::load_vocabulary(fixture("hello_world/vocab.json"), fixture("hello_world/merges.txt"));
  const auto ids = bpe::token_ids(bpe::encode(read_file(fixture("hello_world/hello.py")), vocab));
  const double lp = -std::log(static_cast<double>(vocab.size()));
  nlohmann::json ext;
  ext["doc_id"] = "demo/hello.py";
  ext["token_ids"] = ids;
  ext["logprobs"] = nlohmann::json::array({nullptr});
  for (std::size_t i = 1; i < ids.size(); ++i) ext["logprobs"].push_back(lp);
  write_file(dir / "ext.jsonl", ext.dump() + "\n");

  const CliResult r = run_cli("score --corpus " + quoted(corpus) + " " + hello_vocab_args() + " --external " +
                              quoted(dir / "ext.jsonl") + " -o " + quoted(dir / "loss.jsonl"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto records = load_loss_records(dir / "loss.jsonl");
  ASSERT_EQ(records.size(), ids.size() - 1);
  for (const auto& rec : records) EXPECT_NEAR(rec.cross_entropy, -lp, 1e-12);
  // print( is a builtin call: tagged, but class NONE
  EXPECT_EQ(records[0].tag.node.parent_type, "argument_list");
  EXPECT_EQ(records[0].invocation_class, InvocationClass::kNone);
}

TEST(Cli, ExternalSyntaxProviderMatchesBuiltIn) {
  TempDir dir;
  const std::string vocab = dir / "v";
  ASSERT_EQ(run_cli("train-bpe --corpus " + quoted(fixture("corpus.jsonl")) + " --vocab-size 400 --out-dir " +
                    quoted(vocab))
                .code,
            0);
  const std::string args = "align --corpus " + quoted(fixture("corpus.jsonl")) + " --vocab " +
                           quoted(vocab + "/vocab.json") + " --merges " + quoted(vocab + "/merges.txt");
  const CliResult builtin = run_cli(args);
  ASSERT_EQ(builtin.code, 0) << builtin.err;
  // the CLI's own `parse` speaks the provider protocol
  const CliResult external = run_cli("--syntax-provider \"'" + testing::cli_path() + "' parse\" " + args);
  ASSERT_EQ(external.code, 0) << external.err;
  EXPECT_EQ(external.out, builtin.out);
}

TEST(Cli, FailingSyntaxProviderIsDataError) {
  TempDir dir;
  const CliResult r = run_cli("--syntax-provider false align --corpus " + quoted(hello_corpus(dir)) + " " +
                              hello_vocab_args());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("demo/hello.py"), std::string::npos) << r.err;
}

struct StageOutputs {
  std::vector<std::string> files;
};

/// tokenize -> align -> fit-lm -> score -> analyze -> report, all outputs read back.
StageOutputs run_stages(const TempDir& dir, int threads) {
  const std::string t = "--threads " + std::to_string(threads) + " ";
  const std::string corpus = quoted(fixture("corpus.jsonl"));
  const std::string vocab = "--vocab " + quoted(dir / "vocab.json") + " --merges " + quoted(dir / "merges.txt");
  const std::vector<std::string> steps = {
      "train-bpe --corpus " + corpus + " --vocab-size 600 --out-dir " + quoted(dir.path().string()),
      t + "tokenize --corpus " + corpus + " " + vocab + " -o " + quoted(dir / "tokens.jsonl"),
      t + "align --corpus " + corpus + " " + vocab + " -o " + quoted(dir / "align.jsonl"),
      t + "fit-lm --tokens " + quoted(dir / "tokens.jsonl") + " " + vocab + " -o " + quoted(dir / "lm.json"),
      t + "score --corpus " + corpus + " " + vocab + " --model " + quoted(dir / "lm.json") + " -o " +
          quoted(dir / "loss.jsonl"),
      t + "analyze --records " + quoted(dir / "loss.jsonl") + " -o " + quoted(dir / "agg.json"),
      "report --aggregates " + quoted(dir / "agg.json") + " --worst 10 --level bpe -o " + quoted(dir / "worst.csv"),
      "report --aggregates " + quoted(dir / "agg.json") + " --best 10 --level node -o " + quoted(dir / "best.csv"),
      "report --aggregates " + quoted(dir / "agg.json") + " --correlation -o " + quoted(dir / "rho.json"),
      "report --aggregates " + quoted(dir / "agg.json") + " --summary --format json -o " + quoted(dir / "sum.json"),
  };
  for (const auto& s : steps) {
    const CliResult r = run_cli(s);
    EXPECT_EQ(r.code, 0) << s << "\n" << r.err;
  }
  StageOutputs out;
  for (const char* f : {"vocab.json", "merges.txt", "tokens.jsonl", "align.jsonl", "lm.json", "loss.jsonl",
                        "agg.json", "worst.csv", "best.csv", "rho.json", "sum.json"}) {
    out.files.push_back(slurp(dir / f));
  }
  return out;
}

TEST(Cli, StagesAreDeterministicAcrossRunsAndThreads) {
  TempDir a, b, c;
  const auto one = run_stages(a, 1);
  const auto again = run_stages(b, 1);
  const auto four = run_stages(c, 4);
  ASSERT_EQ(one.files.size(), four.files.size());
  for (std::size_t i = 0; i < one.files.size(); ++i) {
    SCOPED_TRACE(i);
    EXPECT_FALSE(one.files[i].empty());
    EXPECT_EQ(one.files[i], again.files[i]);
    EXPECT_EQ(one.files[i], four.files[i]);
  }
  EXPECT_EQ(one.files[7].substr(0, one.files[7].find('\n')), "rank,token_id,text,count,mean_ce,std_ce");
  // token texts may hold quoted newlines, so look for the rank column
  EXPECT_NE(one.files[7].find("\n10,"), std::string::npos);
  EXPECT_EQ(one.files[7].find("\n11,"), std::string::npos);
}

TEST(Cli, ConfigFileSuppliesDefaultsAndFlagsWin) {
  TempDir dir;
  const std::string corpus = hello_corpus(dir);
  ASSERT_EQ(run_cli("fit-lm --corpus " + quoted(corpus) + " " + hello_vocab_args() + " -o " + quoted(dir / "lm.json"))
                .code,
            0);
  ASSERT_EQ(run_cli("score --corpus " + quoted(corpus) + " " + hello_vocab_args() + " --model " +
                    quoted(dir / "lm.json") + " -o " + quoted(dir / "loss.jsonl"))
                .code,
            0);
  ASSERT_EQ(run_cli("analyze --records " + quoted(dir / "loss.jsonl") + " -o " + quoted(dir / "agg.json")).code, 0);
  write_file(dir / "cfg.toml", "threads = 2\n[report]\nworst = 2\nlevel = \"node\"\nhuman = true\n");

  const std::string base = "--config " + quoted(dir / "cfg.toml") + " report --aggregates " + quoted(dir / "agg.json");
  const CliResult from_config = run_cli(base);
  ASSERT_EQ(from_config.code, 0) << from_config.err;
  EXPECT_EQ(from_config.out.substr(0, from_config.out.find('\n')), "rank,parent_type,node_type,count,mean_ce,std_ce");
  EXPECT_EQ(std::count(from_config.out.begin(), from_config.out.end(), '\n'), 3);

  const CliResult overridden = run_cli(base + " --level bpe");
  ASSERT_EQ(overridden.code, 0) << overridden.err;
  EXPECT_EQ(overridden.out.substr(0, overridden.out.find('\n')), "rank,token_id,text,count,mean_ce,std_ce");
}

}  // namespace
}  // namespace tokenlens
