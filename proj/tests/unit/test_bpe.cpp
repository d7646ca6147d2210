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

#include <random>
#include <string>
#include <vector>

#include "tokenlens/bpe.hpp"
#include "tokenlens/bpe_train.hpp"
#include "tokenlens/corpus.hpp"
#include "support/fixtures.hpp"

namespace tokenlens::bpe {
namespace {

Vocabulary tiny() {
  return parse_vocabulary(R"({"a":0,"b":1,"ab":2})", "a b\n");
}

Vocabulary bytes_only() {
  std::vector<std::pair<std::string, TokenId>> entries;
  for (int b = 0; b < 256; ++b) entries.emplace_back(std::string(1, static_cast<char>(b)), b);
  return Vocabulary::build(entries, {}, {});
}

BpeErrorKind load_error(const std::string& vocab, const std::string& merges) {
  try {
    parse_vocabulary(vocab, merges);
  } catch (const BpeError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a load error";
  return BpeErrorKind::kMalformedFile;
}

TEST(LoadVocabulary, MinimalValid) {
  const auto v = tiny();
  EXPECT_EQ(v.size(), 3u);
  ASSERT_EQ(v.merges().size(), 1u);
  EXPECT_EQ(v.merges()[0], (MergeRule{"a", "b"}));
}

TEST(LoadVocabulary, UnknownMergeSymbol) {
  EXPECT_EQ(load_error(R"({"a":0,"b":1,"ab":2})", "a c\n"), BpeErrorKind::kUnknownMergeSymbol);
}

TEST(LoadVocabulary, NonDenseIds) {
  EXPECT_EQ(load_error(R"({"a":0,"b":2})", ""), BpeErrorKind::kNonDenseIds);
}

TEST(LoadVocabulary, DuplicateId) {
  EXPECT_EQ(load_error(R"({"a":0,"b":0})", ""), BpeErrorKind::kDuplicateId);
}

TEST(LoadVocabulary, MergeResultMissing) {
  EXPECT_EQ(load_error(R"({"a":0,"b":1})", "a b\n"), BpeErrorKind::kMergeResultMissing);
}

TEST(LoadVocabulary, SpecialTokenInMerge) {
  LoadOptions opts;
  opts.special_tokens = std::vector<std::string>{"<|s|>"};
  EXPECT_THROW(
      {
        try {
          parse_vocabulary(R"({"<|s|>":0,"a":1,"<|s|>a":2})", "<|s|> a\n", opts);
        } catch (const BpeError& e) {
          EXPECT_EQ(e.kind(), BpeErrorKind::kSpecialInMerge);
          throw;
        }
      },
      BpeError);
}

TEST(LoadVocabulary, VersionLineSkipped) {
  const auto v = parse_vocabulary(R"({"a":0,"b":1,"ab":2})", "#version: 0.2\na b\n");
  EXPECT_EQ(v.merges().size(), 1u);
}

TEST(LoadVocabulary, MalformedMergeLine) {
  EXPECT_EQ(load_error(R"({"a":0,"b":1,"ab":2})", "a b c\n"), BpeErrorKind::kMalformedFile);
}

TEST(LoadVocabulary, FilesRoundTrip) {
  const auto v = load_vocabulary(testing::fixture("hello_world/vocab.json"), testing::fixture("hello_world/merges.txt"));
  EXPECT_EQ(v.size(), 269u);
  const auto again = parse_vocabulary(vocabulary_json(v), merges_text(v));
  EXPECT_EQ(again.size(), v.size());
  EXPECT_EQ(again.merges(), v.merges());
  for (TokenId id = 0; id < v.size(); ++id) EXPECT_EQ(again.text(id), v.text(id));
}

TEST(LoadVocabulary, MissingFile) {
  EXPECT_THROW(load_vocabulary("/nonexistent/vocab.json", "/nonexistent/merges.txt"), DataError);
}

TEST(Encode, Empty) { EXPECT_TRUE(encode("", tiny()).empty()); }

TEST(Encode, SingleMerge) {
  const auto toks = encode("ab", tiny());
  ASSERT_EQ(toks.size(), 1u);
  EXPECT_EQ(toks[0].id, 2u);
  EXPECT_EQ(toks[0].raw_span, (ByteSpan{0, 2}));
  EXPECT_EQ(toks[0].core_span, (ByteSpan{0, 2}));
}

TEST(Encode, NeverMergesAcrossSpace) {
  const auto v = parse_vocabulary(R"({"a":0,"b":1,"Ġ":2,"Ġb":3})", "Ġ b\n");
  const auto toks = encode("a b", v);
  for (const auto& t : toks) EXPECT_LT(t.raw_span.size(), 3u);
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(toks[0].text, "a");
  EXPECT_EQ(toks[1].text, " b");
  EXPECT_EQ(toks[1].core_span, (ByteSpan{2, 3}));
}

TEST(Encode, UnrepresentableByte) {
  try {
    encode("abc", tiny());
    FAIL() << "expected UnrepresentableByte";
  } catch (const BpeError& e) {
    EXPECT_EQ(e.kind(), BpeErrorKind::kUnrepresentableByte);
  }
}

TEST(Encode, WhitespaceOnlyTokenHasEmptyCore) {
  const auto toks = encode("x  \n", bytes_only());
  ASSERT_FALSE(toks.empty());
  for (const auto& t : toks) {
    EXPECT_TRUE(t.raw_span.contains(t.core_span));
    if (t.text.find_first_not_of(" \n") == std::string::npos) {
      EXPECT_TRUE(t.core_span.empty());
    }
  }
}

TEST(Pretokenize, Shapes) {
  const std::string doc = "def  f(x):\n\treturn x_1\n";
  const auto pieces = pretokenize(doc);
  std::vector<std::string> got;
  for (const auto& p : pieces) got.emplace_back(slice(doc, p));
  const std::vector<std::string> want = {"def", "  f", "(", "x", ")", ":", "\n\treturn", " x_1", "\n"};
  EXPECT_EQ(got, want);
}

TEST(Decode, RoundTripAndErrors) {
  const auto v = load_vocabulary(testing::fixture("hello_world/vocab.json"), testing::fixture("hello_world/merges.txt"));
  const std::string doc = "def f(): pass";
  EXPECT_EQ(decode(token_ids(encode(doc, v)), v), doc);
  EXPECT_EQ(decode(std::vector<TokenId>{}, v), "");
  const std::vector<TokenId> bad{static_cast<TokenId>(v.size())};
  try {
    decode(bad, v);
    FAIL() << "expected UnknownTokenId";
  } catch (const BpeError& e) {
    EXPECT_EQ(e.kind(), BpeErrorKind::kUnknownTokenId);
  }
}

// Partition, round trip and the boundary rule over random byte strings.
TEST(EncodeProperty, RandomBytes) {
  const auto v = load_vocabulary(testing::fixture("hello_world/vocab.json"), testing::fixture("hello_world/merges.txt"));
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 300; ++iter) {
    std::string doc(rng() % 64, '\0');
    for (auto& c : doc) c = static_cast<char>(rng() % 256);
    const auto toks = encode(doc, v);
    std::size_t cursor = 0;
    for (const auto& t : toks) {
      ASSERT_EQ(t.raw_span.begin, cursor);
      ASSERT_EQ(slice(doc, t.raw_span), t.text);
      ASSERT_TRUE(t.raw_span.contains(t.core_span));
      ASSERT_EQ(v.text(t.id), t.text);
      for (std::size_t k = t.core_span.begin; k < t.core_span.end; ++k) {
        ASSERT_FALSE(bytes::is_space(static_cast<unsigned char>(doc[k])));
      }
      ASSERT_TRUE(respects_boundaries(t.text)) << t.text;
      cursor = t.raw_span.end;
    }
    ASSERT_EQ(cursor, doc.size());
    ASSERT_EQ(decode(token_ids(toks), v), doc);
  }
}

TEST(EncodeProperty, Deterministic) {
  const auto corpus = load_corpus(testing::fixture("corpus.jsonl"));
  std::vector<std::string> docs;
  for (const auto& f : corpus) docs.push_back(f.content);
  TrainOptions opts;
  opts.target_vocab_size = 600;
  const auto v = train_bpe(docs, opts);
  for (const auto& d : docs) EXPECT_EQ(encode(d, v), encode(d, v));
}

TEST(CheckBoundary, Examples) {
  const auto bad = load_vocabulary(testing::fixture("boundary_violation/vocab.json"),
                                   testing::fixture("boundary_violation/merges.txt"));
  const auto report = check_boundary_property(bad);
  bool named = false;
  for (const auto& r : report) named = named || r.text == "import numpy as np";
  EXPECT_TRUE(named);

  EXPECT_TRUE(check_boundary_property(bytes_only()).empty());

  const auto ok = parse_vocabulary(R"({"d":0,"e":1,"f":2,"Ġ":3,"de":4,"def":5,"Ġd":6,"Ġde":7,"Ġdef":8})",
                                   "d e\nde f\nĠ d\nĠd e\nĠde f\n");
  EXPECT_TRUE(check_boundary_property(ok).empty());
}

TEST(RespectsBoundaries, Cases) {
  EXPECT_TRUE(respects_boundaries("def"));
  EXPECT_TRUE(respects_boundaries(" def"));
  EXPECT_TRUE(respects_boundaries("  "));
  EXPECT_TRUE(respects_boundaries(" ("));
  EXPECT_FALSE(respects_boundaries("a b"));
  EXPECT_FALSE(respects_boundaries("()"));
  EXPECT_FALSE(respects_boundaries("x."));
  EXPECT_FALSE(respects_boundaries("def "));
}

TEST(TrainBpe, FirstMergeIsMostFrequentPair) {
  TrainOptions opts;
  opts.target_vocab_size = 258;
  const std::vector<std::string> corpus{"aaab aaab"};
  const auto v = train_bpe(corpus, opts);
  ASSERT_GE(v.merges().size(), 1u);
  EXPECT_EQ(v.merges()[0], (MergeRule{"a", "a"}));
  EXPECT_EQ(v.size(), 258u);
}

TEST(TrainBpe, BelowBaseAlphabet) {
  TrainOptions opts;
  opts.target_vocab_size = 255;
  const std::vector<std::string> corpus{"x"};
  try {
    train_bpe(corpus, opts);
    FAIL();
  } catch (const BpeError& e) {
    EXPECT_EQ(e.kind(), BpeErrorKind::kVocabularyTooSmall);
  }
}

TEST(TrainBpe, NoRepeatingPair) {
  TrainOptions opts;
  opts.target_vocab_size = 257;
  const std::vector<std::string> corpus{"x"};
  const auto v = train_bpe(corpus, opts);
  EXPECT_EQ(v.size(), 257u);
  EXPECT_TRUE(v.merges().empty());
}

TEST(TrainBpe, EmptyCorpus) {
  try {
    train_bpe(std::vector<std::string>{}, TrainOptions{});
    FAIL();
  } catch (const BpeError& e) {
    EXPECT_EQ(e.kind(), BpeErrorKind::kEmptyCorpus);
  }
}

TEST(TrainBpe, TrainedVocabularyIsAlignmentSafeAndDeterministic) {
  const auto corpus = load_corpus(testing::fixture("corpus.jsonl"));
  std::vector<std::string> docs;
  for (const auto& f : corpus) docs.push_back(f.content);
  TrainOptions opts;
  opts.target_vocab_size = 800;
  const auto a = train_bpe(docs, opts);
  const auto b = train_bpe(docs, opts);
  EXPECT_EQ(a.merges(), b.merges());
  EXPECT_TRUE(check_boundary_property(a).empty());
  ASSERT_TRUE(a.is_special(256));
  EXPECT_EQ(a.text(256), "<|endoftext|>");
  // special tokens never come out of plain-text encoding
  for (const auto& t : encode("<|endoftext|>", a)) EXPECT_FALSE(a.is_special(t.id));
}

}  // namespace
}  // namespace tokenlens::bpe
