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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "tokenlens/align.hpp"
#include "tokenlens/io.hpp"
#include "tokenlens/loss.hpp"
#include "tokenlens/ngram.hpp"
#include "support/fixtures.hpp"

namespace tokenlens {
namespace {

LossRecord rec(TokenId id, double ce, TokenTag tag = TokenTag::unaligned(),
               InvocationClass cls = InvocationClass::kNone) {
  LossRecord r;
  r.doc_id = "d";
  r.position = 1;
  r.token_id = id;
  r.cross_entropy = ce;
  r.tag = std::move(tag);
  r.invocation_class = cls;
  return r;
}

std::vector<LossRecord> random_records(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::vector<LossRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto kind = rng() % 5;
    TokenTag tag = kind == 0   ? TokenTag::whitespace()
                   : kind == 1 ? TokenTag::unaligned()
                               : TokenTag::of({"p" + std::to_string(rng() % 3), "n" + std::to_string(rng() % 4)});
    out.push_back(rec(static_cast<TokenId>(rng() % 40), std::exponential_distribution<double>(0.7)(rng),
                      std::move(tag), static_cast<InvocationClass>(rng() % 3)));
  }
  return out;
}

class RecordingScorer final : public Scorer {
 public:
  mutable std::vector<std::size_t> context_sizes;
  double logprob(std::span<const TokenId> ctx, TokenId) const override {
    context_sizes.push_back(ctx.size());
    return -1.0;
  }
  std::size_t vocab_size() const noexcept override { return 10; }
};

TEST(ScoreDocument, UniformScorerGivesLogV) {
  const UniformScorer scorer(37);
  const std::vector<TokenId> ids{1, 5, 9, 36, 0, 0, 2};
  const auto records = score_document("doc", ids, scorer);
  ASSERT_EQ(records.size(), ids.size() - 1);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(records[i].position, i + 1);
    EXPECT_EQ(records[i].token_id, ids[i + 1]);
    EXPECT_NEAR(records[i].cross_entropy, std::log(37.0), 1e-12);
  }
}

TEST(ScoreDocument, SingleTokenDocument) {
  const UniformScorer scorer(4);
  EXPECT_TRUE(score_document("d", std::vector<TokenId>{3}, scorer).empty());
  EXPECT_TRUE(score_document("d", std::vector<TokenId>{}, scorer).empty());
}

TEST(ScoreDocument, MaxContextTruncatesPrefix) {
  RecordingScorer scorer;
  ScoreOptions opts;
  opts.max_context = 2;
  (void)score_document("d", std::vector<TokenId>{1, 2, 3, 4, 5}, scorer, opts);
  EXPECT_EQ(scorer.context_sizes, (std::vector<std::size_t>{1, 2, 2, 2}));
}

TEST(ScoreDocument, MemorizedDocumentScoresLower) {
  const std::vector<TokenId> doc{3, 8, 1, 4, 4, 9, 2, 7, 3, 8, 5, 6};
  const std::vector<TokenId> other{0, 11, 10, 12, 0, 13, 14, 10, 11, 0, 12, 13};
  std::vector<std::vector<TokenId>> train(1000, doc);
  const auto m = NgramModel::fit(train, 16);
  const auto mean = [&](const std::vector<TokenId>& d) {
    return aggregate_all(score_document("x", d, m)).mean();
  };
  EXPECT_LT(mean(doc), mean(other));
}

// Mean CE from records vs. -(1/N) sum log p from a plain loop.
TEST(ScoreDocument, MeanMatchesDirectLoop) {
  std::mt19937_64 rng(9);
  std::vector<std::vector<TokenId>> docs;
  for (int d = 0; d < 20; ++d) {
    std::vector<TokenId> s(1 + rng() % 60);
    for (auto& t : s) t = static_cast<TokenId>(rng() % 25);
    docs.push_back(s);
  }
  const auto m = NgramModel::fit(docs, 25);
  std::vector<LossRecord> all;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : docs) {
    auto r = score_document("d", s, m);
    all.insert(all.end(), r.begin(), r.end());
    for (std::size_t i = 1; i < s.size(); ++i) {
      sum += std::log(m.prob(std::span<const TokenId>(s.data(), i), s[i]));
      ++n;
    }
  }
  EXPECT_NEAR(aggregate_all(all).mean(), -sum / static_cast<double>(n), 1e-12);
}

TEST(ExternalStream, AcceptsMatchingAndPrefixStreams) {
  const std::vector<TokenId> ids{4, 5, 6, 7};
  ExternalLogprobs ext{"doc", {4, 5, 6, 7}, {std::nullopt, -0.5, -1.5, -2.5}};
  const auto r = score_document("doc", ids, ext);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_DOUBLE_EQ(r[0].cross_entropy, 0.5);
  EXPECT_DOUBLE_EQ(r[2].cross_entropy, 2.5);
  ExternalLogprobs prefix{"doc", {4, 5}, {std::nullopt, -0.25}};
  EXPECT_EQ(score_document("doc", ids, prefix).size(), 1u);
}

TEST(ExternalStream, MisalignmentIsAnError) {
  const std::vector<TokenId> ids{4, 5, 6};
  ExternalLogprobs longer{"doc", {4, 5, 6, 7}, {std::nullopt, -1, -1, -1}};
  EXPECT_THROW(score_document("doc", ids, longer), StreamMisaligned);
  ExternalLogprobs wrong{"doc", {4, 9, 6}, {std::nullopt, -1, -1}};
  EXPECT_THROW(score_document("doc", ids, wrong), StreamMisaligned);
  EXPECT_THROW(parse_external_record(nlohmann::json::parse(R"({"doc_id":"a","token_ids":[1,2],"logprobs":[null]})")),
               StreamMisaligned);
}

TEST(ExternalStream, RejectsPositiveLogprob) {
  ExternalLogprobs ext{"doc", {1, 2}, {std::nullopt, 0.5}};
  EXPECT_THROW(score_document("doc", std::vector<TokenId>{1, 2}, ext), DataError);
}

TEST(AttachTags, CopiesTagsByPosition) {
  const auto vocab =
      bpe::load_vocabulary(testing::fixture("hello_world/vocab.json"), testing::fixture("hello_world/merges.txt"));
  const std::string doc = read_file(testing::fixture("hello_world/hello.py"));
  const auto aligned = align_document(doc, vocab);
  const auto ids = bpe::token_ids(bpe::encode(doc, vocab));
  auto records = score_document("hello", ids, UniformScorer(vocab.size()));
  attach_tags(records, aligned);
  ASSERT_EQ(records.size() + 1, aligned.size());
  for (const auto& r : records) {
    EXPECT_EQ(r.tag, aligned[r.position].tag);
    EXPECT_EQ(r.text, aligned[r.position].token.text);
  }
  EXPECT_EQ(records.back().tag, TokenTag::whitespace());
  EXPECT_EQ(records.front().tag, TokenTag::of({"argument_list", "("}));

  std::vector<LossRecord> none;
  attach_tags(none, aligned);
  EXPECT_TRUE(none.empty());

  EXPECT_THROW(attach_tags(records, std::span<const AlignedToken>(aligned).first(3)), DataError);
}

TEST(Aggregate, HandExample) {
  const std::vector<LossRecord> records{rec(5, 1.0), rec(5, 3.0)};
  const auto agg = aggregate_by_token(records);
  ASSERT_EQ(agg.size(), 1u);
  const auto& s = agg.at(5);
  EXPECT_EQ(s.count(), 2u);
  EXPECT_DOUBLE_EQ(s.mean(), 2.0);
  EXPECT_DOUBLE_EQ(s.stddev(), 1.0);
  EXPECT_NEAR(perplexity(aggregate_all(records)), std::exp(2.0), 1e-12);
}

TEST(Aggregate, Empty) {
  EXPECT_TRUE(aggregate_by_token({}).empty());
  EXPECT_TRUE(aggregate_by_node({}).empty());
  EXPECT_TRUE(aggregate_by_node_class({}).empty());
}

TEST(Aggregate, NodeKeysExcludeMarkers) {
  const std::vector<LossRecord> records{rec(1, 1.0, TokenTag::whitespace()), rec(1, 1.0, TokenTag::unaligned()),
                                        rec(1, 2.0, TokenTag::of({"call", "identifier"}))};
  EXPECT_EQ(aggregate_by_token(records).at(1).count(), 3u);
  const auto nodes = aggregate_by_node(records);
  ASSERT_EQ(nodes.size(), 1u);
  EXPECT_EQ(nodes.begin()->second.count(), 1u);
}

TEST(Aggregate, CountsSumToRecordCount) {
  const auto records = random_records(1, 10000);
  std::uint64_t total = 0;
  for (const auto& [k, s] : aggregate_by_token(records)) total += s.count();
  EXPECT_EQ(total, records.size());
  std::uint64_t tagged = 0;
  for (const auto& r : records) tagged += r.tag.is_node() ? 1 : 0;
  std::uint64_t node_total = 0;
  for (const auto& [k, s] : aggregate_by_node(records)) node_total += s.count();
  EXPECT_EQ(node_total, tagged);
}

TEST(Aggregate, ParallelHalvesMatchSequential) {
  const auto records = random_records(2, 20000);
  const auto seq = aggregate_by_token(records);
  const std::span<const LossRecord> all(records);
  auto left = aggregate_by_token(all.first(records.size() / 2));
  const auto right = aggregate_by_token(all.subspan(records.size() / 2));
  for (const auto& [k, s] : right) left[k].merge(s);
  ASSERT_EQ(left.size(), seq.size());
  for (const auto& [k, s] : seq) {
    EXPECT_EQ(left.at(k).count(), s.count());
    EXPECT_NEAR(left.at(k).mean(), s.mean(), 1e-9 * std::max(1.0, std::abs(s.mean())));
    EXPECT_NEAR(left.at(k).stddev(), s.stddev(), 1e-9 * std::max(1.0, s.stddev()));
  }
}

TEST(Aggregate, WorkerCountDoesNotChangeResult) {
  const auto records = random_records(3, 30000);
  const auto one = aggregate_by_node_class(records, 1);
  for (std::size_t w : {2u, 4u, 16u}) EXPECT_EQ(aggregate_by_node_class(records, w), one);
}

TEST(Aggregate, PermutationInvariance) {
  auto records = random_records(4, 5000);
  const auto before = aggregate_by_node(records);
  std::shuffle(records.begin(), records.end(), std::mt19937_64(99));
  const auto after = aggregate_by_node(records);
  ASSERT_EQ(before.size(), after.size());
  for (const auto& [k, s] : before) {
    EXPECT_EQ(after.at(k).count(), s.count());
    EXPECT_NEAR(after.at(k).mean(), s.mean(), 1e-9);
    EXPECT_NEAR(after.at(k).stddev(), s.stddev(), 1e-9);
  }
}

TEST(Welford, MergeAssociativeAndCommutative) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> dist(3.0, 2.0);
  for (int iter = 0; iter < 200; ++iter) {
    AggregateStats a, b, c, all;
    for (auto* s : {&a, &b, &c}) {
      const int n = static_cast<int>(rng() % 20);
      for (int i = 0; i < n; ++i) {
        const double x = dist(rng);
        s->push(x);
        all.push(x);
      }
    }
    const auto ab_c = merged(merged(a, b), c);
    const auto a_bc = merged(a, merged(b, c));
    const auto cba = merged(merged(c, b), a);
    for (const auto& s : {ab_c, a_bc, cba}) {
      EXPECT_EQ(s.count(), all.count());
      EXPECT_NEAR(s.mean(), all.mean(), 1e-9 * std::max(1.0, std::abs(all.mean())));
      EXPECT_NEAR(s.m2(), all.m2(), 1e-9 * std::max(1.0, all.m2()));
    }
  }
}

TEST(Welford, PopulationStd) {
  AggregateStats s;
  for (double x : {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0}) s.push(x);
  EXPECT_DOUBLE_EQ(s.mean(), 5.0);
  EXPECT_DOUBLE_EQ(s.stddev(), 2.0);
}

TEST(Perplexity, Examples) {
  AggregateStats lnv;
  for (int i = 0; i < 3; ++i) lnv.push(std::log(50.0));
  EXPECT_NEAR(perplexity(lnv), 50.0, 1e-9);
  AggregateStats zero;
  zero.push(0.0);
  EXPECT_DOUBLE_EQ(perplexity(zero), 1.0);
  EXPECT_THROW(perplexity(AggregateStats{}), UsageError);
  for (const auto& r : random_records(8, 50)) {
    AggregateStats s;
    s.push(r.cross_entropy);
    EXPECT_GE(perplexity(s), 1.0);
  }
}

TEST(LossRecordJson, RoundTrip) {
  for (const auto& r : random_records(5, 100)) {
    auto j = nlohmann::json::parse(loss_record_line(r));
    EXPECT_EQ(loss_record_from_json(j), r);
  }
}

}  // namespace
}  // namespace tokenlens
