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

#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tokenlens/bpe.hpp"

namespace tokenlens::bpe {

struct TrainOptions {
  std::size_t target_vocab_size = 1024;
  std::vector<std::string> special_tokens{"<|endoftext|>"};
  /// Stop once the most frequent pair occurs fewer times than this.
  std::uint64_t min_pair_frequency = 2;
};

/// Greedy pair-frequency BPE over pre-tokens. Ids 0..255 are the single
/// bytes, then the special tokens, then merge results in learning order.
/// Equal-frequency pairs resolve to the lexicographically smaller
/// (left, right) pair.
inline Vocabulary train_bpe(std::span<const std::string> corpus, const TrainOptions& options) {
  if (corpus.empty()) throw BpeError(BpeErrorKind::kEmptyCorpus, "training corpus has no documents");
  const std::size_t base = 256 + options.special_tokens.size();
  if (options.target_vocab_size < base) {
    throw BpeError(BpeErrorKind::kVocabularyTooSmall,
                   "target " + std::to_string(options.target_vocab_size) + " below base alphabet " +
                       std::to_string(base));
  }

  std::vector<std::string> texts;
  std::unordered_map<std::string, TokenId> index;
  for (int b = 0; b < 256; ++b) {
    texts.emplace_back(1, static_cast<char>(b));
    index.emplace(texts.back(), static_cast<TokenId>(b));
  }
  for (const auto& s : options.special_tokens) {
    if (!index.emplace(s, static_cast<TokenId>(texts.size())).second) {
      throw BpeError(BpeErrorKind::kDuplicateId, "special token '" + s + "' collides with a byte token");
    }
    texts.push_back(s);
  }

  // Unique pre-tokens with their frequencies, in sorted order.
  std::map<std::string_view, std::uint64_t> counts;
  for (const auto& doc : corpus) {
    for (const ByteSpan& pre : pretokenize(doc)) ++counts[slice(doc, pre)];
  }
  struct Word {
    std::vector<TokenId> symbols;
    std::uint64_t count;
  };
  std::vector<Word> words;
  words.reserve(counts.size());
  for (const auto& [piece, count] : counts) {
    Word w{{}, count};
    for (unsigned char b : piece) w.symbols.push_back(b);
    words.push_back(std::move(w));
  }

  std::vector<MergeRule> merges;
  std::unordered_map<std::uint64_t, std::uint64_t> pair_counts;
  auto key = [](TokenId l, TokenId r) { return (static_cast<std::uint64_t>(l) << 32) | r; };

  while (texts.size() < options.target_vocab_size) {
    pair_counts.clear();
    for (const auto& w : words) {
      for (std::size_t k = 0; k + 1 < w.symbols.size(); ++k) {
        pair_counts[key(w.symbols[k], w.symbols[k + 1])] += w.count;
      }
    }
    std::uint64_t best_count = 0;
    TokenId best_l = 0;
    TokenId best_r = 0;
    for (const auto& [k, c] : pair_counts) {
      const auto l = static_cast<TokenId>(k >> 32);
      const auto r = static_cast<TokenId>(k & 0xFFFFFFFFu);
      bool better = c > best_count;
      if (!better && c == best_count) {
        const int cmp = texts[l].compare(texts[best_l]);
        better = cmp < 0 || (cmp == 0 && texts[r] < texts[best_r]);
      }
      if (better) {
        best_count = c;
        best_l = l;
        best_r = r;
      }
    }
    if (best_count == 0 || best_count < options.min_pair_frequency) break;

    std::string merged = texts[best_l] + texts[best_r];
    TokenId result;
    if (auto it = index.find(merged); it != index.end()) {
      result = it->second;
    } else {
      result = static_cast<TokenId>(texts.size());
      index.emplace(merged, result);
      texts.push_back(std::move(merged));
    }
    merges.push_back({texts[best_l], texts[best_r]});

    for (auto& w : words) {
      auto& s = w.symbols;
      std::size_t out = 0;
      for (std::size_t k = 0; k < s.size();) {
        if (k + 1 < s.size() && s[k] == best_l && s[k + 1] == best_r) {
          s[out++] = result;
          k += 2;
        } else {
          s[out++] = s[k++];
        }
      }
      s.resize(out);
    }
  }

  std::vector<std::pair<std::string, TokenId>> entries;
  entries.reserve(texts.size());
  for (TokenId id = 0; id < texts.size(); ++id) entries.emplace_back(texts[id], id);
  return Vocabulary::build(entries, merges, options.special_tokens);
}

}  // namespace tokenlens::bpe
