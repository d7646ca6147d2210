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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokenlens/error.hpp"
#include "tokenlens/scorer.hpp"
#include "tokenlens/span.hpp"

namespace tokenlens {

struct NgramOptions {
  std::size_t order = 3;
  // One weight per context length 0..order-1. Empty picks the default.
  std::vector<double> lambdas;
};

/// Default interpolation weights. (0.1, 0.3, 0.6) at order 3; otherwise a
/// linear ramp ending at 0.6.
inline std::vector<double> default_lambdas(std::size_t order) {
  if (order == 3) return {0.1, 0.3, 0.6};
  std::vector<double> out(order);
  for (std::size_t k = 0; k < order; ++k) {
    out[k] = 0.6 * static_cast<double>(k + 1) / static_cast<double>(order);
  }
  return out;
}

/// Interpolated n-gram LM over token ids.
///
/// p_{-1}(w) = 1/V
/// p_k(w | h) = l_k * c(h_k w) / c(h_k) + (1 - l_k) * p_{k-1}(w | h)
///
/// where h_k is the last k ids of the history. A history shorter than k, or a
/// context never seen in training, skips level k. Every sequence gets a BOS
/// sentinel (id V) prepended; it is never predicted.
class NgramModel final : public Scorer {
 public:
  NgramModel() = default;

  static NgramModel fit(std::span<const std::vector<TokenId>> sequences, std::size_t vocab_size,
                        NgramOptions opts = {}) {
    NgramModel m;
    m.init(vocab_size, std::move(opts));
    std::size_t events = 0;
    for (const auto& seq : sequences) {
      m.add_sequence(seq);
      events += seq.size();
    }
    if (events == 0) throw UsageError("ngram fit: empty training set");
    return m;
  }

  [[nodiscard]] std::size_t order() const noexcept { return order_; }
  [[nodiscard]] std::size_t vocab_size() const noexcept override { return vocab_size_; }
  [[nodiscard]] const std::vector<double>& lambdas() const noexcept { return lambdas_; }
  [[nodiscard]] TokenId bos() const noexcept { return static_cast<TokenId>(vocab_size_); }

  [[nodiscard]] double prob(std::span<const TokenId> context, TokenId next) const {
    check_id(next);
    for (TokenId id : context) check_id(id);
    double p = 1.0 / static_cast<double>(vocab_size_);
    // History is BOS + context; level k uses its last k ids.
    const std::size_t hist_len = context.size() + 1;
    std::u32string key;
    for (std::size_t k = 0; k < order_; ++k) {
      if (k > hist_len) break;
      key.clear();
      for (std::size_t j = hist_len - k; j < hist_len; ++j) {
        key.push_back(static_cast<char32_t>(j == 0 ? bos() : context[j - 1]));
      }
      const auto it = tables_[k].find(key);
      if (it == tables_[k].end() || it->second.total == 0) continue;
      const auto& cc = it->second;
      const auto hit = cc.next.find(next);
      const double ml = hit == cc.next.end() ? 0.0
                                             : static_cast<double>(hit->second) / static_cast<double>(cc.total);
      p = lambdas_[k] * ml + (1.0 - lambdas_[k]) * p;
    }
    return p;
  }

  [[nodiscard]] double logprob(std::span<const TokenId> context, TokenId next) const override {
    return std::log(prob(context, next));
  }

  /// Count dump: {"format":"tokenlens-ngram","version":1,"order","vocab_size",
  /// "lambdas","tables":[[{"context":[...],"next":[[id,count],...]}, ...], ...]}.
  /// tables[k] holds contexts of length k, sorted.
  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::ordered_json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["order"] = order_;
    j["vocab_size"] = vocab_size_;
    j["lambdas"] = lambdas_;
    nlohmann::ordered_json tables = nlohmann::ordered_json::array();
    for (const auto& table : tables_) {
      std::vector<const std::pair<const std::u32string, ContextCounts>*> entries;
      entries.reserve(table.size());
      for (const auto& e : table) entries.push_back(&e);
      std::sort(entries.begin(), entries.end(), [](auto* a, auto* b) { return a->first < b->first; });
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto* e : entries) {
        std::vector<std::uint32_t> ctx(e->first.begin(), e->first.end());
        std::vector<std::pair<TokenId, std::uint64_t>> next(e->second.next.begin(), e->second.next.end());
        std::sort(next.begin(), next.end());
        nlohmann::ordered_json rec;
        rec["context"] = ctx;
        rec["next"] = next;
        arr.push_back(std::move(rec));
      }
      tables.push_back(std::move(arr));
    }
    j["tables"] = std::move(tables);
    return nlohmann::json(j);
  }

  static NgramModel from_json(const nlohmann::json& j) {
    try {
      if (j.at("format").get<std::string>() != kFormat) throw DataError("ngram model: unknown format");
      if (j.at("version").get<int>() != kVersion) throw DataError("ngram model: unsupported version");
      NgramModel m;
      NgramOptions opts;
      opts.order = j.at("order").get<std::size_t>();
      opts.lambdas = j.at("lambdas").get<std::vector<double>>();
      m.init(j.at("vocab_size").get<std::size_t>(), std::move(opts));
      const auto& tables = j.at("tables");
      if (tables.size() != m.order_) throw DataError("ngram model: table count does not match order");
      for (std::size_t k = 0; k < m.order_; ++k) {
        for (const auto& rec : tables[k]) {
          const auto ctx = rec.at("context").get<std::vector<std::uint32_t>>();
          if (ctx.size() != k) throw DataError("ngram model: context length mismatch");
          for (auto id : ctx) {
            if (id > m.vocab_size_) throw DataError("ngram model: context id out of range");
          }
          ContextCounts& cc = m.tables_[k][std::u32string(ctx.begin(), ctx.end())];
          for (const auto& [id, count] : rec.at("next").get<std::vector<std::pair<TokenId, std::uint64_t>>>()) {
            if (id >= m.vocab_size_) throw DataError("ngram model: next id out of range");
            cc.next[id] += count;
            cc.total += count;
          }
        }
      }
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("ngram model: ") + e.what());
    } catch (const UsageError& e) {
      throw DataError(e.what());
    }
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << to_json().dump() << '\n';
  }

  static NgramModel load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(located(path, 0, e.what()));
    }
    try {
      return from_json(j);
    } catch (const DataError& e) {
      throw DataError(located(path, 0, e.what()));
    }
  }

 private:
  static constexpr const char* kFormat = "tokenlens-ngram";
  static constexpr int kVersion = 1;

  struct ContextCounts {
    std::uint64_t total = 0;
    std::unordered_map<TokenId, std::uint64_t> next;
  };

  void init(std::size_t vocab_size, NgramOptions opts) {
    if (opts.order == 0) throw UsageError("ngram: order must be >= 1");
    if (vocab_size == 0) throw UsageError("ngram: vocab_size must be positive");
    if (vocab_size >= 0xFFFFFFFFu) throw UsageError("ngram: vocab_size too large");
    if (opts.lambdas.empty()) opts.lambdas = default_lambdas(opts.order);
    if (opts.lambdas.size() != opts.order) {
      throw UsageError("ngram: need exactly one lambda per order (" + std::to_string(opts.order) + ")");
    }
    for (double l : opts.lambdas) {
      if (!(l >= 0.0 && l < 1.0)) throw UsageError("ngram: lambdas must lie in [0, 1)");
    }
    order_ = opts.order;
    vocab_size_ = vocab_size;
    lambdas_ = std::move(opts.lambdas);
    tables_.assign(order_, {});
  }

  void check_id(TokenId id) const {
    if (id >= vocab_size_) {
      throw DataError("ngram: unknown token id " + std::to_string(id) + " (vocab_size " +
                      std::to_string(vocab_size_) + ")");
    }
  }

  void add_sequence(const std::vector<TokenId>& seq) {
    std::u32string hist;
    hist.reserve(seq.size() + 1);
    hist.push_back(static_cast<char32_t>(bos()));
    for (TokenId id : seq) {
      check_id(id);
      hist.push_back(static_cast<char32_t>(id));
    }
    std::u32string key;
    for (std::size_t i = 1; i < hist.size(); ++i) {
      const TokenId w = static_cast<TokenId>(hist[i]);
      for (std::size_t k = 0; k < order_ && k <= i; ++k) {
        key.assign(hist, i - k, k);
        ContextCounts& cc = tables_[k][key];
        ++cc.next[w];
        ++cc.total;
      }
    }
  }

  std::size_t order_ = 0;
  std::size_t vocab_size_ = 0;
  std::vector<double> lambdas_;
  std::vector<std::unordered_map<std::u32string, ContextCounts>> tables_;
};

}  // namespace tokenlens
