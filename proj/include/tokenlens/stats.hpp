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
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "tokenlens/error.hpp"
#include "tokenlens/welford.hpp"

namespace tokenlens {

class ConstantInput : public DataError {
 public:
  using DataError::DataError;
};

/// 1-based ranks; tied values share the mean of their rank range.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i + 1;
    while (j < idx.size() && v[idx[j]] == v[idx[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = r;
    i = j;
  }
  return ranks;
}

/// Pearson correlation of average ranks.
inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("spearman: inputs differ in length");
  if (x.size() < 2) throw UsageError("spearman: need at least two observations");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DataError("spearman: non-finite input");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  // mean rank is (n+1)/2 regardless of ties
  const double mean = (static_cast<double>(x.size()) + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ConstantInput("spearman: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Spearman between per-key count and mean cross-entropy.
template <class Key>
double frequency_loss_correlation(const std::map<Key, AggregateStats>& aggregates) {
  std::vector<double> counts, means;
  counts.reserve(aggregates.size());
  means.reserve(aggregates.size());
  for (const auto& [k, s] : aggregates) {
    counts.push_back(static_cast<double>(s.count()));
    means.push_back(s.mean());
  }
  return spearman(counts, means);
}

enum class RankDirection { kBest, kWorst };

template <class Key>
struct RankedKey {
  Key key;
  std::uint64_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;

  friend bool operator==(const RankedKey&, const RankedKey&) = default;
};

/// Top-k keys by mean cross-entropy (ascending for BEST, descending for
/// WORST) among keys seen at least min_count times. Ties: higher count
/// first, then smaller key.
template <class Key>
std::vector<RankedKey<Key>> rank_keys(const std::map<Key, AggregateStats>& aggregates, RankDirection direction,
                                      std::size_t k, std::uint64_t min_count = 1) {
  if (k < 1) throw UsageError("rank_keys: k must be >= 1");
  if (min_count < 1) throw UsageError("rank_keys: min_count must be >= 1");
  std::vector<RankedKey<Key>> rows;
  for (const auto& [key, s] : aggregates) {
    if (s.count() >= min_count) rows.push_back(RankedKey<Key>{key, s.count(), s.mean(), s.stddev()});
  }
  auto better = [direction](const RankedKey<Key>& a, const RankedKey<Key>& b) {
    if (a.mean != b.mean) return direction == RankDirection::kBest ? a.mean < b.mean : a.mean > b.mean;
    if (a.count != b.count) return a.count > b.count;
    return a.key < b.key;
  };
  const std::size_t n = std::min(k, rows.size());
  std::partial_sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n), rows.end(), better);
  rows.resize(n);
  return rows;
}

}  // namespace tokenlens
