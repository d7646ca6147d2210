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

#include <cmath>
#include <cstdint>

namespace tokenlens {

/// Running count / mean / M2 (Welford). Mergeable with Chan's formula.
class AggregateStats {
 public:
  AggregateStats() = default;
  AggregateStats(std::uint64_t count, double mean, double m2) : count_(count), mean_(mean), m2_(m2) {}

  void push(double x) noexcept {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }

  void merge(const AggregateStats& o) noexcept {
    if (o.count_ == 0) return;
    if (count_ == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(o.count_);
    const double n = na + nb;
    const double delta = o.mean_ - mean_;
    mean_ += delta * nb / n;
    m2_ += o.m2_ + delta * delta * na * nb / n;
    count_ += o.count_;
  }

  [[nodiscard]] std::uint64_t count() const noexcept { return count_; }
  [[nodiscard]] double mean() const noexcept { return mean_; }
  [[nodiscard]] double m2() const noexcept { return m2_; }
  // population variance
  [[nodiscard]] double variance() const noexcept { return count_ > 0 ? m2_ / static_cast<double>(count_) : 0.0; }
  [[nodiscard]] double stddev() const noexcept { return std::sqrt(variance()); }

  friend bool operator==(const AggregateStats&, const AggregateStats&) = default;

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline AggregateStats merged(AggregateStats a, const AggregateStats& b) noexcept {
  a.merge(b);
  return a;
}

}  // namespace tokenlens
