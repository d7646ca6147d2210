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
#include <span>

#include "tokenlens/error.hpp"
#include "tokenlens/span.hpp"

namespace tokenlens {

/// Source of next-token log-probabilities (natural log).
class Scorer {
 public:
  virtual ~Scorer() = default;
  [[nodiscard]] virtual double logprob(std::span<const TokenId> context, TokenId next) const = 0;
  [[nodiscard]] virtual std::size_t vocab_size() const noexcept = 0;
};

class UniformScorer final : public Scorer {
 public:
  explicit UniformScorer(std::size_t vocab_size) : vocab_size_(vocab_size) {
    if (vocab_size == 0) throw UsageError("UniformScorer: vocab_size must be positive");
  }
  [[nodiscard]] double logprob(std::span<const TokenId>, TokenId next) const override {
    if (next >= vocab_size_) throw DataError("UniformScorer: token id " + std::to_string(next) + " out of range");
    return -std::log(static_cast<double>(vocab_size_));
  }
  [[nodiscard]] std::size_t vocab_size() const noexcept override { return vocab_size_; }

 private:
  std::size_t vocab_size_;
};

}  // namespace tokenlens
