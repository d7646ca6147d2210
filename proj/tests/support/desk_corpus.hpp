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
#include <random>
#include <string>
#include <vector>

#include "tokenlens/corpus.hpp"

namespace tokenlens::testing {

/// Synthetic Python-like corpus with a Zipf-distributed identifier lexicon.
/// Files come in repos of 3..6 and call functions declared in sibling files,
/// so every pipeline stage has something to do. Deterministic in `seed`.
class DeskCorpus {
 public:
  explicit DeskCorpus(std::uint64_t seed) : rng_(seed) {
    static const char* kStems[] = {"load", "save", "parse", "build", "fetch", "update", "render", "check",
                                   "compute", "merge", "split", "read", "write", "send", "open", "close",
                                   "apply", "reset", "scale", "score", "train", "encode", "decode", "sort"};
    static const char* kNouns[] = {"data", "item", "user", "config", "model", "value", "node", "path",
                                   "record", "batch", "token", "frame", "index", "result", "buffer", "query",
                                   "cache", "state", "event", "table", "point", "vector", "graph", "layer"};
    for (const char* s : kStems) {
      for (const char* n : kNouns) lexicon_.push_back(std::string(s) + "_" + n);
    }
    for (const char* n : kNouns) lexicon_.emplace_back(n);
    std::shuffle(lexicon_.begin(), lexicon_.end(), rng_);
    double total = 0.0;
    for (std::size_t r = 1; r <= lexicon_.size(); ++r) {
      total += 1.0 / std::pow(static_cast<double>(r), 1.1);
      cdf_.push_back(total);
    }
    for (auto& c : cdf_) c /= total;
  }

  std::vector<CorpusFile> generate(std::size_t n_files) {
    std::vector<CorpusFile> out;
    std::size_t repo = 0;
    while (out.size() < n_files) {
      const std::size_t size = std::min<std::size_t>(3 + rng_() % 4, n_files - out.size());
      const std::string repo_name = "desk-repo-" + std::to_string(repo++);
      std::vector<std::string> declared;
      for (std::size_t f = 0; f < size; ++f) {
        CorpusFile file;
        file.repo_name = repo_name;
        file.path = "pkg/module_" + std::to_string(f) + ".py";
        file.license = "mit";
        file.content = make_file(declared);
        out.push_back(std::move(file));
      }
    }
    return out;
  }

 private:
  const std::string& word() {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return lexicon_[std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), lexicon_.size() - 1)];
  }

  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

  std::string expr(const std::vector<std::string>& locals, int depth = 0) {
    switch (pick(depth > 1 ? 3 : 6)) {
      case 0: return locals.empty() ? word() : locals[pick(locals.size())];
      case 1: return std::to_string(pick(100));
      case 2: return "\"" + word() + "\"";
      case 3: return expr(locals, depth + 1) + (pick(2) ? " + " : " * ") + expr(locals, depth + 1);
      case 4: return word() + "(" + expr(locals, depth + 1) + ")";
      default: return "self." + word() + "." + word() + "(" + expr(locals, depth + 1) + ", " + expr(locals, depth + 1) + ")";
    }
  }

  std::string make_file(std::vector<std::string>& declared) {
    std::string src = "import os\nimport json\n\n";
    const std::size_t n_funcs = 2 + pick(4);
    for (std::size_t i = 0; i < n_funcs; ++i) {
      const std::string name = word() + "_" + std::to_string(pick(10));
      std::vector<std::string> params{word(), word()};
      src += "def " + name + "(" + params[0] + ", " + params[1] + "=None):\n";
      src += "    # " + word() + " the " + word() + "\n";
      const std::size_t n_stmts = 2 + pick(5);
      for (std::size_t s = 0; s < n_stmts; ++s) {
        switch (pick(5)) {
          case 0: {
            const std::string v = word();
            src += "    " + v + " = " + expr(params) + "\n";
            params.push_back(v);
            break;
          }
          case 1:
            src += "    if " + params[pick(params.size())] + " is None:\n        return " + expr(params) + "\n";
            break;
          case 2:
            src += "    for " + word() + " in range(" + std::to_string(1 + pick(9)) + "):\n        " +
                   expr(params) + "\n";
            break;
          case 3:
            if (!declared.empty()) {
              src += "    " + declared[pick(declared.size())] + "(" + expr(params) + ")\n";
              break;
            }
            [[fallthrough]];
          default: src += "    print(" + expr(params) + ")\n"; break;
        }
      }
      src += "    return " + params[pick(params.size())] + "\n\n\n";
      declared.push_back(name);
    }
    return src;
  }

  std::mt19937_64 rng_;
  std::vector<std::string> lexicon_;
  std::vector<double> cdf_;
};

}  // namespace tokenlens::testing
