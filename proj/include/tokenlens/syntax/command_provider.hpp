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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tokenlens/error.hpp"
#include "tokenlens/syntax/tree.hpp"

namespace tokenlens::syntax {

/// Runs an external parser command once per document. The document is fed
/// on stdin; the command must print one JSON tree (see tree_to_json) on
/// stdout. The returned tree is validated before use.
class CommandSyntaxProvider final : public SyntaxProvider {
 public:
  explicit CommandSyntaxProvider(std::string command) : command_(std::move(command)) {}

  [[nodiscard]] SyntaxNode parse(std::string_view doc) const override {
    namespace fs = std::filesystem;
    std::random_device rd;
    const fs::path input = fs::temp_directory_path() / ("tokenlens-doc-" + std::to_string(rd()) + ".py");
    {
      std::ofstream out(input, std::ios::binary);
      if (!out) throw DataError("cannot write temporary file " + input.string());
      out.write(doc.data(), static_cast<std::streamsize>(doc.size()));
    }
    const std::string cmd = command_ + " < '" + input.string() + "'";
    std::string output;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
      fs::remove(input);
      throw DataError("cannot run syntax provider: " + command_);
    }
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
    const int status = ::pclose(pipe);
    fs::remove(input);
    if (status != 0) throw DataError("syntax provider exited with status " + std::to_string(status));

    SyntaxNode root;
    try {
      root = tree_from_json(nlohmann::json::parse(output));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("syntax provider output: ") + e.what());
    }
    validate_tree(root, doc.size());
    finalize_tree(root);
    return root;
  }

 private:
  std::string command_;
};

}  // namespace tokenlens::syntax
