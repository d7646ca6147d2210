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

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokenlens/error.hpp"
#include "tokenlens/span.hpp"

namespace tokenlens::syntax {

inline constexpr std::string_view kErrorType = "ERROR";
inline constexpr std::string_view kModuleType = "module";

/// A typed concrete-syntax node. Leaves are nodes without children;
/// operator and keyword leaves use their literal text as their type.
struct SyntaxNode {
  std::string type;
  ByteSpan span;
  std::string parent_type;  // "module" for the root
  std::vector<SyntaxNode> children;
  bool has_error = false;  // this node or a descendant is ERROR

  [[nodiscard]] bool is_leaf() const noexcept { return children.empty(); }
  [[nodiscard]] bool is_error() const noexcept { return type == kErrorType; }
};

/// (parent_type, node_type) label of a leaf.
struct NodeTag {
  std::string parent_type;
  std::string node_type;

  friend bool operator==(const NodeTag&, const NodeTag&) = default;
  friend auto operator<=>(const NodeTag&, const NodeTag&) = default;
};

struct Leaf {
  NodeTag tag;
  ByteSpan span;

  friend bool operator==(const Leaf&, const Leaf&) = default;
};

/// Fills parent_type and has_error top-down/bottom-up from the node types.
inline void finalize_tree(SyntaxNode& node, std::string_view parent_type = kModuleType) {
  node.parent_type = std::string(parent_type);
  bool err = node.is_error();
  for (auto& child : node.children) {
    finalize_tree(child, node.type);
    err = err || child.has_error;
  }
  node.has_error = err;
}

namespace detail {

inline void collect_leaves(const SyntaxNode& node, std::vector<Leaf>& out) {
  for (const auto& child : node.children) {
    if (child.is_leaf()) {
      out.push_back(Leaf{NodeTag{node.type, child.type}, child.span});
    } else {
      collect_leaves(child, out);
    }
  }
}

}  // namespace detail

/// In-order leaves of the tree below `root` (the root itself is never a leaf).
inline std::vector<Leaf> leaves(const SyntaxNode& root) {
  std::vector<Leaf> out;
  detail::collect_leaves(root, out);
  return out;
}

/// Throws DataError unless child spans are ordered, disjoint, contained in
/// their parent, and every leaf is non-empty.
inline void validate_tree(const SyntaxNode& node, std::size_t doc_size) {
  if (node.span.end > doc_size || node.span.begin > node.span.end) {
    throw DataError("syntax node '" + node.type + "' span out of document range");
  }
  std::size_t cursor = node.span.begin;
  for (const auto& child : node.children) {
    if (child.span.begin < cursor || !node.span.contains(child.span)) {
      throw DataError("syntax node '" + child.type + "' overlaps a sibling or escapes its parent '" +
                      node.type + "'");
    }
    if (child.is_leaf() && child.span.empty()) {
      throw DataError("syntax leaf '" + child.type + "' has an empty span");
    }
    validate_tree(child, doc_size);
    cursor = child.span.end;
  }
}

// JSON tree schema shared by `parse` output and external providers:
// {"type": str, "start": int, "end": int, "children": [...]}

inline nlohmann::json tree_to_json(const SyntaxNode& node) {
  nlohmann::json j;
  j["type"] = node.type;
  j["start"] = node.span.begin;
  j["end"] = node.span.end;
  if (!node.children.empty()) {
    j["children"] = nlohmann::json::array();
    for (const auto& c : node.children) j["children"].push_back(tree_to_json(c));
  }
  return j;
}

inline SyntaxNode tree_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j.contains("start") || !j.contains("end")) {
    throw DataError("syntax tree JSON node needs type, start and end");
  }
  SyntaxNode node;
  try {
    node.type = j.at("type").get<std::string>();
    node.span = ByteSpan{j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("syntax tree JSON: ") + e.what());
  }
  if (auto it = j.find("children"); it != j.end()) {
    if (!it->is_array()) throw DataError("syntax tree JSON: children must be an array");
    for (const auto& c : *it) node.children.push_back(tree_from_json(c));
  }
  return node;
}

/// Pluggable parser: bytes in, finalized root node out. Implementations must
/// accept any input and never throw for syntax errors.
class SyntaxProvider {
 public:
  virtual ~SyntaxProvider() = default;
  [[nodiscard]] virtual SyntaxNode parse(std::string_view doc) const = 0;
};

}  // namespace tokenlens::syntax
