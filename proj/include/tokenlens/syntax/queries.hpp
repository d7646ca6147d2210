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

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tokenlens/syntax/tree.hpp"

namespace tokenlens::syntax {

/// One call node. `name` is the called identifier, or the final attribute
/// segment for `obj.a.b()`; it is empty when the callee is neither (e.g.
/// `f()()`).
struct Invocation {
  std::string name;
  ByteSpan call_span;
  std::optional<ByteSpan> name_span;
  ByteSpan arguments_span;

  friend bool operator==(const Invocation&, const Invocation&) = default;
};

namespace detail {

inline void walk_declarations(const SyntaxNode& node, std::string_view doc, std::set<std::string>& out) {
  if (node.type == "function_definition") {
    for (const auto& c : node.children) {
      if (c.type == "identifier") {
        out.emplace(slice(doc, c.span));
        break;
      }
    }
  }
  for (const auto& c : node.children) walk_declarations(c, doc, out);
}

inline void walk_invocations(const SyntaxNode& node, std::string_view doc, std::vector<Invocation>& out) {
  if (node.type == "call" && !node.children.empty()) {
    Invocation inv;
    inv.call_span = node.span;
    inv.arguments_span = node.children.back().span;
    const SyntaxNode& callee = node.children.front();
    if (callee.type == "identifier") {
      inv.name_span = callee.span;
    } else if (callee.type == "attribute" && !callee.children.empty() &&
               callee.children.back().type == "identifier") {
      inv.name_span = callee.children.back().span;
    }
    if (inv.name_span) inv.name = std::string(slice(doc, *inv.name_span));
    out.push_back(std::move(inv));
  }
  for (const auto& c : node.children) walk_invocations(c, doc, out);
}

}  // namespace detail

/// Names of every function_definition, including methods and nested defs.
inline std::set<std::string> extract_declarations(const SyntaxNode& root, std::string_view doc) {
  std::set<std::string> out;
  detail::walk_declarations(root, doc, out);
  return out;
}

/// Call sites in pre-order (outer calls before the calls nested in them).
inline std::vector<Invocation> extract_invocations(const SyntaxNode& root, std::string_view doc) {
  std::vector<Invocation> out;
  detail::walk_invocations(root, doc, out);
  return out;
}

}  // namespace tokenlens::syntax
