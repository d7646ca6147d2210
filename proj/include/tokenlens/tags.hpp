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

#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include "tokenlens/syntax/tree.hpp"

namespace tokenlens {

using syntax::NodeTag;

enum class TagKind { kNode, kWhitespace, kUnaligned };

/// Label attached to a BPE token: a syntax leaf tag, or one of the two
/// markers for tokens that have no leaf.
struct TokenTag {
  TagKind kind = TagKind::kUnaligned;
  NodeTag node;

  static TokenTag of(NodeTag tag) { return TokenTag{TagKind::kNode, std::move(tag)}; }
  static TokenTag whitespace() { return TokenTag{TagKind::kWhitespace, {}}; }
  static TokenTag unaligned() { return TokenTag{TagKind::kUnaligned, {}}; }

  [[nodiscard]] bool is_node() const noexcept { return kind == TagKind::kNode; }

  friend bool operator==(const TokenTag&, const TokenTag&) = default;
};

inline constexpr std::string_view kWhitespaceLabel = "WHITESPACE";
inline constexpr std::string_view kUnalignedLabel = "UNALIGNED";

/// node_type column as written to dumps.
inline std::string node_type_label(const TokenTag& tag) {
  switch (tag.kind) {
    case TagKind::kNode: return tag.node.node_type;
    case TagKind::kWhitespace: return std::string(kWhitespaceLabel);
    case TagKind::kUnaligned: return std::string(kUnalignedLabel);
  }
  return {};
}

/// Inverse of the dump columns; parent_type is absent for the markers.
inline TokenTag tag_from_labels(std::string_view node_type, const std::optional<std::string>& parent_type) {
  if (!parent_type) {
    if (node_type == kWhitespaceLabel) return TokenTag::whitespace();
    return TokenTag::unaligned();
  }
  return TokenTag::of(NodeTag{*parent_type, std::string(node_type)});
}

enum class InvocationClass { kNone, kInternal, kExternal };

inline std::string_view to_string(InvocationClass c) {
  switch (c) {
    case InvocationClass::kInternal: return "INTERNAL";
    case InvocationClass::kExternal: return "EXTERNAL";
    case InvocationClass::kNone: return "NONE";
  }
  return "NONE";
}

inline std::optional<InvocationClass> parse_invocation_class(std::string_view s) {
  if (s == "INTERNAL") return InvocationClass::kInternal;
  if (s == "EXTERNAL") return InvocationClass::kExternal;
  if (s == "NONE") return InvocationClass::kNone;
  return std::nullopt;
}

}  // namespace tokenlens
