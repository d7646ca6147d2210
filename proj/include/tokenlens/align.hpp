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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokenlens/bpe.hpp"
#include "tokenlens/error.hpp"
#include "tokenlens/syntax/python_parser.hpp"
#include "tokenlens/syntax/tree.hpp"
#include "tokenlens/tags.hpp"
#include "tokenlens/utf8.hpp"

namespace tokenlens {

struct AlignedToken {
  bpe::Token token;
  TokenTag tag;
  std::optional<ByteSpan> leaf_span;  // set iff tag is a node tag

  friend bool operator==(const AlignedToken&, const AlignedToken&) = default;
};

/// A token's core span straddles two leaves (or leaves its only leaf).
/// Raised for tokenizers that merge across syntax boundaries.
class TokenCrossesNodeBoundary : public Error {
 public:
  TokenCrossesNodeBoundary(std::size_t token_index, std::string token_text, ByteSpan core_span,
                           ByteSpan leaf_a, std::optional<ByteSpan> leaf_b)
      : Error(describe(token_index, token_text, core_span, leaf_a, leaf_b)),
        token_index_(token_index),
        token_text_(std::move(token_text)),
        core_span_(core_span),
        leaf_a_(leaf_a),
        leaf_b_(leaf_b) {}

  [[nodiscard]] int exit_code() const noexcept override { return 3; }
  [[nodiscard]] std::size_t token_index() const noexcept { return token_index_; }
  [[nodiscard]] const std::string& token_text() const noexcept { return token_text_; }
  [[nodiscard]] ByteSpan core_span() const noexcept { return core_span_; }
  [[nodiscard]] ByteSpan leaf_a() const noexcept { return leaf_a_; }
  [[nodiscard]] std::optional<ByteSpan> leaf_b() const noexcept { return leaf_b_; }

 private:
  static std::string describe(std::size_t index, const std::string& text, ByteSpan core, ByteSpan a,
                              std::optional<ByteSpan> b) {
    std::string out = "TokenCrossesNodeBoundary: token " + std::to_string(index) + " '" + text + "' core [" +
                      std::to_string(core.begin) + "," + std::to_string(core.end) + ") vs leaf [" +
                      std::to_string(a.begin) + "," + std::to_string(a.end) + ")";
    if (b) out += " and leaf [" + std::to_string(b->begin) + "," + std::to_string(b->end) + ")";
    return out;
  }

  std::size_t token_index_;
  std::string token_text_;
  ByteSpan core_span_;
  ByteSpan leaf_a_;
  std::optional<ByteSpan> leaf_b_;
};

/// Assigns each token the leaf its core span falls in. Many tokens may share
/// a leaf; no token gets two. Whitespace-only tokens are WHITESPACE, tokens
/// touching no leaf are UNALIGNED. Both inputs must be sorted by span.
inline std::vector<AlignedToken> align(std::span<const bpe::Token> tokens, std::span<const syntax::Leaf> leaves) {
  std::vector<AlignedToken> out;
  out.reserve(tokens.size());
  std::size_t li = 0;
  for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
    const bpe::Token& tok = tokens[ti];
    const ByteSpan core = tok.core_span;
    if (core.empty()) {
      out.push_back(AlignedToken{tok, TokenTag::whitespace(), std::nullopt});
      continue;
    }
    while (li < leaves.size() && leaves[li].span.end <= core.begin) ++li;
    if (li == leaves.size() || !leaves[li].span.intersects(core)) {
      out.push_back(AlignedToken{tok, TokenTag::unaligned(), std::nullopt});
      continue;
    }
    const syntax::Leaf& leaf = leaves[li];
    if (li + 1 < leaves.size() && leaves[li + 1].span.intersects(core)) {
      throw TokenCrossesNodeBoundary(ti, tok.text, core, leaf.span, leaves[li + 1].span);
    }
    if (!leaf.span.contains(core)) {
      throw TokenCrossesNodeBoundary(ti, tok.text, core, leaf.span, std::nullopt);
    }
    out.push_back(AlignedToken{tok, TokenTag::of(leaf.tag), leaf.span});
  }
  return out;
}

/// encode + parse + leaves + align.
inline std::vector<AlignedToken> align_document(std::string_view doc, const bpe::Vocabulary& vocab,
                                                const syntax::SyntaxProvider& provider,
                                                bpe::EncodeOptions encode_opts = {}) {
  const auto tokens = bpe::encode(doc, vocab, encode_opts);
  const auto root = provider.parse(doc);
  const auto leaves = syntax::leaves(root);
  return align(tokens, leaves);
}

inline std::vector<AlignedToken> align_document(std::string_view doc, const bpe::Vocabulary& vocab) {
  return align_document(doc, vocab, syntax::PythonSubsetProvider{});
}

/// Alignment dump record: {token_id, text, raw_span, core_span, node_type,
/// parent_type}. parent_type is null for WHITESPACE/UNALIGNED.
inline nlohmann::ordered_json alignment_record(const AlignedToken& a) {
  nlohmann::ordered_json j;
  j["token_id"] = a.token.id;
  j["text"] = to_valid_utf8(a.token.text);
  j["raw_span"] = {a.token.raw_span.begin, a.token.raw_span.end};
  j["core_span"] = {a.token.core_span.begin, a.token.core_span.end};
  j["node_type"] = node_type_label(a.tag);
  if (a.tag.is_node()) {
    j["parent_type"] = a.tag.node.parent_type;
  } else {
    j["parent_type"] = nullptr;
  }
  return j;
}

/// One JSON object per line; invalid UTF-8 in token text is replaced.
inline std::string alignment_jsonl(std::span<const AlignedToken> aligned) {
  std::string out;
  for (const auto& a : aligned) {
    nlohmann::ordered_json j = alignment_record(a);
    out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

}  // namespace tokenlens
