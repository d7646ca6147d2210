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
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokenlens/byte_mapping.hpp"
#include "tokenlens/error.hpp"
#include "tokenlens/io.hpp"
#include "tokenlens/span.hpp"

namespace tokenlens::bpe {

enum class BpeErrorKind {
  kDuplicateId,
  kNonDenseIds,
  kUnknownMergeSymbol,
  kMergeResultMissing,
  kSpecialInMerge,
  kUnknownTokenId,
  kUnrepresentableByte,
  kEmptyCorpus,
  kVocabularyTooSmall,
  kMalformedFile,
};

inline const char* to_string(BpeErrorKind kind) {
  switch (kind) {
    case BpeErrorKind::kDuplicateId: return "DuplicateId";
    case BpeErrorKind::kNonDenseIds: return "NonDenseIds";
    case BpeErrorKind::kUnknownMergeSymbol: return "UnknownMergeSymbol";
    case BpeErrorKind::kMergeResultMissing: return "MergeResultMissing";
    case BpeErrorKind::kSpecialInMerge: return "SpecialInMerge";
    case BpeErrorKind::kUnknownTokenId: return "UnknownTokenId";
    case BpeErrorKind::kUnrepresentableByte: return "UnrepresentableByte";
    case BpeErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case BpeErrorKind::kVocabularyTooSmall: return "VocabularyTooSmall";
    case BpeErrorKind::kMalformedFile: return "MalformedFile";
  }
  return "Unknown";
}

class BpeError : public DataError {
 public:
  BpeError(BpeErrorKind kind, const std::string& what)
      : DataError(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  [[nodiscard]] BpeErrorKind kind() const noexcept { return kind_; }

 private:
  BpeErrorKind kind_;
};

struct MergeRule {
  std::string left;
  std::string right;
  friend bool operator==(const MergeRule&, const MergeRule&) = default;
};

/// Immutable token table plus ordered merge rules. Token texts are raw
/// bytes; the unicode form only exists in files.
class Vocabulary {
 public:
  static constexpr TokenId kNoToken = std::numeric_limits<TokenId>::max();

  Vocabulary() = default;

  /// Validates and builds a vocabulary from (text, id) entries.
  static Vocabulary build(const std::vector<std::pair<std::string, TokenId>>& entries,
                          const std::vector<MergeRule>& merges,
                          const std::vector<std::string>& special_tokens) {
    Vocabulary v;
    std::vector<const std::string*> by_id(entries.size(), nullptr);
    for (const auto& [text, id] : entries) {
      if (id >= entries.size()) {
        throw BpeError(BpeErrorKind::kNonDenseIds,
                       "id " + std::to_string(id) + " outside [0, " + std::to_string(entries.size()) + ")");
      }
      if (by_id[id] != nullptr) {
        throw BpeError(BpeErrorKind::kDuplicateId, "id " + std::to_string(id) + " assigned twice");
      }
      by_id[id] = &text;
    }
    v.tokens_.reserve(entries.size());
    for (std::size_t id = 0; id < by_id.size(); ++id) {
      v.tokens_.push_back(*by_id[id]);
      if (!v.index_.emplace(*by_id[id], static_cast<TokenId>(id)).second) {
        throw BpeError(BpeErrorKind::kDuplicateId, "token text mapped to two ids");
      }
    }
    v.special_.assign(v.tokens_.size(), false);
    for (const auto& s : special_tokens) {
      auto it = v.index_.find(s);
      if (it == v.index_.end()) {
        throw BpeError(BpeErrorKind::kMalformedFile, "special token '" + s + "' not in vocabulary");
      }
      v.special_[it->second] = true;
    }
    v.byte_token_.fill(kNoToken);
    for (TokenId id = 0; id < v.tokens_.size(); ++id) {
      if (v.tokens_[id].size() == 1 && !v.special_[id]) {
        v.byte_token_[static_cast<unsigned char>(v.tokens_[id][0])] = id;
      }
    }
    v.merges_.reserve(merges.size());
    for (std::size_t rank = 0; rank < merges.size(); ++rank) {
      const auto& rule = merges[rank];
      auto l = v.find(rule.left);
      auto r = v.find(rule.right);
      if (!l || !r) {
        throw BpeError(BpeErrorKind::kUnknownMergeSymbol,
                       "rule " + std::to_string(rank) + " '" + rule.left + " " + rule.right +
                           "' references a symbol outside the vocabulary");
      }
      auto result = v.find(rule.left + rule.right);
      if (!result) {
        throw BpeError(BpeErrorKind::kMergeResultMissing,
                       "rule " + std::to_string(rank) + " produces a token outside the vocabulary");
      }
      if (v.special_[*l] || v.special_[*r] || v.special_[*result]) {
        throw BpeError(BpeErrorKind::kSpecialInMerge,
                       "rule " + std::to_string(rank) + " involves a special token");
      }
      // First rule wins for a repeated pair.
      v.pair_rank_.try_emplace(pair_key(*l, *r), MergeSlot{static_cast<std::uint32_t>(rank), *result});
      v.merges_.push_back(rule);
    }
    return v;
  }

  [[nodiscard]] std::size_t size() const noexcept { return tokens_.size(); }
  [[nodiscard]] const std::vector<MergeRule>& merges() const noexcept { return merges_; }

  [[nodiscard]] const std::string& text(TokenId id) const {
    if (id >= tokens_.size()) {
      throw BpeError(BpeErrorKind::kUnknownTokenId, "id " + std::to_string(id));
    }
    return tokens_[id];
  }

  [[nodiscard]] std::optional<TokenId> find(std::string_view text) const {
    auto it = index_.find(std::string(text));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  [[nodiscard]] bool is_special(TokenId id) const { return id < special_.size() && special_[id]; }

  [[nodiscard]] std::vector<TokenId> special_ids() const {
    std::vector<TokenId> out;
    for (TokenId id = 0; id < special_.size(); ++id) {
      if (special_[id]) out.push_back(id);
    }
    return out;
  }

  /// Token for a lone byte, or kNoToken.
  [[nodiscard]] TokenId byte_token(unsigned char b) const noexcept { return byte_token_[b]; }

  struct MergeSlot {
    std::uint32_t rank;
    TokenId result;
  };

  [[nodiscard]] const MergeSlot* merge_of(TokenId left, TokenId right) const {
    auto it = pair_rank_.find(pair_key(left, right));
    return it == pair_rank_.end() ? nullptr : &it->second;
  }

 private:
  static std::uint64_t pair_key(TokenId l, TokenId r) noexcept {
    return (static_cast<std::uint64_t>(l) << 32) | r;
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::vector<bool> special_;
  std::vector<MergeRule> merges_;
  std::unordered_map<std::uint64_t, MergeSlot> pair_rank_;
  std::array<TokenId, 256> byte_token_{};
};

struct Token {
  TokenId id = 0;
  std::string text;
  ByteSpan raw_span;
  ByteSpan core_span;

  friend bool operator==(const Token&, const Token&) = default;
};

/// Splits a document into pre-tokens: an optional whitespace run followed by
/// either an identifier run or one punctuation byte. A whitespace run with
/// nothing after it is its own pre-token. Merges never cross these bounds.
inline std::vector<ByteSpan> pretokenize(std::string_view doc) {
  std::vector<ByteSpan> out;
  const std::size_t n = doc.size();
  std::size_t i = 0;
  auto at = [&](std::size_t k) { return static_cast<unsigned char>(doc[k]); };
  while (i < n) {
    const std::size_t start = i;
    while (i < n && bytes::is_space(at(i))) ++i;
    if (i < n) {
      if (bytes::is_word(at(i))) {
        while (i < n && bytes::is_word(at(i))) ++i;
      } else {
        ++i;
      }
    }
    out.push_back(ByteSpan{start, i});
  }
  return out;
}

namespace detail {

inline void merge_symbols(const Vocabulary& vocab, std::vector<TokenId>& symbols) {
  while (symbols.size() > 1) {
    std::uint32_t best_rank = std::numeric_limits<std::uint32_t>::max();
    TokenId best_left = 0;
    TokenId best_right = 0;
    TokenId best_result = 0;
    for (std::size_t k = 0; k + 1 < symbols.size(); ++k) {
      const auto* slot = vocab.merge_of(symbols[k], symbols[k + 1]);
      if (slot != nullptr && slot->rank < best_rank) {
        best_rank = slot->rank;
        best_left = symbols[k];
        best_right = symbols[k + 1];
        best_result = slot->result;
      }
    }
    if (best_rank == std::numeric_limits<std::uint32_t>::max()) break;
    std::size_t w = 0;
    for (std::size_t k = 0; k < symbols.size();) {
      if (k + 1 < symbols.size() && symbols[k] == best_left && symbols[k + 1] == best_right) {
        symbols[w++] = best_result;
        k += 2;
      } else {
        symbols[w++] = symbols[k++];
      }
    }
    symbols.resize(w);
  }
}

}  // namespace detail

struct EncodeOptions {
  // false: the whole document is one piece, so merges may cross whitespace
  // and punctuation (tokenizers without boundary rules).
  bool pretokenize = true;
};

/// Byte-level BPE encoding with byte offsets. Raw spans partition `doc`.
inline std::vector<Token> encode(std::string_view doc, const Vocabulary& vocab, EncodeOptions opts = {}) {
  std::vector<Token> out;
  out.reserve(doc.size() / 3 + 1);
  std::unordered_map<std::string_view, std::vector<TokenId>> cache;
  std::vector<TokenId> symbols;
  std::vector<ByteSpan> pieces;
  if (opts.pretokenize) {
    pieces = pretokenize(doc);
  } else if (!doc.empty()) {
    pieces.push_back(ByteSpan{0, doc.size()});
  }
  for (const ByteSpan& pre : pieces) {
    const std::string_view piece = slice(doc, pre);
    auto cached = cache.find(piece);
    if (cached == cache.end()) {
      symbols.clear();
      for (std::size_t k = 0; k < piece.size(); ++k) {
        const auto b = static_cast<unsigned char>(piece[k]);
        const TokenId id = vocab.byte_token(b);
        if (id == Vocabulary::kNoToken) {
          throw BpeError(BpeErrorKind::kUnrepresentableByte,
                         "byte " + std::to_string(b) + " at offset " + std::to_string(pre.begin + k));
        }
        symbols.push_back(id);
      }
      detail::merge_symbols(vocab, symbols);
      cached = cache.emplace(piece, symbols).first;
    }
    std::size_t offset = pre.begin;
    for (TokenId id : cached->second) {
      const std::string& text = vocab.text(id);
      Token tok;
      tok.id = id;
      tok.text = text;
      tok.raw_span = ByteSpan{offset, offset + text.size()};
      tok.core_span = trim_whitespace(doc, tok.raw_span);
      offset += text.size();
      out.push_back(std::move(tok));
    }
  }
  return out;
}

inline std::vector<TokenId> token_ids(std::span<const Token> tokens) {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(t.id);
  return ids;
}

inline std::string decode(std::span<const TokenId> ids, const Vocabulary& vocab) {
  std::string out;
  for (TokenId id : ids) out += vocab.text(id);
  return out;
}

struct BoundaryViolation {
  TokenId id = 0;
  std::string text;
};

/// True when `text` is whitespace*, then either nothing, an identifier run,
/// or a single punctuation byte.
inline bool respects_boundaries(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && bytes::is_space(static_cast<unsigned char>(text[i]))) ++i;
  if (i == text.size()) return true;
  const auto first = static_cast<unsigned char>(text[i]);
  if (bytes::is_word(first)) {
    for (std::size_t k = i; k < text.size(); ++k) {
      if (!bytes::is_word(static_cast<unsigned char>(text[k]))) return false;
    }
    return true;
  }
  return i + 1 == text.size();
}

/// Lists non-special tokens whose text crosses a whitespace, punctuation or
/// identifier boundary (e.g. a single token for "import numpy as np"). Such
/// tokenizers cannot be aligned to syntax leaves.
inline std::vector<BoundaryViolation> check_boundary_property(const Vocabulary& vocab) {
  std::vector<BoundaryViolation> out;
  for (TokenId id = 0; id < vocab.size(); ++id) {
    if (vocab.is_special(id)) continue;
    const auto& text = vocab.text(id);
    if (!respects_boundaries(text)) out.push_back({id, text});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files: vocab.json maps unicode-mapped token strings to ids; merges.txt holds
// one "left right" pair per line with an optional "#" first line.

struct LoadOptions {
  /// Token texts to mark special. When unset, tokens of the form "<|...|>".
  std::optional<std::vector<std::string>> special_tokens;
};

namespace detail {

inline bool looks_special(std::string_view t) {
  return t.size() >= 4 && t.substr(0, 2) == "<|" && t.substr(t.size() - 2) == "|>";
}

}  // namespace detail

inline Vocabulary parse_vocabulary(std::string_view vocab_json, std::string_view merges_text,
                                   const LoadOptions& options = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(vocab_json);
  } catch (const nlohmann::json::exception& e) {
    throw BpeError(BpeErrorKind::kMalformedFile, std::string("vocabulary JSON: ") + e.what());
  }
  if (!j.is_object()) throw BpeError(BpeErrorKind::kMalformedFile, "vocabulary must be a JSON object");

  std::vector<std::pair<std::string, TokenId>> entries;
  std::vector<std::string> specials;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number_integer() || it.value().get<std::int64_t>() < 0) {
      throw BpeError(BpeErrorKind::kMalformedFile, "id for '" + it.key() + "' is not a non-negative integer");
    }
    const auto id = it.value().get<std::int64_t>();
    if (id > std::numeric_limits<TokenId>::max() - 1) {
      throw BpeError(BpeErrorKind::kNonDenseIds, "id " + std::to_string(id) + " too large");
    }
    std::string text;
    if (auto raw = unicode_to_bytes(it.key())) {
      text = std::move(*raw);
    } else if (detail::looks_special(it.key())) {
      text = it.key();
    } else {
      throw BpeError(BpeErrorKind::kMalformedFile, "token '" + it.key() + "' is not byte-level encoded");
    }
    if (!options.special_tokens && detail::looks_special(text)) specials.push_back(text);
    entries.emplace_back(std::move(text), static_cast<TokenId>(id));
  }
  if (options.special_tokens) specials = *options.special_tokens;

  std::vector<MergeRule> merges;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < merges_text.size()) {
    std::size_t eol = merges_text.find('\n', pos);
    if (eol == std::string_view::npos) eol = merges_text.size();
    std::string_view line = merges_text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line_no == 1 && line.front() == '#') continue;
    const auto space = line.find(' ');
    if (space == std::string_view::npos || line.find(' ', space + 1) != std::string_view::npos ||
        space == 0 || space + 1 == line.size()) {
      throw BpeError(BpeErrorKind::kMalformedFile,
                     "merges line " + std::to_string(line_no) + ": expected 'left right'");
    }
    auto left = unicode_to_bytes(line.substr(0, space));
    auto right = unicode_to_bytes(line.substr(space + 1));
    if (!left || !right) {
      throw BpeError(BpeErrorKind::kUnknownMergeSymbol,
                     "merges line " + std::to_string(line_no) + ": symbol is not byte-level encoded");
    }
    merges.push_back({std::move(*left), std::move(*right)});
  }
  return Vocabulary::build(entries, merges, specials);
}

inline Vocabulary load_vocabulary(const std::string& vocab_path, const std::string& merges_path,
                                  const LoadOptions& options = {}) {
  const std::string vocab_json = read_file(vocab_path);
  const std::string merges_text = read_file(merges_path);
  try {
    return parse_vocabulary(vocab_json, merges_text, options);
  } catch (const BpeError& e) {
    throw BpeError(e.kind(), vocab_path + " / " + merges_path + ": " + e.what());
  }
}

inline std::string vocabulary_json(const Vocabulary& vocab) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (TokenId id = 0; id < vocab.size(); ++id) {
    const auto& text = vocab.text(id);
    j[vocab.is_special(id) && detail::looks_special(text) ? text : bytes_to_unicode(text)] = id;
  }
  return j.dump(1) + "\n";
}

inline std::string merges_text(const Vocabulary& vocab) {
  std::string out = "#version: 0.2\n";
  for (const auto& rule : vocab.merges()) {
    out += bytes_to_unicode(rule.left);
    out += ' ';
    out += bytes_to_unicode(rule.right);
    out += '\n';
  }
  return out;
}

inline void save_vocabulary(const Vocabulary& vocab, const std::string& vocab_path,
                            const std::string& merges_path) {
  std::ofstream v(vocab_path, std::ios::binary);
  std::ofstream m(merges_path, std::ios::binary);
  if (!v || !m) throw DataError("cannot write vocabulary to " + vocab_path + " / " + merges_path);
  v << vocabulary_json(vocab);
  m << merges_text(vocab);
}

}  // namespace tokenlens::bpe
