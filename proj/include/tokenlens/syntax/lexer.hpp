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

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "tokenlens/span.hpp"

namespace tokenlens::syntax {

enum class LexKind {
  kName,
  kNumber,
  kString,
  kOp,
  kNewline,
  kIndent,
  kDedent,
  kEnd,
  kComment,       // extra
  kContinuation,  // extra: backslash before a newline
  kError,         // unknown byte or unterminated string
};

struct LexToken {
  LexKind kind = LexKind::kEnd;
  ByteSpan span;
  std::string_view text;
  bool is_float = false;  // kNumber only
};

struct LexResult {
  std::vector<LexToken> tokens;  // significant tokens, ends with kEnd
  std::vector<LexToken> extras;  // comments and line continuations
};

inline bool is_python_keyword(std::string_view w) {
  static constexpr std::array<std::string_view, 35> kKeywords = {
      "False", "None",   "True",    "and",      "as",     "assert", "async", "await", "break",
      "class", "continue", "def",   "del",      "elif",   "else",   "except", "finally", "for",
      "from",  "global", "if",      "import",   "in",     "is",     "lambda", "nonlocal", "not",
      "or",    "pass",   "raise",   "return",   "try",    "while",  "with",  "yield"};
  for (auto k : kKeywords) {
    if (k == w) return true;
  }
  return false;
}

/// Tokenizer for the supported Python subset. Never fails: bytes it cannot
/// classify become kError tokens. INDENT/DEDENT use tab stops of 8 columns.
/// NEWLINE is suppressed inside brackets, except that a `def`/`class` line at
/// or left of the bracket-opening line's indentation closes all brackets.
class Lexer {
 public:
  explicit Lexer(std::string_view doc) : doc_(doc) {}

  LexResult run() {
    LexResult r;
    indents_.assign(1, 0);
    while (pos_ < doc_.size()) {
      if (at_line_start_) {
        if (depth_ > 0 && !bracket_reset()) {
          at_line_start_ = false;
        } else if (!start_logical_line(r)) {
          continue;
        }
      }
      if (pos_ >= doc_.size()) break;
      lex_one(r);
    }
    if (line_has_tokens_) push(r, LexKind::kNewline, pos_, pos_);
    while (indents_.size() > 1) {
      indents_.pop_back();
      push(r, LexKind::kDedent, doc_.size(), doc_.size());
    }
    push(r, LexKind::kEnd, doc_.size(), doc_.size());
    return r;
  }

 private:
  unsigned char at(std::size_t k) const { return static_cast<unsigned char>(doc_[k]); }

  void push(LexResult& r, LexKind kind, std::size_t b, std::size_t e, bool is_float = false) {
    LexToken t{kind, ByteSpan{b, e}, doc_.substr(b, e - b), is_float};
    if (kind == LexKind::kComment || kind == LexKind::kContinuation) {
      r.extras.push_back(t);
    } else {
      r.tokens.push_back(t);
    }
  }

  // Column of the first non-blank byte at or after pos_, and its offset.
  std::pair<std::size_t, std::size_t> measure_indent() const {
    std::size_t col = 0;
    std::size_t p = pos_;
    while (p < doc_.size()) {
      const auto c = at(p);
      if (c == ' ') {
        ++col;
      } else if (c == '\t') {
        col = (col / 8 + 1) * 8;
      } else if (c == '\f') {
        col = 0;
      } else {
        break;
      }
      ++p;
    }
    return {col, p};
  }

  bool bracket_reset() {
    auto [col, p] = measure_indent();
    std::size_t e = p;
    while (e < doc_.size() && bytes::is_word(at(e))) ++e;
    const std::string_view word = doc_.substr(p, e - p);
    if ((word == "def" || word == "class") && col <= opener_indent_) {
      depth_ = 0;
      return true;
    }
    return false;
  }

  // Handles indentation at the start of a depth-0 line. Returns false when
  // the line was blank (caller loops again).
  bool start_logical_line(LexResult& r) {
    if (line_has_tokens_) {
      // A bracket reset ends the pending logical line.
      push(r, LexKind::kNewline, pos_, pos_);
      line_has_tokens_ = false;
    }
    auto [col, p] = measure_indent();
    if (p >= doc_.size()) {
      pos_ = p;
      return false;
    }
    const auto c = at(p);
    if (c == '\n' || (c == '\r' && p + 1 < doc_.size() && at(p + 1) == '\n')) {
      pos_ = p + (c == '\r' ? 2 : 1);
      return false;
    }
    if (c == '#' || (c == '\\' && p + 1 < doc_.size() && (at(p + 1) == '\n' || at(p + 1) == '\r'))) {
      // Comment-only and continuation-only lines do not affect indentation.
      pos_ = p;
      at_line_start_ = false;
      return true;
    }
    if (col > indents_.back()) {
      indents_.push_back(col);
      push(r, LexKind::kIndent, p, p);
    } else {
      while (col < indents_.back()) {
        indents_.pop_back();
        push(r, LexKind::kDedent, p, p);
      }
      if (col > indents_.back()) {
        indents_.push_back(col);
        push(r, LexKind::kIndent, p, p);
      }
    }
    line_indent_ = col;
    pos_ = p;
    at_line_start_ = false;
    return true;
  }

  void lex_one(LexResult& r) {
    const auto c = at(pos_);
    if (c == '\n') {
      if (depth_ == 0 && line_has_tokens_) {
        push(r, LexKind::kNewline, pos_, pos_);
        line_has_tokens_ = false;
      }
      ++pos_;
      at_line_start_ = true;
      return;
    }
    if (bytes::is_space(c)) {
      ++pos_;
      return;
    }
    if (c == '#') {
      std::size_t e = pos_;
      while (e < doc_.size() && at(e) != '\n') ++e;
      std::size_t ce = e;
      while (ce > pos_ && bytes::is_space(at(ce - 1))) --ce;
      push(r, LexKind::kComment, pos_, ce);
      pos_ = e;
      return;
    }
    if (c == '\\') {
      std::size_t n = pos_ + 1;
      if (n < doc_.size() && at(n) == '\r') ++n;
      if (n < doc_.size() && at(n) == '\n') {
        push(r, LexKind::kContinuation, pos_, pos_ + 1);
        pos_ = n + 1;
        return;
      }
      error_byte(r);
      return;
    }
    line_has_tokens_ = true;
    if (bytes::is_word(c) && !bytes::is_digit(c)) {
      std::size_t e = pos_;
      while (e < doc_.size() && bytes::is_word(at(e))) ++e;
      if (e < doc_.size() && (at(e) == '\'' || at(e) == '"') && is_string_prefix(doc_.substr(pos_, e - pos_))) {
        lex_string(r, pos_, e);
        return;
      }
      push(r, LexKind::kName, pos_, e);
      pos_ = e;
      return;
    }
    if (bytes::is_digit(c) || (c == '.' && pos_ + 1 < doc_.size() && bytes::is_digit(at(pos_ + 1)))) {
      lex_number(r);
      return;
    }
    if (c == '\'' || c == '"') {
      lex_string(r, pos_, pos_);
      return;
    }
    lex_operator(r);
  }

  static bool is_string_prefix(std::string_view w) {
    if (w.size() > 2) return false;
    for (char ch : w) {
      const char l = static_cast<char>(ch | 0x20);
      if (l != 'r' && l != 'b' && l != 'u' && l != 'f') return false;
    }
    return true;
  }

  void lex_string(LexResult& r, std::size_t start, std::size_t quote) {
    const char q = doc_[quote];
    const bool triple = quote + 2 < doc_.size() && doc_[quote + 1] == q && doc_[quote + 2] == q;
    std::size_t p = quote + (triple ? 3 : 1);
    while (p < doc_.size()) {
      const char ch = doc_[p];
      if (ch == '\\') {
        p += 2;
        continue;
      }
      if (!triple && ch == '\n') break;
      if (ch == q) {
        if (!triple) {
          push(r, LexKind::kString, start, p + 1);
          pos_ = p + 1;
          return;
        }
        if (p + 2 < doc_.size() && doc_[p + 1] == q && doc_[p + 2] == q) {
          push(r, LexKind::kString, start, p + 3);
          pos_ = p + 3;
          return;
        }
      }
      ++p;
    }
    // Unterminated: up to end of line (single) or end of file (triple).
    p = std::min(p, doc_.size());
    std::size_t e = p;
    while (e > start && bytes::is_space(at(e - 1))) --e;
    push(r, LexKind::kError, start, e);
    pos_ = p;
  }

  void lex_number(LexResult& r) {
    std::size_t p = pos_;
    bool is_float = false;
    auto digits = [&](auto pred) {
      while (p < doc_.size() && (pred(at(p)) || at(p) == '_')) ++p;
    };
    auto dec = [](unsigned char ch) { return bytes::is_digit(ch); };
    if (at(p) == '0' && p + 1 < doc_.size() &&
        (at(p + 1) == 'x' || at(p + 1) == 'X' || at(p + 1) == 'o' || at(p + 1) == 'O' ||
         at(p + 1) == 'b' || at(p + 1) == 'B')) {
      p += 2;
      digits([](unsigned char ch) {
        return bytes::is_digit(ch) || (ch >= 'a' && ch <= 'f') || (ch >= 'A' && ch <= 'F');
      });
    } else {
      digits(dec);
      if (p < doc_.size() && at(p) == '.' && !(p + 1 < doc_.size() && at(p + 1) == '.')) {
        is_float = true;
        ++p;
        digits(dec);
      }
      if (p < doc_.size() && (at(p) == 'e' || at(p) == 'E')) {
        std::size_t q = p + 1;
        if (q < doc_.size() && (at(q) == '+' || at(q) == '-')) ++q;
        if (q < doc_.size() && bytes::is_digit(at(q))) {
          is_float = true;
          p = q;
          digits(dec);
        }
      }
    }
    if (p < doc_.size() && (at(p) == 'j' || at(p) == 'J' || at(p) == 'l' || at(p) == 'L')) ++p;
    push(r, LexKind::kNumber, pos_, p, is_float);
    pos_ = p;
  }

  void lex_operator(LexResult& r) {
    static constexpr std::array<std::string_view, 5> k3 = {"**=", "//=", ">>=", "<<=", "..."};
    static constexpr std::array<std::string_view, 19> k2 = {"->", ":=", "**", "//", ">>", "<<", "<=",
                                                            ">=", "==", "!=", "+=", "-=", "*=", "/=",
                                                            "%=", "&=", "|=", "^=", "@="};
    static constexpr std::string_view k1 = "+-*/%@&|^~<>()[]{},:;.=";
    const std::string_view rest = doc_.substr(pos_);
    for (auto op : k3) {
      if (rest.starts_with(op)) return emit_op(r, 3);
    }
    for (auto op : k2) {
      if (rest.starts_with(op)) return emit_op(r, 2);
    }
    if (k1.find(doc_[pos_]) != std::string_view::npos) return emit_op(r, 1);
    error_byte(r);
  }

  void emit_op(LexResult& r, std::size_t len) {
    const char c = doc_[pos_];
    if (len == 1 && (c == '(' || c == '[' || c == '{')) {
      if (depth_ == 0) opener_indent_ = line_indent_;
      ++depth_;
    } else if (len == 1 && (c == ')' || c == ']' || c == '}')) {
      if (depth_ > 0) --depth_;
    }
    push(r, LexKind::kOp, pos_, pos_ + len);
    pos_ += len;
  }

  void error_byte(LexResult& r) {
    line_has_tokens_ = true;
    push(r, LexKind::kError, pos_, pos_ + 1);
    ++pos_;
  }

  std::string_view doc_;
  std::size_t pos_ = 0;
  std::vector<std::size_t> indents_;
  std::size_t depth_ = 0;
  std::size_t line_indent_ = 0;
  std::size_t opener_indent_ = 0;
  bool at_line_start_ = true;
  bool line_has_tokens_ = false;
};

inline LexResult lex(std::string_view doc) { return Lexer(doc).run(); }

}  // namespace tokenlens::syntax
