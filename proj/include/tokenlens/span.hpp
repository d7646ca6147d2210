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
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string_view>

namespace tokenlens {

using TokenId = std::uint32_t;

/// Half-open byte interval [begin, end) into a document.
struct ByteSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  [[nodiscard]] constexpr std::size_t size() const noexcept { return end - begin; }
  [[nodiscard]] constexpr bool empty() const noexcept { return end == begin; }

  [[nodiscard]] constexpr bool contains(const ByteSpan& other) const noexcept {
    return begin <= other.begin && other.end <= end;
  }
  // Empty spans intersect nothing.
  [[nodiscard]] constexpr bool intersects(const ByteSpan& other) const noexcept {
    return !empty() && !other.empty() && begin < other.end && other.begin < end;
  }

  friend constexpr bool operator==(const ByteSpan&, const ByteSpan&) = default;
  friend constexpr auto operator<=>(const ByteSpan&, const ByteSpan&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const ByteSpan& s) {
  return os << '[' << s.begin << ',' << s.end << ')';
}

inline std::string_view slice(std::string_view doc, const ByteSpan& s) {
  return doc.substr(s.begin, s.size());
}

namespace bytes {

constexpr bool is_space(unsigned char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Identifier bytes. Bytes >= 0x80 count as word bytes so UTF-8 sequences
// stay inside one pre-token.
constexpr bool is_word(unsigned char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_' || c >= 0x80;
}

constexpr bool is_punct(unsigned char c) noexcept { return !is_space(c) && !is_word(c); }

constexpr bool is_digit(unsigned char c) noexcept { return c >= '0' && c <= '9'; }

}  // namespace bytes

/// `span` with leading and trailing whitespace bytes removed. An all-space
/// span collapses to the empty span at its end.
inline ByteSpan trim_whitespace(std::string_view doc, ByteSpan span) {
  std::size_t b = span.begin;
  std::size_t e = span.end;
  while (b < e && bytes::is_space(static_cast<unsigned char>(doc[b]))) ++b;
  while (e > b && bytes::is_space(static_cast<unsigned char>(doc[e - 1]))) --e;
  if (b == e) return ByteSpan{span.end, span.end};
  return ByteSpan{b, e};
}

}  // namespace tokenlens
