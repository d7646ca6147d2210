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
#include <compare>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokenlens/align.hpp"
#include "tokenlens/error.hpp"
#include "tokenlens/parallel.hpp"
#include "tokenlens/scorer.hpp"
#include "tokenlens/tags.hpp"
#include "tokenlens/utf8.hpp"
#include "tokenlens/welford.hpp"

namespace tokenlens {

/// One prediction event: token at `position` given tokens [0, position).
struct LossRecord {
  std::string doc_id;
  std::size_t position = 0;
  TokenId token_id = 0;
  std::string text;
  double cross_entropy = 0.0;  // nats
  TokenTag tag;
  InvocationClass invocation_class = InvocationClass::kNone;

  friend bool operator==(const LossRecord&, const LossRecord&) = default;
};

class StreamMisaligned : public DataError {
 public:
  using DataError::DataError;
};

struct ScoreOptions {
  std::size_t max_context = 0;  // 0: whole prefix
};

namespace detail {

inline double checked_ce(double logprob, const std::string& doc_id, std::size_t pos) {
  if (std::isnan(logprob) || logprob > 0.0) {
    // allow rounding noise just above zero
    if (!(logprob > 0.0 && logprob < 1e-9)) {
      throw DataError("doc " + doc_id + " position " + std::to_string(pos) +
                      ": log-probability must be finite and <= 0");
    }
    return 0.0;
  }
  if (std::isinf(logprob)) {
    throw DataError("doc " + doc_id + " position " + std::to_string(pos) + ": log-probability is -inf");
  }
  return -logprob;
}

}  // namespace detail

/// Per-token cross-entropies for positions 1..n-1 under `scorer`.
/// `texts` (optional, same length as ids) fills LossRecord::text.
inline std::vector<LossRecord> score_document(const std::string& doc_id, std::span<const TokenId> ids,
                                              const Scorer& scorer, ScoreOptions opts = {},
                                              std::span<const std::string> texts = {}) {
  std::vector<LossRecord> out;
  if (ids.size() < 2) return out;
  out.reserve(ids.size() - 1);
  for (std::size_t i = 1; i < ids.size(); ++i) {
    std::size_t begin = 0;
    if (opts.max_context > 0 && i > opts.max_context) begin = i - opts.max_context;
    const double lp = scorer.logprob(ids.subspan(begin, i - begin), ids[i]);
    LossRecord r;
    r.doc_id = doc_id;
    r.position = i;
    r.token_id = ids[i];
    if (!texts.empty()) r.text = texts[i];
    r.cross_entropy = detail::checked_ce(lp, doc_id, i);
    out.push_back(std::move(r));
  }
  return out;
}

/// Log-probabilities produced outside this process for one document.
/// logprobs[i] = ln p(token_ids[i] | token_ids[0..i)); logprobs[0] is null,
/// and null elsewhere marks a position the provider did not score.
struct ExternalLogprobs {
  std::string doc_id;
  std::vector<TokenId> token_ids;
  std::vector<std::optional<double>> logprobs;
};

inline ExternalLogprobs parse_external_record(const nlohmann::json& j) {
  ExternalLogprobs e;
  try {
    e.doc_id = j.at("doc_id").get<std::string>();
    e.token_ids = j.at("token_ids").get<std::vector<TokenId>>();
    for (const auto& v : j.at("logprobs")) {
      if (v.is_null()) {
        e.logprobs.emplace_back(std::nullopt);
      } else {
        e.logprobs.emplace_back(v.get<double>());
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("external logprob record: ") + ex.what());
  }
  if (e.logprobs.size() != e.token_ids.size()) {
    throw StreamMisaligned("doc " + e.doc_id + ": token_ids and logprobs differ in length");
  }
  return e;
}

/// Reads a JSONL external stream. Errors carry the line number.
inline std::vector<ExternalLogprobs> load_external_logprobs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<ExternalLogprobs> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_external_record(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(located(path, lineno, ex.what()));
    } catch (const StreamMisaligned& ex) {
      throw StreamMisaligned(located(path, lineno, ex.what()));
    } catch (const DataError& ex) {
      throw DataError(located(path, lineno, ex.what()));
    }
  }
  return out;
}

/// Records from an external stream. The stream's token ids must be a prefix
/// of `ids` (providers may truncate to their max length).
inline std::vector<LossRecord> score_document(const std::string& doc_id, std::span<const TokenId> ids,
                                              const ExternalLogprobs& ext,
                                              std::span<const std::string> texts = {}) {
  if (ext.token_ids.size() > ids.size() || ext.logprobs.size() != ext.token_ids.size()) {
    throw StreamMisaligned("doc " + doc_id + ": external stream has " + std::to_string(ext.token_ids.size()) +
                           " tokens, document has " + std::to_string(ids.size()));
  }
  for (std::size_t i = 0; i < ext.token_ids.size(); ++i) {
    if (ext.token_ids[i] != ids[i]) {
      throw StreamMisaligned("doc " + doc_id + ": token id mismatch at position " + std::to_string(i));
    }
  }
  std::vector<LossRecord> out;
  for (std::size_t i = 1; i < ext.token_ids.size(); ++i) {
    if (!ext.logprobs[i]) continue;
    LossRecord r;
    r.doc_id = doc_id;
    r.position = i;
    r.token_id = ids[i];
    if (!texts.empty()) r.text = texts[i];
    r.cross_entropy = detail::checked_ce(*ext.logprobs[i], doc_id, i);
    out.push_back(std::move(r));
  }
  return out;
}

/// Copies each aligned token's tag onto the record at the same position.
inline void attach_tags(std::span<LossRecord> records, std::span<const AlignedToken> aligned) {
  if (!records.empty() && records.size() + 1 > aligned.size()) {
    throw DataError("attach_tags: " + std::to_string(records.size()) + " records but " +
                    std::to_string(aligned.size()) + " aligned tokens");
  }
  for (auto& r : records) {
    if (r.position >= aligned.size() || aligned[r.position].token.id != r.token_id) {
      throw DataError("attach_tags: record at position " + std::to_string(r.position) +
                      " does not match the alignment");
    }
    r.tag = aligned[r.position].tag;
    if (r.text.empty()) r.text = aligned[r.position].token.text;
  }
}

/// Copies per-token invocation classes (indexed like the tokens) onto records.
inline void attach_invocation_classes(std::span<LossRecord> records, std::span<const InvocationClass> classes) {
  for (auto& r : records) {
    if (r.position >= classes.size()) {
      throw DataError("attach_invocation_classes: position " + std::to_string(r.position) + " out of range");
    }
    r.invocation_class = classes[r.position];
  }
}

struct NodeClassKey {
  NodeTag tag;
  InvocationClass invocation_class = InvocationClass::kNone;

  friend bool operator==(const NodeClassKey&, const NodeClassKey&) = default;
  friend auto operator<=>(const NodeClassKey&, const NodeClassKey&) = default;
};

inline constexpr std::size_t kAggregateBlock = 4096;

/// Welford aggregation keyed by `key_of(record)` (an optional; nullopt skips
/// the record). Records are reduced in fixed blocks merged in block order, so
/// the result does not depend on `workers`.
template <class Key, class KeyFn>
std::map<Key, AggregateStats> aggregate_by(std::span<const LossRecord> records, KeyFn key_of,
                                           std::size_t workers = 1) {
  const std::size_t blocks = (records.size() + kAggregateBlock - 1) / kAggregateBlock;
  auto partials = parallel_map(blocks, workers, [&](std::size_t b) {
    std::map<Key, AggregateStats> m;
    const std::size_t end = std::min(records.size(), (b + 1) * kAggregateBlock);
    for (std::size_t i = b * kAggregateBlock; i < end; ++i) {
      if (auto k = key_of(records[i])) m[std::move(*k)].push(records[i].cross_entropy);
    }
    return m;
  });
  std::map<Key, AggregateStats> out;
  for (const auto& part : partials) {
    for (const auto& [k, s] : part) out[k].merge(s);
  }
  return out;
}

inline std::map<TokenId, AggregateStats> aggregate_by_token(std::span<const LossRecord> records,
                                                            std::size_t workers = 1) {
  return aggregate_by<TokenId>(records, [](const LossRecord& r) { return std::optional<TokenId>(r.token_id); },
                               workers);
}

/// WHITESPACE and UNALIGNED records are left out.
inline std::map<NodeTag, AggregateStats> aggregate_by_node(std::span<const LossRecord> records,
                                                           std::size_t workers = 1) {
  return aggregate_by<NodeTag>(
      records,
      [](const LossRecord& r) { return r.tag.is_node() ? std::optional<NodeTag>(r.tag.node) : std::nullopt; },
      workers);
}

inline std::map<NodeClassKey, AggregateStats> aggregate_by_node_class(std::span<const LossRecord> records,
                                                                      std::size_t workers = 1) {
  return aggregate_by<NodeClassKey>(
      records,
      [](const LossRecord& r) {
        return r.tag.is_node() ? std::optional<NodeClassKey>(NodeClassKey{r.tag.node, r.invocation_class})
                               : std::nullopt;
      },
      workers);
}

inline AggregateStats aggregate_all(std::span<const LossRecord> records, std::size_t workers = 1) {
  auto m = aggregate_by<int>(records, [](const LossRecord&) { return std::optional<int>(0); }, workers);
  return m.empty() ? AggregateStats{} : m.begin()->second;
}

inline double perplexity(const AggregateStats& stats) {
  if (stats.count() == 0) throw UsageError("perplexity: no records");
  return std::exp(stats.mean());
}

/// Loss record JSONL: {doc_id, position, token_id, text, cross_entropy,
/// node_type, parent_type, invocation_class}.
inline nlohmann::ordered_json loss_record_json(const LossRecord& r) {
  nlohmann::ordered_json j;
  j["doc_id"] = r.doc_id;
  j["position"] = r.position;
  j["token_id"] = r.token_id;
  j["text"] = to_valid_utf8(r.text);
  j["cross_entropy"] = r.cross_entropy;
  j["node_type"] = node_type_label(r.tag);
  if (r.tag.is_node()) {
    j["parent_type"] = r.tag.node.parent_type;
  } else {
    j["parent_type"] = nullptr;
  }
  j["invocation_class"] = std::string(to_string(r.invocation_class));
  return j;
}

inline std::string loss_record_line(const LossRecord& r) {
  return loss_record_json(r).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

inline LossRecord loss_record_from_json(const nlohmann::json& j) {
  LossRecord r;
  r.doc_id = j.at("doc_id").get<std::string>();
  r.position = j.at("position").get<std::size_t>();
  r.token_id = j.at("token_id").get<TokenId>();
  r.text = j.value("text", std::string{});
  r.cross_entropy = j.at("cross_entropy").get<double>();
  if (!std::isfinite(r.cross_entropy) || r.cross_entropy < 0.0) {
    throw DataError("cross_entropy must be finite and >= 0");
  }
  std::optional<std::string> parent;
  if (j.contains("parent_type") && !j.at("parent_type").is_null()) parent = j.at("parent_type").get<std::string>();
  r.tag = tag_from_labels(j.value("node_type", std::string(kUnalignedLabel)), parent);
  const auto cls = parse_invocation_class(j.value("invocation_class", std::string("NONE")));
  if (!cls) throw DataError("unknown invocation_class");
  r.invocation_class = *cls;
  return r;
}

inline std::vector<LossRecord> load_loss_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<LossRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(loss_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(located(path, lineno, ex.what()));
    } catch (const DataError& ex) {
      throw DataError(located(path, lineno, ex.what()));
    }
  }
  return out;
}

}  // namespace tokenlens
