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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokenlens/corpus.hpp"
#include "tokenlens/loss.hpp"
#include "tokenlens/stats.hpp"
#include "tokenlens/tags.hpp"
#include "tokenlens/utf8.hpp"
#include "tokenlens/welford.hpp"

namespace tokenlens {

enum class Precision { kFull, kHuman };

inline std::string format_number(double v, Precision p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, p == Precision::kHuman ? "%.3f" : "%.17g", v);
  return buf;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// ---------------------------------------------------------------------------
// Aggregates artifact (output of `analyze`)

struct AggregateReport {
  AggregateStats overall;
  std::map<TokenId, AggregateStats> tokens;
  std::map<TokenId, std::string> token_text;
  std::map<NodeTag, AggregateStats> nodes;
  std::map<NodeClassKey, AggregateStats> node_classes;
};

inline AggregateReport build_aggregate_report(std::span<const LossRecord> records, std::size_t workers = 1) {
  AggregateReport r;
  r.overall = aggregate_all(records, workers);
  r.tokens = aggregate_by_token(records, workers);
  r.nodes = aggregate_by_node(records, workers);
  r.node_classes = aggregate_by_node_class(records, workers);
  for (const auto& rec : records) r.token_text.try_emplace(rec.token_id, rec.text);
  return r;
}

namespace detail {

inline void put_stats(nlohmann::ordered_json& j, const AggregateStats& s) {
  j["count"] = s.count();
  j["mean"] = s.mean();
  j["m2"] = s.m2();
  j["std"] = s.stddev();
}

inline AggregateStats get_stats(const nlohmann::json& j) {
  return AggregateStats(j.at("count").get<std::uint64_t>(), j.at("mean").get<double>(), j.at("m2").get<double>());
}

}  // namespace detail

inline nlohmann::ordered_json aggregate_report_json(const AggregateReport& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json overall;
  detail::put_stats(overall, r.overall);
  j["overall"] = std::move(overall);
  auto& tokens = j["tokens"] = nlohmann::ordered_json::array();
  for (const auto& [id, s] : r.tokens) {
    nlohmann::ordered_json e;
    e["token_id"] = id;
    const auto t = r.token_text.find(id);
    e["text"] = t == r.token_text.end() ? std::string{} : to_valid_utf8(t->second);
    detail::put_stats(e, s);
    tokens.push_back(std::move(e));
  }
  auto& nodes = j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& [tag, s] : r.nodes) {
    nlohmann::ordered_json e;
    e["parent_type"] = tag.parent_type;
    e["node_type"] = tag.node_type;
    detail::put_stats(e, s);
    nodes.push_back(std::move(e));
  }
  auto& nc = j["node_classes"] = nlohmann::ordered_json::array();
  for (const auto& [key, s] : r.node_classes) {
    nlohmann::ordered_json e;
    e["parent_type"] = key.tag.parent_type;
    e["node_type"] = key.tag.node_type;
    e["class"] = std::string(to_string(key.invocation_class));
    detail::put_stats(e, s);
    nc.push_back(std::move(e));
  }
  return j;
}

inline AggregateReport aggregate_report_from_json(const nlohmann::json& j) {
  try {
    AggregateReport r;
    r.overall = detail::get_stats(j.at("overall"));
    for (const auto& e : j.at("tokens")) {
      const auto id = e.at("token_id").get<TokenId>();
      r.tokens[id] = detail::get_stats(e);
      r.token_text[id] = e.value("text", std::string{});
    }
    for (const auto& e : j.at("nodes")) {
      r.nodes[NodeTag{e.at("parent_type").get<std::string>(), e.at("node_type").get<std::string>()}] =
          detail::get_stats(e);
    }
    for (const auto& e : j.at("node_classes")) {
      const auto cls = parse_invocation_class(e.at("class").get<std::string>());
      if (!cls) throw DataError("aggregates: unknown class");
      NodeClassKey key{NodeTag{e.at("parent_type").get<std::string>(), e.at("node_type").get<std::string>()}, *cls};
      r.node_classes[key] = detail::get_stats(e);
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("aggregates: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Rankings

inline std::string ranked_tokens_csv(std::span<const RankedKey<TokenId>> rows,
                                     const std::map<TokenId, std::string>& text, Precision p = Precision::kFull) {
  std::string out = "rank,token_id,text,count,mean_ce,std_ce\n";
  std::size_t rank = 0;
  for (const auto& r : rows) {
    const auto t = text.find(r.key);
    out += std::to_string(++rank) + "," + std::to_string(r.key) + "," +
           csv_field(t == text.end() ? std::string_view{} : std::string_view(t->second)) + "," +
           std::to_string(r.count) + "," + format_number(r.mean, p) + "," + format_number(r.stddev, p) + "\n";
  }
  return out;
}

inline std::string ranked_nodes_csv(std::span<const RankedKey<NodeTag>> rows, Precision p = Precision::kFull) {
  std::string out = "rank,parent_type,node_type,count,mean_ce,std_ce\n";
  std::size_t rank = 0;
  for (const auto& r : rows) {
    out += std::to_string(++rank) + "," + csv_field(r.key.parent_type) + "," + csv_field(r.key.node_type) + "," +
           std::to_string(r.count) + "," + format_number(r.mean, p) + "," + format_number(r.stddev, p) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Internal vs external summary

struct SummaryRow {
  std::string parent_type;
  std::string node_type;
  InvocationClass invocation_class = InvocationClass::kNone;
  std::uint64_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

/// Totals for one class. `mean`/`stddev` pool every record; `macro_mean` and
/// `macro_stddev` are the unweighted mean and population std of the class's
/// per-row means.
struct ClassSummary {
  InvocationClass invocation_class = InvocationClass::kNone;
  std::uint64_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double macro_mean = 0.0;
  double macro_stddev = 0.0;

  friend bool operator==(const ClassSummary&, const ClassSummary&) = default;
};

struct InvocationSummary {
  std::vector<SummaryRow> rows;
  ClassSummary internal{InvocationClass::kInternal};
  ClassSummary external{InvocationClass::kExternal};

  friend bool operator==(const InvocationSummary&, const InvocationSummary&) = default;
};

/// Recomputes both summary rows from `rows` alone. Record-level mean/std
/// need the per-row M2, which is rebuilt from each row's count and std.
inline void summarize_classes(InvocationSummary& s) {
  for (ClassSummary* cs : {&s.internal, &s.external}) {
    AggregateStats pooled;
    AggregateStats macro;
    for (const auto& r : s.rows) {
      if (r.invocation_class != cs->invocation_class) continue;
      const double n = static_cast<double>(r.count);
      pooled.merge(AggregateStats(r.count, r.mean, r.stddev * r.stddev * n));
      macro.push(r.mean);
    }
    cs->count = pooled.count();
    cs->mean = pooled.mean();
    cs->stddev = pooled.stddev();
    cs->macro_mean = macro.mean();
    cs->macro_stddev = macro.stddev();
  }
}

/// One row per observed (parent, node, class) with class INTERNAL or
/// EXTERNAL, plus a summary per class.
inline InvocationSummary invocation_summary(const std::map<NodeClassKey, AggregateStats>& aggregates) {
  InvocationSummary s;
  AggregateStats pooled_in, pooled_ex;
  for (const auto& [key, st] : aggregates) {
    if (key.invocation_class == InvocationClass::kNone || st.count() == 0) continue;
    s.rows.push_back(SummaryRow{key.tag.parent_type, key.tag.node_type, key.invocation_class, st.count(), st.mean(),
                                st.stddev()});
    (key.invocation_class == InvocationClass::kInternal ? pooled_in : pooled_ex).merge(st);
  }
  summarize_classes(s);
  // exact pooled values straight from M2 rather than count*std^2
  s.internal.mean = pooled_in.mean();
  s.internal.stddev = pooled_in.stddev();
  s.external.mean = pooled_ex.mean();
  s.external.stddev = pooled_ex.stddev();
  return s;
}

inline nlohmann::ordered_json invocation_summary_json(const InvocationSummary& s) {
  nlohmann::ordered_json j;
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : s.rows) {
    nlohmann::ordered_json e;
    e["parent_type"] = r.parent_type;
    e["node_type"] = r.node_type;
    e["class"] = std::string(to_string(r.invocation_class));
    e["count"] = r.count;
    e["mean_ce"] = r.mean;
    e["std_ce"] = r.stddev;
    rows.push_back(std::move(e));
  }
  auto& summary = j["summary"] = nlohmann::ordered_json::array();
  for (const ClassSummary* cs : {&s.internal, &s.external}) {
    nlohmann::ordered_json e;
    e["class"] = std::string(to_string(cs->invocation_class));
    e["count"] = cs->count;
    e["mean_ce"] = cs->mean;
    e["std_ce"] = cs->stddev;
    e["macro_mean_ce"] = cs->macro_mean;
    e["macro_std_ce"] = cs->macro_stddev;
    summary.push_back(std::move(e));
  }
  return j;
}

inline InvocationSummary invocation_summary_from_json(const nlohmann::json& j) {
  try {
    InvocationSummary s;
    for (const auto& e : j.at("rows")) {
      const auto cls = parse_invocation_class(e.at("class").get<std::string>());
      if (!cls) throw DataError("summary: unknown class");
      s.rows.push_back(SummaryRow{e.at("parent_type").get<std::string>(), e.at("node_type").get<std::string>(), *cls,
                                  e.at("count").get<std::uint64_t>(), e.at("mean_ce").get<double>(),
                                  e.at("std_ce").get<double>()});
    }
    for (const auto& e : j.at("summary")) {
      const auto cls = parse_invocation_class(e.at("class").get<std::string>());
      if (cls != InvocationClass::kInternal && cls != InvocationClass::kExternal) {
        throw DataError("summary: summary class must be INTERNAL or EXTERNAL");
      }
      ClassSummary& cs = *cls == InvocationClass::kInternal ? s.internal : s.external;
      cs.count = e.at("count").get<std::uint64_t>();
      cs.mean = e.at("mean_ce").get<double>();
      cs.stddev = e.at("std_ce").get<double>();
      cs.macro_mean = e.value("macro_mean_ce", 0.0);
      cs.macro_stddev = e.value("macro_std_ce", 0.0);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("summary: ") + e.what());
  }
}

/// Rows, then one "*,*,CLASS" line per class. The macro columns are only
/// filled on the class lines.
inline std::string invocation_summary_csv(const InvocationSummary& s, Precision p = Precision::kFull) {
  std::string out = "parent_type,node_type,class,count,mean_ce,std_ce,macro_mean_ce,macro_std_ce\n";
  for (const auto& r : s.rows) {
    out += csv_field(r.parent_type) + "," + csv_field(r.node_type) + "," + std::string(to_string(r.invocation_class)) +
           "," + std::to_string(r.count) + "," + format_number(r.mean, p) + "," + format_number(r.stddev, p) + ",,\n";
  }
  for (const ClassSummary* cs : {&s.internal, &s.external}) {
    out += "*,*," + std::string(to_string(cs->invocation_class)) + "," + std::to_string(cs->count) + "," +
           format_number(cs->mean, p) + "," + format_number(cs->stddev, p) + "," + format_number(cs->macro_mean, p) +
           "," + format_number(cs->macro_stddev, p) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Method-name frequencies

struct NameFrequencies {
  std::map<std::string, std::uint64_t> internal;
  std::map<std::string, std::uint64_t> external;

  friend bool operator==(const NameFrequencies&, const NameFrequencies&) = default;
};

inline NameFrequencies name_frequencies(std::span<const std::vector<ClassifiedCall>> per_file) {
  NameFrequencies f;
  for (const auto& calls : per_file) {
    for (const auto& c : calls) {
      if (c.invocation_class == InvocationClass::kInternal) ++f.internal[c.invocation.name];
      if (c.invocation_class == InvocationClass::kExternal) ++f.external[c.invocation.name];
    }
  }
  return f;
}

/// name,count sorted by count descending, then name.
inline std::string frequencies_csv(const std::map<std::string, std::uint64_t>& table) {
  std::vector<std::pair<std::string, std::uint64_t>> rows(table.begin(), table.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::string out = "name,count\n";
  for (const auto& [name, count] : rows) out += csv_field(name) + "," + std::to_string(count) + "\n";
  return out;
}

}  // namespace tokenlens
