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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tokenlens/align.hpp"
#include "tokenlens/builtins.hpp"
#include "tokenlens/error.hpp"
#include "tokenlens/parallel.hpp"
#include "tokenlens/syntax/python_parser.hpp"
#include "tokenlens/syntax/queries.hpp"
#include "tokenlens/tags.hpp"

namespace tokenlens {

struct CorpusFile {
  std::string repo_name;
  std::string path;
  std::string content;
  std::string license;

  [[nodiscard]] std::string doc_id() const { return repo_name + "/" + path; }

  friend bool operator==(const CorpusFile&, const CorpusFile&) = default;
};

inline CorpusFile corpus_file_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("corpus record is not a JSON object");
  CorpusFile f;
  for (auto [field, dest] : {std::pair{"repo_name", &f.repo_name}, std::pair{"path", &f.path},
                             std::pair{"content", &f.content}, std::pair{"license", &f.license}}) {
    const auto it = j.find(field);
    if (it == j.end()) throw DataError(std::string("missing field '") + field + "'");
    if (!it->is_string()) throw DataError(std::string("field '") + field + "' is not a string");
    *dest = it->get<std::string>();
  }
  return f;
}

inline nlohmann::ordered_json corpus_file_json(const CorpusFile& f) {
  nlohmann::ordered_json j;
  j["repo_name"] = f.repo_name;
  j["path"] = f.path;
  j["content"] = f.content;
  j["license"] = f.license;
  return j;
}

/// Parses corpus JSONL. `source` names the input in error messages.
inline std::vector<CorpusFile> parse_corpus(std::istream& in, const std::string& source) {
  std::vector<CorpusFile> out;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      CorpusFile f = corpus_file_from_json(nlohmann::json::parse(line));
      if (!seen.emplace(f.repo_name, f.path).second) {
        throw DataError("duplicate (repo_name, path): " + f.repo_name + ", " + f.path);
      }
      out.push_back(std::move(f));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(located(source, lineno, e.what()));
    } catch (const DataError& e) {
      throw DataError(located(source, lineno, e.what()));
    }
  }
  return out;
}

inline std::vector<CorpusFile> load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return parse_corpus(in, path);
}

inline void write_corpus(std::ostream& out, std::span<const CorpusFile> files) {
  for (const auto& f : files) {
    out << corpus_file_json(f).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

/// Reads a builtins list: one name per line, '#' starts a comment.
inline std::set<std::string> parse_builtins(std::istream& in) {
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    out.insert(line.substr(b, e - b + 1));
  }
  return out;
}

inline std::set<std::string> load_builtins(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return parse_builtins(in);
}

// ---------------------------------------------------------------------------
// Invocation classification

/// Declarations and call sites of one parsed file.
struct FileAnalysis {
  std::set<std::string> declarations;
  std::vector<syntax::Invocation> invocations;
};

inline FileAnalysis analyze_file(std::string_view content, const syntax::SyntaxProvider& provider) {
  const auto root = provider.parse(content);
  return FileAnalysis{syntax::extract_declarations(root, content), syntax::extract_invocations(root, content)};
}

inline std::vector<FileAnalysis> analyze_files(std::span<const CorpusFile> files,
                                               const syntax::SyntaxProvider& provider, std::size_t workers = 1) {
  return parallel_map(files.size(), workers, [&](std::size_t i) { return analyze_file(files[i].content, provider); });
}

struct ClassifiedCall {
  syntax::Invocation invocation;
  InvocationClass invocation_class = InvocationClass::kNone;

  friend bool operator==(const ClassifiedCall&, const ClassifiedCall&) = default;
};

/// Per file, every call site with its class. INTERNAL iff the name is
/// declared in a different file of the same repo; builtin and unnamed calls
/// are NONE; everything else EXTERNAL. `files` and `analyses` run in parallel.
inline std::vector<std::vector<ClassifiedCall>> classify_invocations(std::span<const CorpusFile> files,
                                                                     std::span<const FileAnalysis> analyses,
                                                                     const std::set<std::string>& builtins) {
  if (files.size() != analyses.size()) throw UsageError("classify_invocations: files/analyses length mismatch");
  // repo -> name -> number of files in the repo declaring it
  std::map<std::string, std::map<std::string, std::size_t>> declared;
  for (std::size_t i = 0; i < files.size(); ++i) {
    auto& names = declared[files[i].repo_name];
    for (const auto& d : analyses[i].declarations) ++names[d];
  }
  std::vector<std::vector<ClassifiedCall>> out(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto& names = declared[files[i].repo_name];
    const auto& own = analyses[i].declarations;
    for (const auto& inv : analyses[i].invocations) {
      InvocationClass cls = InvocationClass::kExternal;
      if (inv.name.empty() || builtins.contains(inv.name)) {
        cls = InvocationClass::kNone;
      } else if (const auto it = names.find(inv.name); it != names.end()) {
        const std::size_t elsewhere = it->second - (own.contains(inv.name) ? 1 : 0);
        if (elsewhere > 0) cls = InvocationClass::kInternal;
      }
      out[i].push_back(ClassifiedCall{inv, cls});
    }
  }
  return out;
}

inline std::vector<std::vector<ClassifiedCall>> classify_invocations(
    std::span<const CorpusFile> files, const std::set<std::string>& builtins = default_builtins(),
    const syntax::SyntaxProvider& provider = syntax::PythonSubsetProvider{}, std::size_t workers = 1) {
  const auto analyses = analyze_files(files, provider, workers);
  return classify_invocations(files, analyses, builtins);
}

/// Invocation class per aligned token. Only tokens whose parent_type is
/// `call` or `argument_list` can be classed; they take the class of the
/// innermost call containing their leaf (NONE if that call is a builtin).
inline std::vector<InvocationClass> tag_invocation_tokens(std::span<const AlignedToken> aligned,
                                                          std::span<const ClassifiedCall> calls) {
  std::vector<InvocationClass> out(aligned.size(), InvocationClass::kNone);
  for (std::size_t t = 0; t < aligned.size(); ++t) {
    const auto& a = aligned[t];
    if (!a.tag.is_node() || !a.leaf_span) continue;
    const auto& parent = a.tag.node.parent_type;
    if (parent != "call" && parent != "argument_list") continue;
    // calls are in pre-order: the last one containing the leaf is innermost
    const ClassifiedCall* innermost = nullptr;
    for (const auto& c : calls) {
      if (c.invocation.call_span.contains(*a.leaf_span)) innermost = &c;
    }
    if (innermost) out[t] = innermost->invocation_class;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Filter cascade

struct FilterConfig {
  double sample_fraction = 1.0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> max_chars = 4096;  // bytes; nullopt disables
  bool require_multi_file = false;
  bool require_internal_call = false;
};

struct FilterStage {
  std::string name;
  std::size_t surviving = 0;

  friend bool operator==(const FilterStage&, const FilterStage&) = default;
};

/// Surviving-file counts: input, sample, max_chars, multi_file, internal_call.
struct FilterTrace {
  std::vector<FilterStage> stages;

  friend bool operator==(const FilterTrace&, const FilterTrace&) = default;
};

inline nlohmann::ordered_json filter_trace_json(const FilterTrace& trace) {
  nlohmann::ordered_json stages = nlohmann::ordered_json::array();
  for (const auto& s : trace.stages) {
    nlohmann::ordered_json j;
    j["stage"] = s.name;
    j["surviving"] = s.surviving;
    stages.push_back(std::move(j));
  }
  nlohmann::ordered_json out;
  out["stages"] = std::move(stages);
  return out;
}

inline FilterTrace filter_trace_from_json(const nlohmann::json& j) {
  FilterTrace t;
  for (const auto& s : j.at("stages")) {
    t.stages.push_back(FilterStage{s.at("stage").get<std::string>(), s.at("surviving").get<std::size_t>()});
  }
  return t;
}

/// splitmix64(FNV-1a-64(repo_name \0 path) ^ seed).
inline std::uint64_t sample_hash(std::string_view repo_name, std::string_view path, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (unsigned char c : repo_name) feed(c);
  feed(0);
  for (unsigned char c : path) feed(c);
  std::uint64_t z = h ^ seed;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline bool sampled(const CorpusFile& f, double fraction, std::uint64_t seed) {
  if (fraction >= 1.0) return true;
  const double u = static_cast<double>(sample_hash(f.repo_name, f.path, seed)) * 0x1p-64;
  return u < fraction;
}

struct FilterResult {
  std::vector<CorpusFile> files;
  FilterTrace trace;
  /// Call sites of each surviving file, classified against every file that
  /// reached the internal-call stage (so declarations in dropped files of the
  /// same repo still count).
  std::vector<std::vector<ClassifiedCall>> calls;
};

/// sample -> max_chars -> multi-file repos -> internal-call presence.
/// Every stage appears in the trace even when disabled.
inline FilterResult filter_cascade(std::span<const CorpusFile> corpus, const FilterConfig& cfg,
                                   const std::set<std::string>& builtins = default_builtins(),
                                   const syntax::SyntaxProvider& provider = syntax::PythonSubsetProvider{},
                                   std::size_t workers = 1) {
  if (!(cfg.sample_fraction > 0.0 && cfg.sample_fraction <= 1.0)) {
    throw UsageError("sample fraction must be in (0, 1]");
  }
  FilterResult r;
  r.trace.stages.push_back({"input", corpus.size()});

  std::vector<CorpusFile> cur;
  for (const auto& f : corpus) {
    if (sampled(f, cfg.sample_fraction, cfg.seed)) cur.push_back(f);
  }
  r.trace.stages.push_back({"sample", cur.size()});

  if (cfg.max_chars) {
    std::erase_if(cur, [&](const CorpusFile& f) { return f.content.size() > *cfg.max_chars; });
  }
  r.trace.stages.push_back({"max_chars", cur.size()});

  if (cfg.require_multi_file) {
    std::map<std::string, std::size_t> per_repo;
    for (const auto& f : cur) ++per_repo[f.repo_name];
    std::erase_if(cur, [&](const CorpusFile& f) { return per_repo[f.repo_name] < 2; });
  }
  r.trace.stages.push_back({"multi_file", cur.size()});

  auto classified = classify_invocations(cur, builtins, provider, workers);
  if (cfg.require_internal_call) {
    std::vector<CorpusFile> kept;
    std::vector<std::vector<ClassifiedCall>> kept_calls;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const bool internal = std::any_of(classified[i].begin(), classified[i].end(), [](const ClassifiedCall& c) {
        return c.invocation_class == InvocationClass::kInternal;
      });
      if (internal) {
        kept.push_back(std::move(cur[i]));
        kept_calls.push_back(std::move(classified[i]));
      }
    }
    cur = std::move(kept);
    classified = std::move(kept_calls);
  }
  r.trace.stages.push_back({"internal_call", cur.size()});
  r.files = std::move(cur);
  r.calls = std::move(classified);
  return r;
}

}  // namespace tokenlens
