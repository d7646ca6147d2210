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

// tokenlens command-line front end. Every subcommand reads and writes plain
// files (JSON, JSON Lines, CSV) so stages can be rerun independently.

#include <array>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif
#include <nlohmann/json.hpp>

#include "tokenlens.hpp"

namespace tl = tokenlens;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

/// An error annotated with the document or file it came from. Keeps the exit
/// code of the original error.
class ContextError : public tl::Error {
 public:
  ContextError(const std::string& where, const tl::Error& e)
      : tl::Error(where + ": " + e.what()), code_(e.exit_code()) {}
  [[nodiscard]] int exit_code() const noexcept override { return code_; }

 private:
  int code_;
};

struct Globals {
  std::size_t threads = tl::default_workers();
  std::string syntax_provider;
};

std::unique_ptr<tl::syntax::SyntaxProvider> make_provider(const Globals& g) {
  if (g.syntax_provider.empty()) return std::make_unique<tl::syntax::PythonSubsetProvider>();
  return std::make_unique<tl::syntax::CommandSyntaxProvider>(g.syntax_provider);
}

void emit(const std::string& path, const std::string& data) {
  if (path.empty() || path == "-") {
    std::cout << data;
    std::cout.flush();
  } else {
    tl::write_file(path, data);
  }
}

void warn(const std::string& msg) { std::cerr << "tokenlens: warning: " << msg << '\n'; }

std::string dump_line(const ordered_json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
}

/// Runs f(i) over documents, tagging any library error with the doc id.
template <class F>
auto per_document(const std::vector<tl::CorpusFile>& files, std::size_t threads, F&& f) {
  return tl::parallel_map(files.size(), threads, [&](std::size_t i) {
    try {
      return f(i);
    } catch (const ContextError&) {
      throw;
    } catch (const tl::Error& e) {
      throw ContextError(files[i].doc_id(), e);
    }
  });
}

struct VocabArgs {
  std::string vocab;
  std::string merges;
  bool no_pretokenize = false;

  void add(CLI::App* cmd, bool required = true) {
    auto* v = cmd->add_option("--vocab", vocab, "vocab.json (byte-level token strings)");
    auto* m = cmd->add_option("--merges", merges, "merges.txt");
    if (required) {
      v->required();
      m->required();
    }
    cmd->add_flag("--no-pretokenize", no_pretokenize, "let merges cross whitespace/punctuation boundaries");
  }
  [[nodiscard]] tl::bpe::Vocabulary load() const { return tl::bpe::load_vocabulary(vocab, merges); }
  [[nodiscard]] tl::bpe::EncodeOptions encode_options() const { return {.pretokenize = !no_pretokenize}; }
};

std::set<std::string> load_builtins_or_default(const std::string& path) {
  return path.empty() ? tl::default_builtins() : tl::load_builtins(path);
}

// ---------------------------------------------------------------------------
// train-bpe

struct TrainBpeCmd {
  std::string corpus;
  std::size_t vocab_size = 1024;
  std::uint64_t min_pair_frequency = 2;
  std::string out_dir = ".";

  void add(CLI::App& app, std::function<int()>& action) {
    auto* cmd = app.add_subcommand("train-bpe", "Learn a byte-level BPE vocabulary from a corpus");
    cmd->add_option("--corpus", corpus, "corpus JSONL")->required();
    cmd->add_option("--vocab-size", vocab_size, "target vocabulary size")->capture_default_str();
    cmd->add_option("--min-pair-frequency", min_pair_frequency)->capture_default_str();
    cmd->add_option("--out-dir", out_dir, "writes vocab.json and merges.txt here")->capture_default_str();
    cmd->callback([this, &action] { action = [this] { return run(); }; });
  }

  int run() const {
    const auto files = tl::load_corpus(corpus);
    std::vector<std::string> docs;
    docs.reserve(files.size());
    for (const auto& f : files) docs.push_back(f.content);
    tl::bpe::TrainOptions opts;
    opts.target_vocab_size = vocab_size;
    opts.min_pair_frequency = min_pair_frequency;
    const auto vocab = tl::bpe::train_bpe(docs, opts);
    std::filesystem::create_directories(out_dir);
    tl::bpe::save_vocabulary(vocab, out_dir + "/vocab.json", out_dir + "/merges.txt");
    std::cerr << "tokenlens: vocabulary of " << vocab.size() << " tokens written to " << out_dir << '\n';
    return 0;
  }
};

// ---------------------------------------------------------------------------
// parse

struct ParseCmd {
  std::string file;
  std::string corpus;
  bool leaves = false;
  std::string output;

  void add(CLI::App& app, const Globals& g, std::function<int()>& action) {
    auto* cmd = app.add_subcommand("parse", "Print the syntax tree (or leaf tags) of a file or corpus");
    cmd->add_option("file", file, "Python source file (stdin when omitted)");
    cmd->add_option("--corpus", corpus, "corpus JSONL; one output line per document")->excludes("file");
    cmd->add_flag("--leaves", leaves, "print leaves as [parent_type, node_type, begin, end]");
    cmd->add_option("-o,--output", output);
    cmd->callback([this, &g, &action] { action = [this, &g] { return run(g); }; });
  }

  static ordered_json leaves_record(const std::string& doc_id, const tl::syntax::SyntaxNode& root) {
    ordered_json j;
    j["doc_id"] = doc_id;
    ordered_json arr = ordered_json::array();
    for (const auto& l : tl::syntax::leaves(root)) {
      arr.push_back({l.tag.parent_type, l.tag.node_type, l.span.begin, l.span.end});
    }
    j["leaves"] = std::move(arr);
    return j;
  }

  int run(const Globals& g) const {
    const auto provider = make_provider(g);
    std::string out;
    if (!corpus.empty()) {
      const auto files = tl::load_corpus(corpus);
      const auto lines = per_document(files, g.threads, [&](std::size_t i) {
        const auto root = provider->parse(files[i].content);
        return leaves ? dump_line(leaves_record(files[i].doc_id(), root)) : dump_line(tl::syntax::tree_to_json(root));
      });
      for (const auto& l : lines) out += l;
    } else {
      std::string doc;
      if (file.empty()) {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        doc = ss.str();
      } else {
        doc = tl::read_file(file);
      }
      tl::syntax::SyntaxNode root;
      try {
        root = provider->parse(doc);
      } catch (const tl::Error& e) {
        throw ContextError(file.empty() ? "<stdin>" : file, e);
      }
      out = leaves ? dump_line(leaves_record(file, root)) : dump_line(tl::syntax::tree_to_json(root));
    }
    emit(output, out);
    return 0;
  }
};

// ---------------------------------------------------------------------------
// tokenize

struct TokenizeCmd {
  std::string corpus;
  VocabArgs vocab;
  std::string output;

  void add(CLI::App& app, const Globals& g, std::function<int()>& action) {
    auto* cmd = app.add_subcommand("tokenize", "Encode a corpus; one token dump line per document");
    cmd->add_option("--corpus", corpus, "corpus JSONL")->required();
    vocab.add(cmd);
    cmd->add_option("-o,--output", output);
    cmd->callback([this, &g, &action] { action = [this, &g] { return run(g); }; });
  }

  int run(const Globals& g) const {
    const auto files = tl::load_corpus(corpus);
    const auto v = vocab.load();
    const auto opts = vocab.encode_options();
    const auto lines = per_document(files, g.threads, [&](std::size_t i) {
      const auto tokens = tl::bpe::encode(files[i].content, v, opts);
      ordered_json j;
      j["doc_id"] = files[i].doc_id();
      ordered_json ids = ordered_json::array();
      ordered_json spans = ordered_json::array();
      for (const auto& t : tokens) {
        ids.push_back(t.id);
        spans.push_back({t.raw_span.begin, t.raw_span.end});
      }
      j["token_ids"] = std::move(ids);
      j["raw_spans"] = std::move(spans);
      return dump_line(j);
    });
    std::string out;
    for (const auto& l : lines) out += l;
    emit(output, out);
    return 0;
  }
};

struct TokenDump {
  std::string doc_id;
  std::vector<tl::TokenId> ids;
};

std::vector<TokenDump> load_token_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tl::DataError("cannot open " + path);
  std::vector<TokenDump> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      out.push_back({j.at("doc_id").get<std::string>(), j.at("token_ids").get<std::vector<tl::TokenId>>()});
    } catch (const json::exception& e) {
      throw tl::DataError(tl::located(path, lineno, e.what()));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// align

struct AlignCmd {
  std::string file;
  std::string corpus;
  VocabArgs vocab;
  std::string output;

  void add(CLI::App& app, const Globals& g, std::function<int()>& action) {
    auto* cmd = app.add_subcommand("align", "Tag every token with the syntax leaf it falls in");
    cmd->add_option("--file", file, "single source file; records carry no doc_id");
    cmd->add_option("--corpus", corpus, "corpus JSONL; records carry doc_id")->excludes("--file");
    vocab.add(cmd);
    cmd->add_option("-o,--output", output);
    cmd->callback([this, &g, &action] { action = [this, &g] { return run(g); }; });
  }

  int run(const Globals& g) const {
    if (file.empty() == corpus.empty()) throw tl::UsageError("align: give exactly one of --file or --corpus");
    const auto provider = make_provider(g);
    const auto v = vocab.load();
    const auto opts = vocab.encode_options();
    std::string out;
    if (!file.empty()) {
      const std::string doc = tl::read_file(file);
      try {
        out = tl::alignment_jsonl(tl::align_document(doc, v, *provider, opts));
      } catch (const tl::Error& e) {
        throw ContextError(file, e);
      }
    } else {
      const auto files = tl::load_corpus(corpus);
      const auto parts = per_document(files, g.threads, [&](std::size_t i) {
        std::string s;
        for (const auto& a : tl::align_document(files[i].content, v, *provider, opts)) {
          ordered_json j;
          j["doc_id"] = files[i].doc_id();
          const ordered_json rec = tl::alignment_record(a);
          for (const auto& [k, val] : rec.items()) j[k] = val;
          s += dump_line(j);
        }
        return s;
      });
      for (const auto& p : parts) out += p;
    }
    emit(output, out);
    return 0;
  }
};

// ---------------------------------------------------------------------------
// check-tokenizer

struct CheckTokenizerCmd {
  VocabArgs vocab;
  std::string corpus;
  std::string output;

  void add(CLI::App& app, const Globals& g, std::function<int()>& action) {
    auto* cmd = app.add_subcommand("check-tokenizer",
                                   "Report tokens that cross syntax boundaries; exit 3 if any are found");
    vocab.add(cmd);
    cmd->add_option("--corpus", corpus, "also align every document of this corpus");
    cmd->add_option("-o,--output", output);
    cmd->callback([this, &g, &action] { action = [this, &g] { return run(g); }; });
  }

  int run(const Globals& g) const {
    const auto v = vocab.load();
    ordered_json report;
    report["vocab_size"] = v.size();
    ordered_json viol = ordered_json::array();
    for (const auto& bv : tl::bpe::check_boundary_property(v)) {
      viol.push_back(ordered_json{{"token_id", bv.id}, {"text", bv.text}});
    }
    report["boundary_violations"] = viol;
    bool incompatible = !viol.empty();
    if (!corpus.empty()) {
      const auto provider = make_provider(g);
      const auto opts = vocab.encode_options();
      const auto files = tl::load_corpus(corpus);
      const auto failures = tl::parallel_map(files.size(), g.threads, [&](std::size_t i) -> std::optional<std::string> {
        try {
          (void)tl::align_document(files[i].content, v, *provider, opts);
          return std::nullopt;
        } catch (const tl::TokenCrossesNodeBoundary& e) {
          return std::string(e.what());
        }
      });
      ordered_json docs = ordered_json::array();
      for (std::size_t i = 0; i < files.size(); ++i) {
        if (failures[i]) docs.push_back(ordered_json{{"doc_id", files[i].doc_id()}, {"error", *failures[i]}});
      }
      report["documents_checked"] = files.size();
      report["crossing_documents"] = docs;
      incompatible = incompatible || !docs.empty();
    }
    report["compatible"] = !incompatible;
    emit(output, dump_line(report));
    if (incompatible) {
      std::cerr << "tokenlens: tokenizer is incompatible with syntax-aligned analysis\n";
      return 3;
    }
    return 0;
  }
};

// ---------------------------------------------------------------------------
// fit-lm

struct FitLmCmd {
  std::string tokens;
  std::string corpus;
  VocabArgs vocab;
  std::size_t vocab_size = 0;
  std::size_t order = 3;
  std::vector<double> lambdas;
  std::string output;

  void add(CLI::App& app, const Globals& g, std::function<int()>& action) {
    auto* cmd = app.add_subcommand("fit-lm", "Train the interpolated n-gram model");
    auto* t = cmd->add_option("--tokens", tokens, "token dump from `tokenize`");
    cmd->add_option("--corpus", corpus, "corpus JSONL (tokenized with --vocab/--merges)")->excludes(t);
    vocab.add(cmd, false);
    cmd->add_option("--vocab-size", vocab_size, "vocabulary size when no --vocab is given");
    cmd->add_option("--order", order)->capture_default_str();
    cmd->add_option("--lambdas", lambdas, "one interpolation weight per order, lowest order first");
    cmd->add_option("-o,--output", output, "model JSON")->required();
    cmd->callback([this, &g, &action] { action = [this, &g] { return run(g); }; });
  }

  int run(const Globals& g) const {
    if (tokens.empty() == corpus.empty()) throw tl::UsageError("fit-lm: give exactly one of --tokens or --corpus");
    std::optional<tl::bpe::Vocabulary> v;
    if (!vocab.vocab.empty() || !vocab.merges.empty()) {
      if (vocab.vocab.empty() || vocab.merges.empty()) throw tl::UsageError("fit-lm: --vocab needs --merges");
      v = vocab.load();
    }
    std::size_t V = vocab_size;
    if (v) V = v->size();
    if (V == 0) throw tl::UsageError("fit-lm: give --vocab/--merges or --vocab-size");

    std::vector<std::vector<tl::TokenId>> seqs;
    if (!tokens.empty()) {
      for (auto& d : load_token_dump(tokens)) seqs.push_back(std::move(d.ids));
    } else {
      if (!v) throw tl::UsageError("fit-lm: --corpus needs --vocab/--merges");
      const auto files = tl::load_corpus(corpus);
      const auto opts = vocab.encode_options();
      seqs = per_document(files, g.threads, [&](std::size_t i) {
        return tl::bpe::token_ids(tl::bpe::encode(files[i].content, *v, opts));
      });
    }
    tl::NgramOptions opts;
    opts.order = order;
    opts.lambdas = lambdas;
    const auto model = tl::NgramModel::fit(seqs, V, opts);
    model.save(output);
    return 0;
  }
};

/// Call sites grouped by doc_id, in file order.
std::map<std::string, std::vector<tl::ClassifiedCall>> load_calls(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tl::DataError("cannot open " + path);
  std::map<std::string, std::vector<tl::ClassifiedCall>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      tl::ClassifiedCall c;
      c.invocation.name = j.at("name").get<std::string>();
      const auto cls = tl::parse_invocation_class(j.at("class").get<std::string>());
      if (!cls) throw tl::DataError("unknown class " + j.at("class").dump());
      c.invocation_class = *cls;
      const auto span = j.at("call_span").get<std::array<std::size_t, 2>>();
      if (span[0] > span[1]) throw tl::DataError("call_span begins after it ends");
      c.invocation.call_span = tl::ByteSpan{span[0], span[1]};
      out[j.at("doc_id").get<std::string>()].push_back(std::move(c));
    } catch (const json::exception& e) {
      throw tl::DataError(tl::located(path, lineno, e.what()));
    } catch (const tl::DataError& e) {
      throw tl::DataError(tl::located(path, lineno, e.what()));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// score

struct ScoreCmd {
  std::string corpus;
  VocabArgs vocab;
  std::string model;
  std::string external;
  std::size_t max_context = 0;
  std::string builtins;
  std::string calls;
  std::string output;

  void add(CLI::App& app, const Globals& g, std::function<int()>& action) {
    auto* cmd = app.add_subcommand("score", "Per-token cross-entropy records with syntax tags and call classes");
    cmd->add_option("--corpus", corpus, "corpus JSONL")->required();
    vocab.add(cmd);
    auto* m = cmd->add_option("--model", model, "n-gram model from `fit-lm`");
    cmd->add_option("--external", external, "JSONL of {doc_id, token_ids, logprobs} from another model")
        ->excludes(m);
    cmd->add_option("--max-context", max_context, "truncate the n-gram context (0: whole prefix)");
    auto* b = cmd->add_option("--builtins", builtins, "builtin names file (default: bundled list)");
    cmd->add_option("--calls", calls, "classified call sites from `pipeline --calls` (default: classify here)")
        ->excludes(b);
    cmd->add_option("-o,--output", output, "loss records JSONL")->required();
    cmd->callback([this, &g, &action] { action = [this, &g] { return run(g); }; });
  }

  int run(const Globals& g) const {
    if (model.empty() == external.empty()) throw tl::UsageError("score: give exactly one of --model or --external");
    const auto files = tl::load_corpus(corpus);
    const auto v = vocab.load();
    const auto opts = vocab.encode_options();
    const auto provider = make_provider(g);

    std::optional<tl::NgramModel> lm;
    std::map<std::string, tl::ExternalLogprobs> streams;
    if (!model.empty()) {
      lm = tl::NgramModel::load(model);
      if (lm->vocab_size() != v.size()) {
        throw tl::DataError(model + ": model vocab_size " + std::to_string(lm->vocab_size()) +
                            " does not match tokenizer size " + std::to_string(v.size()));
      }
    } else {
      for (auto& e : tl::load_external_logprobs(external)) {
        std::string id = e.doc_id;
        if (!streams.emplace(id, std::move(e)).second) throw tl::DataError(external + ": duplicate doc_id " + id);
      }
    }
    if (files.empty()) warn("no documents to score; writing an empty record file");

    std::vector<std::vector<tl::ClassifiedCall>> doc_calls;
    if (calls.empty()) {
      const auto analyses = per_document(files, g.threads, [&](std::size_t i) {
        return tl::analyze_file(files[i].content, *provider);
      });
      doc_calls = tl::classify_invocations(files, analyses, load_builtins_or_default(builtins));
    } else {
      auto by_doc = load_calls(calls);
      for (const auto& f : files) {
        const auto it = by_doc.find(f.doc_id());
        doc_calls.push_back(it == by_doc.end() ? std::vector<tl::ClassifiedCall>{} : std::move(it->second));
      }
    }

    std::size_t missing = 0;
    for (const auto& f : files) {
      if (!lm && !streams.contains(f.doc_id())) ++missing;
    }
    if (missing > 0) warn(std::to_string(missing) + " document(s) have no external stream and were skipped");

    const auto parts = per_document(files, g.threads, [&](std::size_t i) {
      const auto& f = files[i];
      const auto aligned = tl::align_document(f.content, v, *provider, opts);
      std::vector<tl::TokenId> ids;
      std::vector<std::string> texts;
      ids.reserve(aligned.size());
      texts.reserve(aligned.size());
      for (const auto& a : aligned) {
        ids.push_back(a.token.id);
        texts.push_back(a.token.text);
      }
      std::vector<tl::LossRecord> records;
      if (lm) {
        records = tl::score_document(f.doc_id(), ids, *lm, tl::ScoreOptions{max_context}, texts);
      } else if (const auto it = streams.find(f.doc_id()); it != streams.end()) {
        records = tl::score_document(f.doc_id(), ids, it->second, texts);
      }
      tl::attach_tags(records, aligned);
      tl::attach_invocation_classes(records, tl::tag_invocation_tokens(aligned, doc_calls[i]));
      std::string s;
      for (const auto& r : records) s += tl::loss_record_line(r);
      return s;
    });
    std::string out;
    for (const auto& p : parts) out += p;
    emit(output, out);
    return 0;
  }
};

// ---------------------------------------------------------------------------
// pipeline

struct PipelineCmd {
  std::string corpus;
  double sample = 1.0;
  std::uint64_t seed = 0;
  std::size_t max_chars = 4096;
  bool require_multi_file = false;
  bool require_internal_call = false;
  std::string builtins;
  std::string output;
  std::string trace;
  std::string calls;

  void add(CLI::App& app, const Globals& g, std::function<int()>& action) {
    auto* cmd = app.add_subcommand("pipeline", "Filter a corpus and classify its call sites");
    cmd->add_option("--corpus", corpus, "input corpus JSONL")->required();
    cmd->add_option("--sample", sample, "fraction of files kept by the seeded hash")->capture_default_str();
    cmd->add_option("--seed", seed)->capture_default_str();
    cmd->add_option("--max-chars", max_chars, "drop files longer than this many bytes (0: no limit)")
        ->capture_default_str();
    cmd->add_flag("--require-multi-file", require_multi_file, "keep only repos with at least two files");
    cmd->add_flag("--require-internal-call", require_internal_call, "keep only files with an internal call");
    cmd->add_option("--builtins", builtins, "builtin names file (default: bundled list)");
    cmd->add_option("-o,--output", output, "surviving corpus JSONL");
    cmd->add_option("--trace", trace, "filter trace JSON (stdout when omitted)");
    cmd->add_option("--calls", calls, "classified call sites of the surviving files (JSONL)");
    cmd->callback([this, &g, &action] { action = [this, &g] { return run(g); }; });
  }

  int run(const Globals& g) const {
    const auto files = tl::load_corpus(corpus);
    const auto names = load_builtins_or_default(builtins);
    const auto provider = make_provider(g);
    tl::FilterConfig cfg;
    cfg.sample_fraction = sample;
    cfg.seed = seed;
    cfg.max_chars = max_chars == 0 ? std::nullopt : std::optional<std::size_t>(max_chars);
    cfg.require_multi_file = require_multi_file;
    cfg.require_internal_call = require_internal_call;
    const auto result = tl::filter_cascade(files, cfg, names, *provider, g.threads);

    if (!output.empty()) {
      std::ostringstream ss;
      tl::write_corpus(ss, result.files);
      emit(output, ss.str());
    }
    if (!calls.empty()) {
      std::string s;
      for (std::size_t i = 0; i < result.files.size(); ++i) {
        for (const auto& c : result.calls[i]) {
          ordered_json j;
          j["doc_id"] = result.files[i].doc_id();
          j["name"] = c.invocation.name;
          j["class"] = tl::to_string(c.invocation_class);
          j["call_span"] = {c.invocation.call_span.begin, c.invocation.call_span.end};
          s += dump_line(j);
        }
      }
      emit(calls, s);
    }
    emit(trace, dump_line(tl::filter_trace_json(result.trace)));
    return 0;
  }
};

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeCmd {
  std::string records;
  std::string output;

  void add(CLI::App& app, const Globals& g, std::function<int()>& action) {
    auto* cmd = app.add_subcommand("analyze", "Aggregate loss records by token, syntax tag and call class");
    cmd->add_option("--records", records, "loss records JSONL from `score`")->required();
    cmd->add_option("-o,--output", output, "aggregates JSON");
    cmd->callback([this, &g, &action] { action = [this, &g] { return run(g); }; });
  }

  int run(const Globals& g) const {
    const auto recs = tl::load_loss_records(records);
    const auto report = tl::build_aggregate_report(recs, g.threads);
    emit(output, dump_line(tl::aggregate_report_json(report)));
    return 0;
  }
};

// ---------------------------------------------------------------------------
// report

struct ReportCmd {
  std::string aggregates;
  std::string calls;
  std::optional<std::size_t> worst;
  std::optional<std::size_t> best;
  std::string level = "bpe";
  std::uint64_t min_count = 1;
  bool correlation = false;
  bool summary = false;
  std::string frequencies;
  std::string format = "csv";
  bool human = false;
  std::string output;

  void add(CLI::App& app, std::function<int()>& action) {
    auto* cmd = app.add_subcommand("report", "Rankings, correlations, class summary or name frequencies");
    cmd->add_option("--aggregates", aggregates, "aggregates JSON from `analyze`");
    cmd->add_option("--calls", calls, "classified call sites from `pipeline --calls`");
    auto* w = cmd->add_option("--worst", worst, "k highest mean cross-entropy keys");
    auto* b = cmd->add_option("--best", best, "k lowest mean cross-entropy keys")->excludes(w);
    auto* c = cmd->add_flag("--correlation", correlation, "Spearman rho between count and mean CE")
                  ->excludes(w)
                  ->excludes(b);
    auto* s = cmd->add_flag("--summary", summary, "internal vs external call summary")
                  ->excludes(w)
                  ->excludes(b)
                  ->excludes(c);
    cmd->add_option("--frequencies", frequencies, "call-name frequency table")
        ->check(CLI::IsMember({"internal", "external"}))
        ->excludes(w)
        ->excludes(b)
        ->excludes(c)
        ->excludes(s);
    cmd->add_option("--level", level, "ranking/correlation key")
        ->check(CLI::IsMember({"bpe", "node"}))
        ->capture_default_str();
    cmd->add_option("--min-count", min_count, "ignore keys seen fewer times")->capture_default_str();
    cmd->add_option("--format", format, "summary output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_flag("--human", human, "3-decimal numbers instead of full precision");
    cmd->add_option("-o,--output", output);
    cmd->callback([this, &action] { action = [this] { return run(); }; });
  }

  [[nodiscard]] tl::AggregateReport load_aggregates() const {
    if (aggregates.empty()) throw tl::UsageError("report: --aggregates is required for this report");
    json j;
    try {
      j = json::parse(tl::read_file(aggregates));
    } catch (const json::exception& e) {
      throw tl::DataError(aggregates + ": " + e.what());
    }
    try {
      return tl::aggregate_report_from_json(j);
    } catch (const tl::Error& e) {
      throw ContextError(aggregates, e);
    }
  }

  int run() const {
    const tl::Precision p = human ? tl::Precision::kHuman : tl::Precision::kFull;
    std::string out;
    if (worst || best) {
      const auto dir = worst ? tl::RankDirection::kWorst : tl::RankDirection::kBest;
      const std::size_t k = worst ? *worst : *best;
      const auto agg = load_aggregates();
      if (level == "bpe") {
        out = tl::ranked_tokens_csv(tl::rank_keys(agg.tokens, dir, k, min_count), agg.token_text, p);
      } else {
        out = tl::ranked_nodes_csv(tl::rank_keys(agg.nodes, dir, k, min_count), p);
      }
    } else if (correlation) {
      const auto agg = load_aggregates();
      ordered_json j;
      j["level"] = level;
      if (level == "bpe") {
        j["keys"] = agg.tokens.size();
        j["spearman"] = tl::frequency_loss_correlation(agg.tokens);
      } else {
        j["keys"] = agg.nodes.size();
        j["spearman"] = tl::frequency_loss_correlation(agg.nodes);
      }
      out = dump_line(j);
    } else if (summary) {
      const auto s = tl::invocation_summary(load_aggregates().node_classes);
      out = format == "json" ? dump_line(tl::invocation_summary_json(s)) : tl::invocation_summary_csv(s, p);
    } else if (!frequencies.empty()) {
      if (calls.empty()) throw tl::UsageError("report: --frequencies needs --calls");
      std::vector<std::vector<tl::ClassifiedCall>> per_file;
      for (auto& [doc, list] : load_calls(calls)) per_file.push_back(std::move(list));
      const auto f = tl::name_frequencies(per_file);
      out = tl::frequencies_csv(frequencies == "internal" ? f.internal : f.external);
    } else {
      throw tl::UsageError("report: choose one of --worst, --best, --correlation, --summary, --frequencies");
    }
    emit(output, out);
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tokenlens: syntax-aware per-token loss analysis for code language models"};
  app.set_config("--config", "", "TOML file of option defaults; command-line flags win");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.fallthrough();

  Globals g;
  app.add_option("--threads", g.threads, "worker threads (never changes results)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--syntax-provider", g.syntax_provider,
                 "external parser command: reads source on stdin, prints a JSON tree");

  std::function<int()> action;
  TrainBpeCmd train_bpe;
  ParseCmd parse;
  TokenizeCmd tokenize;
  AlignCmd align;
  CheckTokenizerCmd check;
  FitLmCmd fit_lm;
  ScoreCmd score;
  PipelineCmd pipeline;
  AnalyzeCmd analyze;
  ReportCmd report;
  train_bpe.add(app, action);
  parse.add(app, g, action);
  tokenize.add(app, g, action);
  align.add(app, g, action);
  check.add(app, g, action);
  fit_lm.add(app, g, action);
  score.add(app, g, action);
  pipeline.add(app, g, action);
  analyze.add(app, g, action);
  report.add(app, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    return action();
  } catch (const tl::Error& e) {
    std::cerr << "tokenlens: error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "tokenlens: error: " << e.what() << '\n';
    return 2;
  }
}
