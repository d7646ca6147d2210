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
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tokenlens/syntax/lexer.hpp"
#include "tokenlens/syntax/tree.hpp"

namespace tokenlens::syntax {

/// Recursive-descent parser for a Python subset producing tree-sitter-python
/// node names. Expression statements are not wrapped: the expression is a
/// direct child of its module/block. A statement that fails to parse becomes
/// an ERROR node holding the raw tokens up to the end of its logical line.
class PythonParser {
 public:
  explicit PythonParser(std::string_view doc) : doc_(doc) {}

  SyntaxNode parse() {
    LexResult lexed = lex(doc_);
    toks_ = std::move(lexed.tokens);
    pos_ = 0;
    SyntaxNode root;
    root.type = std::string(kModuleType);
    root.span = ByteSpan{0, doc_.size()};
    parse_statements(root.children, false);
    for (const auto& extra : lexed.extras) {
      insert_extra(root, SyntaxNode{extra.kind == LexKind::kComment ? "comment" : "line_continuation",
                                    extra.span, {}, {}, false});
    }
    finalize_tree(root);
    return root;
  }

 private:
  struct Failure {};
  using Nodes = std::vector<SyntaxNode>;

  // --- token helpers -------------------------------------------------------

  const LexToken& cur() const { return toks_[pos_]; }
  const LexToken& ahead(std::size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }

  bool is_op(std::string_view op, std::size_t k = 0) const {
    const auto& t = ahead(k);
    return t.kind == LexKind::kOp && t.text == op;
  }
  bool is_kw(std::string_view kw, std::size_t k = 0) const {
    const auto& t = ahead(k);
    return t.kind == LexKind::kName && t.text == kw;
  }
  bool is_name(std::size_t k = 0) const {
    const auto& t = ahead(k);
    return t.kind == LexKind::kName && !is_python_keyword(t.text);
  }
  bool at_line_end() const {
    return cur().kind == LexKind::kNewline || cur().kind == LexKind::kEnd || is_op(";");
  }

  [[noreturn]] static void fail() { throw Failure{}; }

  static SyntaxNode leaf(std::string type, const LexToken& t) {
    return SyntaxNode{std::move(type), t.span, {}, {}, false};
  }

  static SyntaxNode node(std::string type, Nodes children) {
    SyntaxNode n;
    n.type = std::move(type);
    n.span = ByteSpan{children.front().span.begin, children.back().span.end};
    n.children = std::move(children);
    return n;
  }

  SyntaxNode take_op(std::string_view op) {
    if (!is_op(op)) fail();
    return leaf(std::string(op), toks_[pos_++]);
  }
  SyntaxNode take_kw(std::string_view kw) {
    if (!is_kw(kw)) fail();
    return leaf(std::string(kw), toks_[pos_++]);
  }
  SyntaxNode take_identifier() {
    if (!is_name()) fail();
    return leaf("identifier", toks_[pos_++]);
  }
  void expect_line_end() {
    if (cur().kind == LexKind::kNewline) {
      ++pos_;
    } else if (cur().kind != LexKind::kEnd) {
      fail();
    }
  }

  static std::string token_type(const LexToken& t) {
    switch (t.kind) {
      case LexKind::kName:
        if (t.text == "True") return "true";
        if (t.text == "False") return "false";
        if (t.text == "None") return "none";
        return is_python_keyword(t.text) ? std::string(t.text) : "identifier";
      case LexKind::kNumber: return t.is_float ? "float" : "integer";
      case LexKind::kString: return "string";
      case LexKind::kOp: return std::string(t.text);
      default: return std::string(kErrorType);
    }
  }

  // --- statements ----------------------------------------------------------

  void parse_statements(Nodes& out, bool in_block) {
    for (;;) {
      switch (cur().kind) {
        case LexKind::kEnd:
          return;
        case LexKind::kDedent:
          if (in_block) return;
          ++pos_;
          continue;
        case LexKind::kIndent:
          // Indented block without a header (its header was an ERROR line):
          // keep its statements at this level.
          ++pos_;
          parse_statements(out, true);
          if (cur().kind == LexKind::kDedent) ++pos_;
          continue;
        case LexKind::kNewline:
          ++pos_;
          continue;
        default:
          break;
      }
      const std::size_t start = pos_;
      Nodes parsed;
      try {
        parse_statement(parsed);
      } catch (const Failure&) {
        pos_ = start;
        parsed.clear();
        parsed.push_back(error_line());
      }
      for (auto& n : parsed) out.push_back(std::move(n));
    }
  }

  SyntaxNode error_line() {
    Nodes kids;
    while (cur().kind != LexKind::kNewline && cur().kind != LexKind::kEnd) {
      const LexToken& t = toks_[pos_++];
      if (t.kind == LexKind::kIndent || t.kind == LexKind::kDedent) continue;
      kids.push_back(leaf(token_type(t), t));
    }
    if (cur().kind == LexKind::kNewline) ++pos_;
    return node(std::string(kErrorType), std::move(kids));
  }

  void parse_statement(Nodes& out) {
    if (cur().kind == LexKind::kName) {
      const std::string_view w = cur().text;
      if (w == "def") return out.push_back(parse_function_def({}));
      if (w == "class") return out.push_back(parse_class_def());
      if (w == "if") return out.push_back(parse_if());
      if (w == "for") return out.push_back(parse_for({}));
      if (w == "while") return out.push_back(parse_while());
      if (w == "try") return out.push_back(parse_try());
      if (w == "with") return out.push_back(parse_with({}));
      if (w == "async") {
        if (is_kw("def", 1)) {
          Nodes pre{take_kw("async")};
          return out.push_back(parse_function_def(std::move(pre)));
        }
        if (is_kw("for", 1)) {
          Nodes pre{take_kw("async")};
          return out.push_back(parse_for(std::move(pre)));
        }
        if (is_kw("with", 1)) {
          Nodes pre{take_kw("async")};
          return out.push_back(parse_with(std::move(pre)));
        }
      }
    }
    if (is_op("@")) return out.push_back(parse_decorated());
    parse_simple_line(out);
  }

  void parse_simple_line(Nodes& out) {
    out.push_back(parse_simple_statement());
    while (is_op(";")) {
      out.push_back(take_op(";"));
      if (cur().kind == LexKind::kNewline || cur().kind == LexKind::kEnd) break;
      out.push_back(parse_simple_statement());
    }
    expect_line_end();
  }

  SyntaxNode parse_block() {
    Nodes kids;
    if (cur().kind == LexKind::kNewline) {
      ++pos_;
      if (cur().kind != LexKind::kIndent) fail();
      ++pos_;
      parse_statements(kids, true);
      if (cur().kind == LexKind::kDedent) ++pos_;
    } else {
      parse_simple_line(kids);
    }
    if (kids.empty()) fail();
    return node("block", std::move(kids));
  }

  SyntaxNode parse_simple_statement() {
    if (cur().kind == LexKind::kName) {
      const std::string_view w = cur().text;
      if (w == "pass") return node("pass_statement", {take_kw("pass")});
      if (w == "break") return node("break_statement", {take_kw("break")});
      if (w == "continue") return node("continue_statement", {take_kw("continue")});
      if (w == "return") {
        Nodes kids{take_kw("return")};
        if (!at_line_end()) kids.push_back(parse_expressions(true));
        return node("return_statement", std::move(kids));
      }
      if (w == "raise") {
        Nodes kids{take_kw("raise")};
        if (!at_line_end()) {
          kids.push_back(parse_test());
          if (is_kw("from")) {
            kids.push_back(take_kw("from"));
            kids.push_back(parse_test());
          }
        }
        return node("raise_statement", std::move(kids));
      }
      if (w == "global" || w == "nonlocal") {
        const std::string type = std::string(w) + "_statement";
        Nodes kids{take_kw(w)};
        kids.push_back(take_identifier());
        while (is_op(",")) {
          kids.push_back(take_op(","));
          kids.push_back(take_identifier());
        }
        return node(type, std::move(kids));
      }
      if (w == "assert") {
        Nodes kids{take_kw("assert")};
        kids.push_back(parse_test());
        if (is_op(",")) {
          kids.push_back(take_op(","));
          kids.push_back(parse_test());
        }
        return node("assert_statement", std::move(kids));
      }
      if (w == "del") {
        Nodes kids{take_kw("del")};
        kids.push_back(parse_expressions(false));
        return node("delete_statement", std::move(kids));
      }
      if (w == "import") return parse_import();
      if (w == "from") return parse_import_from();
    }
    return parse_expression_statement();
  }

  SyntaxNode parse_dotted_name() {
    Nodes kids{take_identifier()};
    while (is_op(".")) {
      kids.push_back(take_op("."));
      kids.push_back(take_identifier());
    }
    return node("dotted_name", std::move(kids));
  }

  SyntaxNode parse_import_name() {
    SyntaxNode name = parse_dotted_name();
    if (!is_kw("as")) return name;
    Nodes kids{std::move(name), take_kw("as"), take_identifier()};
    return node("aliased_import", std::move(kids));
  }

  SyntaxNode parse_import() {
    Nodes kids{take_kw("import")};
    kids.push_back(parse_import_name());
    while (is_op(",")) {
      kids.push_back(take_op(","));
      kids.push_back(parse_import_name());
    }
    return node("import_statement", std::move(kids));
  }

  SyntaxNode parse_import_from() {
    Nodes kids{take_kw("from")};
    if (is_op(".") || is_op("...")) {
      Nodes dots;
      while (is_op(".") || is_op("...")) dots.push_back(take_op(cur().text));
      Nodes rel{node("import_prefix", std::move(dots))};
      if (is_name()) rel.push_back(parse_dotted_name());
      kids.push_back(node("relative_import", std::move(rel)));
    } else {
      kids.push_back(parse_dotted_name());
    }
    kids.push_back(take_kw("import"));
    if (is_op("*")) {
      kids.push_back(node("wildcard_import", {take_op("*")}));
      return node("import_from_statement", std::move(kids));
    }
    const bool paren = is_op("(");
    if (paren) kids.push_back(take_op("("));
    kids.push_back(parse_import_name());
    while (is_op(",")) {
      kids.push_back(take_op(","));
      if (paren && is_op(")")) break;
      kids.push_back(parse_import_name());
    }
    if (paren) kids.push_back(take_op(")"));
    return node("import_from_statement", std::move(kids));
  }

  static bool is_augmented_op(std::string_view t) {
    static constexpr std::string_view kOps[] = {"+=", "-=", "*=", "/=", "//=", "%=", "**=",
                                                ">>=", "<<=", "&=", "|=", "^=", "@="};
    return std::find(std::begin(kOps), std::end(kOps), t) != std::end(kOps);
  }

  static SyntaxNode as_pattern(SyntaxNode n) {
    if (n.type == "expression_list") n.type = "pattern_list";
    return n;
  }

  SyntaxNode parse_rhs() { return is_kw("yield") ? parse_yield() : parse_expressions(true); }

  SyntaxNode parse_assignment_rest(SyntaxNode lhs) {
    Nodes kids{std::move(lhs), take_op("=")};
    SyntaxNode rhs = parse_rhs();
    if (is_op("=")) rhs = parse_assignment_rest(as_pattern(std::move(rhs)));
    kids.push_back(std::move(rhs));
    return node("assignment", std::move(kids));
  }

  SyntaxNode parse_expression_statement() {
    SyntaxNode lhs = is_kw("yield") ? parse_yield() : parse_expressions(true);
    if (is_op("=")) return parse_assignment_rest(as_pattern(std::move(lhs)));
    if (is_op(":")) {
      Nodes kids{std::move(lhs), take_op(":")};
      kids.push_back(node("type", {parse_test()}));
      if (is_op("=")) {
        kids.push_back(take_op("="));
        kids.push_back(parse_rhs());
      }
      return node("assignment", std::move(kids));
    }
    if (cur().kind == LexKind::kOp && is_augmented_op(cur().text)) {
      Nodes kids{std::move(lhs), take_op(cur().text)};
      kids.push_back(parse_rhs());
      return node("augmented_assignment", std::move(kids));
    }
    return lhs;
  }

  // --- compound statements -------------------------------------------------

  SyntaxNode parse_parameter(bool annotations) {
    if (is_op("*")) {
      SyntaxNode star = take_op("*");
      if (!is_name()) return star;
      SyntaxNode splat = node("list_splat_pattern", {std::move(star), take_identifier()});
      if (annotations && is_op(":")) {
        Nodes kids{std::move(splat), take_op(":")};
        kids.push_back(node("type", {parse_test()}));
        return node("typed_parameter", std::move(kids));
      }
      return splat;
    }
    if (is_op("**")) {
      SyntaxNode splat = node("dictionary_splat_pattern", {take_op("**"), take_identifier()});
      if (annotations && is_op(":")) {
        Nodes kids{std::move(splat), take_op(":")};
        kids.push_back(node("type", {parse_test()}));
        return node("typed_parameter", std::move(kids));
      }
      return splat;
    }
    if (is_op("/")) return take_op("/");
    SyntaxNode name = take_identifier();
    if (annotations && is_op(":")) {
      Nodes kids{std::move(name), take_op(":")};
      kids.push_back(node("type", {parse_test()}));
      if (is_op("=")) {
        kids.push_back(take_op("="));
        kids.push_back(parse_test());
        return node("typed_default_parameter", std::move(kids));
      }
      return node("typed_parameter", std::move(kids));
    }
    if (is_op("=")) {
      Nodes kids{std::move(name), take_op("=")};
      kids.push_back(parse_test());
      return node("default_parameter", std::move(kids));
    }
    return name;
  }

  SyntaxNode parse_parameters() {
    Nodes kids{take_op("(")};
    while (!is_op(")")) {
      kids.push_back(parse_parameter(true));
      if (!is_op(",")) break;
      kids.push_back(take_op(","));
    }
    kids.push_back(take_op(")"));
    return node("parameters", std::move(kids));
  }

  SyntaxNode parse_function_def(Nodes kids) {
    kids.push_back(take_kw("def"));
    kids.push_back(take_identifier());
    kids.push_back(parse_parameters());
    if (is_op("->")) {
      kids.push_back(take_op("->"));
      kids.push_back(node("type", {parse_test()}));
    }
    kids.push_back(take_op(":"));
    kids.push_back(parse_block());
    return node("function_definition", std::move(kids));
  }

  SyntaxNode parse_class_def() {
    Nodes kids{take_kw("class"), take_identifier()};
    if (is_op("(")) kids.push_back(parse_call_args());
    kids.push_back(take_op(":"));
    kids.push_back(parse_block());
    return node("class_definition", std::move(kids));
  }

  SyntaxNode parse_decorated() {
    Nodes kids;
    while (is_op("@")) {
      Nodes dec{take_op("@")};
      dec.push_back(parse_test());
      kids.push_back(node("decorator", std::move(dec)));
      if (cur().kind != LexKind::kNewline) fail();
      ++pos_;
    }
    if (is_kw("def")) {
      kids.push_back(parse_function_def({}));
    } else if (is_kw("class")) {
      kids.push_back(parse_class_def());
    } else if (is_kw("async") && is_kw("def", 1)) {
      Nodes pre{take_kw("async")};
      kids.push_back(parse_function_def(std::move(pre)));
    } else {
      fail();
    }
    return node("decorated_definition", std::move(kids));
  }

  SyntaxNode parse_else_clause() {
    Nodes kids{take_kw("else"), take_op(":")};
    kids.push_back(parse_block());
    return node("else_clause", std::move(kids));
  }

  SyntaxNode parse_if() {
    Nodes kids{take_kw("if")};
    kids.push_back(parse_test());
    kids.push_back(take_op(":"));
    kids.push_back(parse_block());
    while (is_kw("elif")) {
      Nodes clause{take_kw("elif")};
      clause.push_back(parse_test());
      clause.push_back(take_op(":"));
      clause.push_back(parse_block());
      kids.push_back(node("elif_clause", std::move(clause)));
    }
    if (is_kw("else")) kids.push_back(parse_else_clause());
    return node("if_statement", std::move(kids));
  }

  SyntaxNode parse_for(Nodes kids) {
    kids.push_back(take_kw("for"));
    kids.push_back(parse_targets());
    kids.push_back(take_kw("in"));
    kids.push_back(parse_expressions(true));
    kids.push_back(take_op(":"));
    kids.push_back(parse_block());
    if (is_kw("else")) kids.push_back(parse_else_clause());
    return node("for_statement", std::move(kids));
  }

  SyntaxNode parse_while() {
    Nodes kids{take_kw("while")};
    kids.push_back(parse_test());
    kids.push_back(take_op(":"));
    kids.push_back(parse_block());
    if (is_kw("else")) kids.push_back(parse_else_clause());
    return node("while_statement", std::move(kids));
  }

  SyntaxNode parse_try() {
    Nodes kids{take_kw("try"), take_op(":")};
    kids.push_back(parse_block());
    bool handled = false;
    while (is_kw("except")) {
      handled = true;
      Nodes clause{take_kw("except")};
      if (is_op("*")) clause.push_back(take_op("*"));
      if (!is_op(":")) {
        clause.push_back(parse_test());
        if (is_kw("as") || is_op(",")) {
          clause.push_back(is_op(",") ? take_op(",") : take_kw("as"));
          clause.push_back(take_identifier());
        }
      }
      clause.push_back(take_op(":"));
      clause.push_back(parse_block());
      kids.push_back(node("except_clause", std::move(clause)));
    }
    if (handled && is_kw("else")) kids.push_back(parse_else_clause());
    if (is_kw("finally")) {
      handled = true;
      Nodes clause{take_kw("finally"), take_op(":")};
      clause.push_back(parse_block());
      kids.push_back(node("finally_clause", std::move(clause)));
    }
    if (!handled) fail();
    return node("try_statement", std::move(kids));
  }

  SyntaxNode parse_with(Nodes kids) {
    kids.push_back(take_kw("with"));
    Nodes items;
    for (;;) {
      Nodes item{parse_test()};
      if (is_kw("as")) {
        item.push_back(take_kw("as"));
        item.push_back(parse_star_or_test(true));
      }
      items.push_back(node("with_item", std::move(item)));
      if (!is_op(",")) break;
      items.push_back(take_op(","));
    }
    kids.push_back(node("with_clause", std::move(items)));
    kids.push_back(take_op(":"));
    kids.push_back(parse_block());
    return node("with_statement", std::move(kids));
  }

  // --- expressions ---------------------------------------------------------

  bool can_start_expression() const {
    const auto& t = cur();
    switch (t.kind) {
      case LexKind::kName:
        return !is_python_keyword(t.text) || t.text == "not" || t.text == "lambda" || t.text == "await" ||
               t.text == "True" || t.text == "False" || t.text == "None";
      case LexKind::kNumber:
      case LexKind::kString:
        return true;
      case LexKind::kOp:
        return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" || t.text == "+" ||
               t.text == "~" || t.text == "*" || t.text == "...";
      default:
        return false;
    }
  }

  SyntaxNode parse_expressions(bool star) {
    SyntaxNode first = parse_star_or_test(star);
    if (!is_op(",")) return first;
    Nodes kids{std::move(first)};
    while (is_op(",")) {
      kids.push_back(take_op(","));
      if (!can_start_expression()) break;
      kids.push_back(parse_star_or_test(star));
    }
    return node("expression_list", std::move(kids));
  }

  SyntaxNode parse_star_or_test(bool star) {
    if (star && is_op("*")) {
      Nodes kids{take_op("*")};
      kids.push_back(parse_bitor());
      return node("list_splat", std::move(kids));
    }
    return parse_test();
  }

  SyntaxNode parse_yield() {
    Nodes kids{take_kw("yield")};
    if (is_kw("from")) {
      kids.push_back(take_kw("from"));
      kids.push_back(parse_test());
    } else if (can_start_expression()) {
      kids.push_back(parse_expressions(true));
    }
    return node("yield", std::move(kids));
  }

  SyntaxNode parse_lambda() {
    Nodes kids{take_kw("lambda")};
    if (!is_op(":")) {
      Nodes params;
      for (;;) {
        params.push_back(parse_parameter(false));
        if (!is_op(",")) break;
        params.push_back(take_op(","));
        if (is_op(":")) break;
      }
      kids.push_back(node("lambda_parameters", std::move(params)));
    }
    kids.push_back(take_op(":"));
    kids.push_back(parse_test());
    return node("lambda", std::move(kids));
  }

  SyntaxNode parse_test() {
    if (is_kw("lambda")) return parse_lambda();
    if (is_name() && is_op(":=", 1)) {
      Nodes kids{take_identifier(), take_op(":=")};
      kids.push_back(parse_test());
      return node("named_expression", std::move(kids));
    }
    SyntaxNode value = parse_or();
    if (!is_kw("if")) return value;
    Nodes kids{std::move(value), take_kw("if")};
    kids.push_back(parse_or());
    kids.push_back(take_kw("else"));
    kids.push_back(parse_test());
    return node("conditional_expression", std::move(kids));
  }

  SyntaxNode parse_or() {
    SyntaxNode left = parse_and();
    while (is_kw("or")) {
      Nodes kids{std::move(left), take_kw("or")};
      kids.push_back(parse_and());
      left = node("boolean_operator", std::move(kids));
    }
    return left;
  }

  SyntaxNode parse_and() {
    SyntaxNode left = parse_not();
    while (is_kw("and")) {
      Nodes kids{std::move(left), take_kw("and")};
      kids.push_back(parse_not());
      left = node("boolean_operator", std::move(kids));
    }
    return left;
  }

  SyntaxNode parse_not() {
    if (!is_kw("not")) return parse_comparison();
    Nodes kids{take_kw("not")};
    kids.push_back(parse_not());
    return node("not_operator", std::move(kids));
  }

  // Merges two adjacent keyword tokens into one leaf ("not in", "is not")
  // when only blanks separate them.
  void take_keyword_pair(Nodes& kids, std::string_view first, std::string_view second) {
    const LexToken& a = cur();
    const LexToken& b = ahead(1);
    bool blank = true;
    for (std::size_t k = a.span.end; k < b.span.begin; ++k) {
      if (doc_[k] != ' ' && doc_[k] != '\t') blank = false;
    }
    if (blank) {
      kids.push_back(SyntaxNode{std::string(first) + " " + std::string(second),
                                ByteSpan{a.span.begin, b.span.end}, {}, {}, false});
      pos_ += 2;
    } else {
      kids.push_back(take_kw(first));
      kids.push_back(take_kw(second));
    }
  }

  SyntaxNode parse_comparison() {
    SyntaxNode first = parse_bitor();
    Nodes kids{std::move(first)};
    for (;;) {
      const auto& t = cur();
      if (t.kind == LexKind::kOp && (t.text == "<" || t.text == ">" || t.text == "==" || t.text == ">=" ||
                                     t.text == "<=" || t.text == "!=")) {
        kids.push_back(take_op(t.text));
      } else if (is_kw("in")) {
        kids.push_back(take_kw("in"));
      } else if (is_kw("not") && is_kw("in", 1)) {
        take_keyword_pair(kids, "not", "in");
      } else if (is_kw("is")) {
        if (is_kw("not", 1)) {
          take_keyword_pair(kids, "is", "not");
        } else {
          kids.push_back(take_kw("is"));
        }
      } else {
        break;
      }
      kids.push_back(parse_bitor());
    }
    if (kids.size() == 1) return std::move(kids.front());
    return node("comparison_operator", std::move(kids));
  }

  static bool binary_level_has(int level, std::string_view op) {
    switch (level) {
      case 0: return op == "|";
      case 1: return op == "^";
      case 2: return op == "&";
      case 3: return op == "<<" || op == ">>";
      case 4: return op == "+" || op == "-";
      case 5: return op == "*" || op == "/" || op == "//" || op == "%" || op == "@";
      default: return false;
    }
  }

  SyntaxNode parse_binary(int level) {
    if (level > 5) return parse_unary();
    SyntaxNode left = parse_binary(level + 1);
    while (cur().kind == LexKind::kOp && binary_level_has(level, cur().text)) {
      Nodes kids{std::move(left), take_op(cur().text)};
      kids.push_back(parse_binary(level + 1));
      left = node("binary_operator", std::move(kids));
    }
    return left;
  }

  SyntaxNode parse_bitor() { return parse_binary(0); }

  SyntaxNode parse_unary() {
    if (is_op("-") || is_op("+") || is_op("~")) {
      Nodes kids{take_op(cur().text)};
      kids.push_back(parse_unary());
      return node("unary_operator", std::move(kids));
    }
    SyntaxNode base = parse_await();
    if (!is_op("**")) return base;
    Nodes kids{std::move(base), take_op("**")};
    kids.push_back(parse_unary());
    return node("binary_operator", std::move(kids));
  }

  SyntaxNode parse_await() {
    if (!is_kw("await")) return parse_primary();
    Nodes kids{take_kw("await")};
    kids.push_back(parse_primary());
    return node("await", std::move(kids));
  }

  SyntaxNode parse_primary() {
    SyntaxNode value = parse_atom();
    for (;;) {
      if (is_op(".")) {
        Nodes kids{std::move(value), take_op(".")};
        kids.push_back(take_identifier());
        value = node("attribute", std::move(kids));
      } else if (is_op("(")) {
        Nodes kids{std::move(value)};
        kids.push_back(parse_call_args());
        value = node("call", std::move(kids));
      } else if (is_op("[")) {
        Nodes kids{std::move(value), take_op("[")};
        kids.push_back(parse_slice_item());
        while (is_op(",")) {
          kids.push_back(take_op(","));
          if (is_op("]")) break;
          kids.push_back(parse_slice_item());
        }
        kids.push_back(take_op("]"));
        value = node("subscript", std::move(kids));
      } else {
        return value;
      }
    }
  }

  SyntaxNode parse_slice_item() {
    Nodes kids;
    if (!is_op(":")) {
      SyntaxNode value = parse_star_or_test(true);
      if (!is_op(":")) return value;
      kids.push_back(std::move(value));
    }
    kids.push_back(take_op(":"));
    if (!is_op(":") && !is_op("]") && !is_op(",")) kids.push_back(parse_test());
    if (is_op(":")) {
      kids.push_back(take_op(":"));
      if (!is_op("]") && !is_op(",")) kids.push_back(parse_test());
    }
    return node("slice", std::move(kids));
  }

  bool at_comp_for() const { return is_kw("for") || (is_kw("async") && is_kw("for", 1)); }

  void parse_comprehension_clauses(Nodes& kids) {
    while (at_comp_for() || is_kw("if")) {
      if (is_kw("if")) {
        Nodes clause{take_kw("if")};
        clause.push_back(parse_or());
        kids.push_back(node("if_clause", std::move(clause)));
        continue;
      }
      Nodes clause;
      if (is_kw("async")) clause.push_back(take_kw("async"));
      clause.push_back(take_kw("for"));
      clause.push_back(parse_targets());
      clause.push_back(take_kw("in"));
      clause.push_back(parse_or());
      kids.push_back(node("for_in_clause", std::move(clause)));
    }
  }

  SyntaxNode parse_targets() {
    SyntaxNode first = parse_star_or_bitor();
    if (!is_op(",")) return first;
    Nodes kids{std::move(first)};
    while (is_op(",")) {
      kids.push_back(take_op(","));
      if (is_kw("in") || is_op("=")) break;
      kids.push_back(parse_star_or_bitor());
    }
    return node("pattern_list", std::move(kids));
  }

  SyntaxNode parse_star_or_bitor() {
    if (!is_op("*")) return parse_bitor();
    Nodes kids{take_op("*")};
    kids.push_back(parse_bitor());
    return node("list_splat", std::move(kids));
  }

  SyntaxNode parse_argument() {
    if (is_op("*")) {
      Nodes kids{take_op("*")};
      kids.push_back(parse_test());
      return node("list_splat", std::move(kids));
    }
    if (is_op("**")) {
      Nodes kids{take_op("**")};
      kids.push_back(parse_test());
      return node("dictionary_splat", std::move(kids));
    }
    if (is_name() && is_op("=", 1)) {
      Nodes kids{take_identifier(), take_op("=")};
      kids.push_back(parse_test());
      return node("keyword_argument", std::move(kids));
    }
    return parse_test();
  }

  SyntaxNode parse_call_args() {
    Nodes kids{take_op("(")};
    if (is_op(")")) {
      kids.push_back(take_op(")"));
      return node("argument_list", std::move(kids));
    }
    kids.push_back(parse_argument());
    if (at_comp_for()) {
      parse_comprehension_clauses(kids);
      kids.push_back(take_op(")"));
      return node("generator_expression", std::move(kids));
    }
    while (is_op(",")) {
      kids.push_back(take_op(","));
      if (is_op(")")) break;
      kids.push_back(parse_argument());
    }
    kids.push_back(take_op(")"));
    return node("argument_list", std::move(kids));
  }

  SyntaxNode parse_atom() {
    const LexToken& t = cur();
    switch (t.kind) {
      case LexKind::kName: {
        if (t.text == "True" || t.text == "False" || t.text == "None") {
          ++pos_;
          return leaf(token_type(t), t);
        }
        return take_identifier();
      }
      case LexKind::kNumber:
        ++pos_;
        return leaf(t.is_float ? "float" : "integer", t);
      case LexKind::kString: {
        Nodes strings;
        while (cur().kind == LexKind::kString) strings.push_back(leaf("string", toks_[pos_++]));
        if (strings.size() == 1) return std::move(strings.front());
        return node("concatenated_string", std::move(strings));
      }
      case LexKind::kOp:
        if (t.text == "(") return parse_paren();
        if (t.text == "[") return parse_list();
        if (t.text == "{") return parse_brace();
        if (t.text == "...") {
          ++pos_;
          return leaf("ellipsis", t);
        }
        fail();
      default:
        fail();
    }
  }

  SyntaxNode parse_paren() {
    Nodes kids{take_op("(")};
    if (is_op(")")) {
      kids.push_back(take_op(")"));
      return node("tuple", std::move(kids));
    }
    if (is_kw("yield")) {
      kids.push_back(parse_yield());
      kids.push_back(take_op(")"));
      return node("parenthesized_expression", std::move(kids));
    }
    kids.push_back(parse_star_or_test(true));
    if (at_comp_for()) {
      parse_comprehension_clauses(kids);
      kids.push_back(take_op(")"));
      return node("generator_expression", std::move(kids));
    }
    if (!is_op(",")) {
      kids.push_back(take_op(")"));
      return node("parenthesized_expression", std::move(kids));
    }
    while (is_op(",")) {
      kids.push_back(take_op(","));
      if (is_op(")")) break;
      kids.push_back(parse_star_or_test(true));
    }
    kids.push_back(take_op(")"));
    return node("tuple", std::move(kids));
  }

  SyntaxNode parse_list() {
    Nodes kids{take_op("[")};
    if (is_op("]")) {
      kids.push_back(take_op("]"));
      return node("list", std::move(kids));
    }
    kids.push_back(parse_star_or_test(true));
    if (at_comp_for()) {
      parse_comprehension_clauses(kids);
      kids.push_back(take_op("]"));
      return node("list_comprehension", std::move(kids));
    }
    while (is_op(",")) {
      kids.push_back(take_op(","));
      if (is_op("]")) break;
      kids.push_back(parse_star_or_test(true));
    }
    kids.push_back(take_op("]"));
    return node("list", std::move(kids));
  }

  SyntaxNode parse_dict_element() {
    if (is_op("**")) {
      Nodes kids{take_op("**")};
      kids.push_back(parse_bitor());
      return node("dictionary_splat", std::move(kids));
    }
    Nodes kids{parse_test(), take_op(":")};
    kids.push_back(parse_test());
    return node("pair", std::move(kids));
  }

  SyntaxNode parse_brace() {
    Nodes kids{take_op("{")};
    if (is_op("}")) {
      kids.push_back(take_op("}"));
      return node("dictionary", std::move(kids));
    }
    bool is_dict = false;
    if (is_op("**")) {
      kids.push_back(parse_dict_element());
      is_dict = true;
    } else {
      SyntaxNode first = parse_star_or_test(true);
      if (is_op(":")) {
        Nodes pair{std::move(first), take_op(":")};
        pair.push_back(parse_test());
        kids.push_back(node("pair", std::move(pair)));
        is_dict = true;
      } else {
        kids.push_back(std::move(first));
      }
    }
    if (at_comp_for()) {
      parse_comprehension_clauses(kids);
      kids.push_back(take_op("}"));
      return node(is_dict ? "dictionary_comprehension" : "set_comprehension", std::move(kids));
    }
    while (is_op(",")) {
      kids.push_back(take_op(","));
      if (is_op("}")) break;
      kids.push_back(is_dict ? parse_dict_element() : parse_star_or_test(true));
    }
    kids.push_back(take_op("}"));
    return node(is_dict ? "dictionary" : "set", std::move(kids));
  }

  // --- extras --------------------------------------------------------------

  static void insert_extra(SyntaxNode& parent, SyntaxNode extra) {
    auto& kids = parent.children;
    auto it = std::partition_point(kids.begin(), kids.end(),
                                   [&](const SyntaxNode& c) { return c.span.end <= extra.span.begin; });
    if (it != kids.end() && !it->is_leaf() && it->span.contains(extra.span)) {
      insert_extra(*it, std::move(extra));
      return;
    }
    kids.insert(it, std::move(extra));
  }

  std::string_view doc_;
  std::vector<LexToken> toks_;
  std::size_t pos_ = 0;
};

inline SyntaxNode parse(std::string_view doc) { return PythonParser(doc).parse(); }

/// The built-in provider.
class PythonSubsetProvider final : public SyntaxProvider {
 public:
  [[nodiscard]] SyntaxNode parse(std::string_view doc) const override { return PythonParser(doc).parse(); }
};

}  // namespace tokenlens::syntax
