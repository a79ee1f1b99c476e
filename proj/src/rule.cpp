// Copyright 2026 The LLMClean Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "llmclean/rule.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <set>

#include "llmclean/error.hpp"
#include "llmclean/util.hpp"

namespace llmclean {

namespace {

std::atomic<std::uint64_t> g_parse_calls{0};

constexpr std::string_view kKindNames[] = {"denial",   "matching", "device_link", "temporal",
                                           "locality", "monitoring", "capability"};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool valid_ident(std::string_view s) {
  if (s.empty() || !is_ident_start(s[0])) return false;
  for (char c : s) {
    if (!is_ident_char(c)) return false;
  }
  return true;
}

bool valid_column(std::string_view s) {
  if (s.empty()) return false;
  if (std::isspace(static_cast<unsigned char>(s.front())) ||
      std::isspace(static_cast<unsigned char>(s.back()))) {
    return false;
  }
  return s.find_first_of(",()\"&\n\r") == std::string_view::npos;
}

bool is_percent(double t) {
  const double scaled = t * 100.0;
  return std::fabs(scaled - std::round(scaled)) < 1e-9;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  OfdRule parse(DependencyKind kind) {
    OfdRule rule;
    rule.kind = kind;
    skip_ws();
    const std::size_t first_alias_at = pos_;
    std::string first = ident();
    if (first.empty()) fail("expected tuple alias", first_alias_at);
    skip_ws();
    if (peek() == '(') fail("rule must start with a tuple alias", first_alias_at);
    rule.aliases.push_back(first);

    while (true) {
      skip_ws();
      if (at_end()) break;
      if (peek() != '&') fail("expected '&'", pos_);
      ++pos_;
      skip_ws();
      const std::size_t tok_at = pos_;
      std::string tok = ident();
      if (tok.empty()) fail(at_end() ? "expected predicate after '&'" : "expected alias or predicate", tok_at);
      skip_ws();
      if (peek() != '(') {
        if (!rule.predicates.empty()) fail("tuple aliases must precede predicates", tok_at);
        if (rule.aliases.size() >= 2) fail("at most two tuple aliases are supported", tok_at);
        if (tok == rule.aliases.front()) fail("duplicate tuple alias " + tok, tok_at);
        rule.aliases.push_back(tok);
        continue;
      }
      rule.predicates.push_back(predicate(tok, tok_at, rule.aliases));
    }
    if (rule.predicates.empty()) fail("empty predicate list", s_.size());
    for (const auto& alias : rule.aliases) {
      if (rule.aliases.size() < 2) break;
      bool used = false;
      for (const auto& p : rule.predicates) {
        for (const Operand* o : {&p.left, &p.right}) {
          if (const auto* c = std::get_if<ColumnRef>(o); c && c->alias == alias) used = true;
        }
      }
      if (!used) fail("tuple alias " + alias + " is not referenced by any predicate", 0);
    }
    return rule;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw ParseError(msg + " at offset " + std::to_string(at), at);
  }
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }
  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  std::string ident() {
    const std::size_t start = pos_;
    if (at_end() || !is_ident_start(s_[pos_])) return {};
    while (!at_end() && is_ident_char(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  Predicate predicate(const std::string& op_token, std::size_t op_at,
                      const std::vector<std::string>& aliases) {
    Predicate p;
    if (op_token == "EQ") {
      p.op = PredicateOp::EQ;
    } else if (op_token == "IQ") {
      p.op = PredicateOp::IQ;
    } else if (op_token.rfind("SIM", 0) == 0) {
      p.op = PredicateOp::SIM;
      const std::string digits = op_token.substr(3);
      if (digits.empty()) {
        p.sim_threshold = kDefaultSimThreshold;
      } else {
        if (digits.size() > 3) fail("unknown operator " + op_token, op_at);
        for (char c : digits) {
          if (!std::isdigit(static_cast<unsigned char>(c))) fail("unknown operator " + op_token, op_at);
        }
        const int pct = std::stoi(digits);
        if (pct > 100) fail("similarity threshold above 100 in " + op_token, op_at);
        p.sim_threshold = pct / 100.0;
      }
    } else {
      fail("unknown operator " + op_token, op_at);
    }
    ++pos_;  // '('
    p.left = operand(aliases);
    skip_ws();
    if (peek() != ',') fail("expected ',' between operands", pos_);
    ++pos_;
    p.right = operand(aliases);
    skip_ws();
    if (peek() != ')') fail("unbalanced parentheses: expected ')'", pos_);
    ++pos_;
    return p;
  }

  Operand operand(const std::vector<std::string>& aliases) {
    skip_ws();
    if (at_end()) fail("unbalanced parentheses: unexpected end of rule", pos_);
    if (peek() == '"') {
      const std::size_t start = pos_;
      ++pos_;
      std::string value;
      while (true) {
        if (at_end()) fail("unterminated string literal", start);
        char c = s_[pos_++];
        if (c == '"') break;
        if (c == '\\') {
          if (at_end()) fail("unterminated string literal", start);
          char e = s_[pos_++];
          if (e != '"' && e != '\\') fail("invalid escape sequence", pos_ - 2);
          value.push_back(e);
        } else {
          value.push_back(c);
        }
      }
      return Literal{std::move(value)};
    }
    const std::size_t alias_at = pos_;
    std::string alias = ident();
    if (alias.empty()) fail("expected operand", alias_at);
    if (peek() != '.') fail("expected '.' after tuple alias " + alias, pos_);
    bool declared = false;
    for (const auto& a : aliases) declared = declared || a == alias;
    if (!declared) fail("undeclared tuple alias " + alias, alias_at);
    ++pos_;
    const std::size_t col_at = pos_;
    while (!at_end() && s_[pos_] != ',' && s_[pos_] != ')') {
      const char c = s_[pos_];
      if (c == '(' || c == '"' || c == '&' || c == '\n' || c == '\r') {
        fail("invalid character in column name", pos_);
      }
      ++pos_;
    }
    std::string column = trim(s_.substr(col_at, pos_ - col_at));
    if (column.empty()) fail("empty column name", col_at);
    return ColumnRef{std::move(alias), std::move(column)};
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

std::string render_operand(const Operand& o) {
  if (const auto* c = std::get_if<ColumnRef>(&o)) return c->alias + "." + c->column;
  const auto& lit = std::get<Literal>(o).value;
  std::string out = "\"";
  for (char ch : lit) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string_view kind_name(DependencyKind kind) { return kKindNames[static_cast<int>(kind)]; }

std::optional<DependencyKind> kind_from_name(std::string_view name) {
  for (int i = 0; i < 7; ++i) {
    if (kKindNames[i] == name) return static_cast<DependencyKind>(i);
  }
  return std::nullopt;
}

OfdRule parse_rule(std::string_view text, DependencyKind kind) {
  ++g_parse_calls;
  return Parser(text).parse(kind);
}

std::uint64_t rule_parse_count() { return g_parse_calls.load(); }

void validate_rule(const OfdRule& rule) {
  auto bad = [](const std::string& msg) { throw ParseError("invalid rule: " + msg, 0); };
  if (rule.aliases.empty() || rule.aliases.size() > 2) bad("a rule declares one or two tuple aliases");
  for (const auto& a : rule.aliases) {
    if (!valid_ident(a)) bad("alias '" + a + "' is not an identifier");
  }
  if (rule.aliases.size() == 2 && rule.aliases[0] == rule.aliases[1]) bad("duplicate tuple alias");
  if (rule.predicates.empty()) bad("empty predicate list");
  std::set<std::string> referenced;
  for (const auto& p : rule.predicates) {
    if (p.op == PredicateOp::SIM) {
      if (!p.sim_threshold) bad("SIM predicate without threshold");
      if (*p.sim_threshold < 0.0 || *p.sim_threshold > 1.0 || !is_percent(*p.sim_threshold)) {
        bad("SIM threshold must be a whole percentage in [0, 1]");
      }
    } else if (p.sim_threshold) {
      bad("EQ/IQ predicates take no threshold");
    }
    for (const Operand* o : {&p.left, &p.right}) {
      if (const auto* c = std::get_if<ColumnRef>(o)) {
        if (std::find(rule.aliases.begin(), rule.aliases.end(), c->alias) == rule.aliases.end()) {
          bad("undeclared tuple alias " + c->alias);
        }
        if (!valid_column(c->column)) bad("column name '" + c->column + "' cannot be written in a rule");
        referenced.insert(c->alias);
      }
    }
  }
  if (rule.aliases.size() == 2 && referenced.size() < 2) bad("both tuple aliases must be referenced");
}

std::string render_rule(const OfdRule& rule) {
  std::string out = join(rule.aliases, "&");
  for (const auto& p : rule.predicates) {
    out += '&';
    switch (p.op) {
      case PredicateOp::EQ:
        out += "EQ";
        break;
      case PredicateOp::IQ:
        out += "IQ";
        break;
      case PredicateOp::SIM:
        out += "SIM" + std::to_string(static_cast<int>(
                           std::lround(p.sim_threshold.value_or(kDefaultSimThreshold) * 100.0)));
        break;
    }
    out += '(' + render_operand(p.left) + ',' + render_operand(p.right) + ')';
  }
  return out;
}

RuleFile parse_rule_file(std::string_view text, bool strict) {
  RuleFile out;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (const auto& raw_line : split(text, '\n')) {
    ++line_no;
    const std::string line = trim(raw_line);
    if (line.empty() || line[0] == '#') continue;
    try {
      std::size_t i = 0;
      while (i < line.size() && (is_ident_char(line[i]))) ++i;
      const std::string kind_text = line.substr(0, i);
      auto kind = kind_from_name(kind_text);
      if (!kind) throw ParseError("unknown dependency kind '" + kind_text + "'", line_no);
      std::string id;
      if (i < line.size() && line[i] == '[') {
        const auto close = line.find(']', i);
        if (close == std::string::npos) throw ParseError("unterminated rule id", line_no);
        id = trim(std::string_view(line).substr(i + 1, close - i - 1));
        if (id.empty()) throw ParseError("empty rule id", line_no);
        i = close + 1;
      }
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i >= line.size() || line[i] != ':') throw ParseError("expected ':' after rule kind", line_no);
      OfdRule rule;
      try {
        rule = parse_rule(std::string_view(line).substr(i + 1), *kind);
      } catch (const ParseError& e) {
        throw ParseError("line " + std::to_string(line_no) + ": " + e.what(), line_no);
      }
      if (id.empty()) id = std::string(kind_name(*kind)) + "_" + std::to_string(out.rules.size() + 1);
      if (!ids.insert(id).second) throw ParseError("duplicate rule id " + id, line_no);
      rule.id = std::move(id);
      out.rules.push_back(std::move(rule));
    } catch (const ParseError& e) {
      if (strict) throw;
      out.errors.push_back({line_no, e.what()});
    }
  }
  return out;
}

std::string render_rule_file(const std::vector<OfdRule>& rules) {
  std::string out;
  for (const auto& r : rules) {
    out += kind_name(r.kind);
    if (!r.id.empty()) out += "[" + r.id + "]";
    out += ": " + render_rule(r) + "\n";
  }
  return out;
}

}  // namespace llmclean
