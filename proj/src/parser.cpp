// Copyright 2026 The dimbook Authors
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

#include "dimbook/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "dimbook/naming.hpp"

namespace dimbook {

std::string format_diagnostic(const Diagnostic& d) {
  std::ostringstream os;
  os << d.span.file << ':' << d.span.line << ':' << d.span.column << ": "
     << (d.severity == Severity::Error ? "error" : "warning") << " [" << d.code
     << "] " << d.message;
  return os.str();
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
    return d.severity == Severity::Error;
  });
}

namespace {

enum class Tok {
  End,
  Ident,
  Number,
  String,    // "..."
  VarName,   // [...]
  Punct,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  SourceSpan span;
};

class Lexer {
 public:
  Lexer(std::string_view src, std::string file) : src_(src), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.span = {file_, line_, col_};
      if (pos_ >= src_.size()) {
        out.push_back(std::move(t));
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::Ident;
        while (pos_ < src_.size() && is_word(src_[pos_])) t.text += advance();
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        lex_number(t);
      } else if (c == '"') {
        t.kind = Tok::String;
        advance();
        while (pos_ < src_.size() && src_[pos_] != '"') {
          if (src_[pos_] == '\n') throw SyntaxError("unterminated string", t.span);
          t.text += advance();
        }
        if (pos_ >= src_.size()) throw SyntaxError("unterminated string", t.span);
        advance();
      } else if (c == '[') {
        t.kind = Tok::VarName;
        advance();
        while (pos_ < src_.size() && src_[pos_] != ']') {
          if (src_[pos_] == '\n') {
            throw SyntaxError("unterminated variable reference", t.span);
          }
          t.text += advance();
        }
        if (pos_ >= src_.size()) {
          throw SyntaxError("unterminated variable reference", t.span);
        }
        advance();
        t.text = trim(t.text);
        if (t.text.empty()) throw SyntaxError("empty variable reference", t.span);
      } else if (std::string_view("{}=()+-*/^,").find(c) != std::string_view::npos) {
        t.kind = Tok::Punct;
        t.text = std::string(1, advance());
      } else {
        throw SyntaxError(std::string("unexpected character '") + c + "'", t.span);
      }
      out.push_back(std::move(t));
    }
  }

  static std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
  }

 private:
  static bool is_word(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void lex_number(Token& t) {
    t.kind = Tok::Number;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '.')) {
      t.text += advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        while (pos_ < look) t.text += advance();
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          t.text += advance();
        }
      }
    }
    // Codes such as "2024Q1" lex as identifiers-with-digits; keep them whole.
    if (pos_ < src_.size() && is_word(src_[pos_])) {
      t.kind = Tok::Ident;
      while (pos_ < src_.size() && is_word(src_[pos_])) t.text += advance();
      return;
    }
    double scale = 1.0;
    if (pos_ < src_.size() && src_[pos_] == '%') {
      advance();
      scale = 100.0;
      t.text += '%';
    }
    auto digits = std::string_view(t.text);
    if (scale != 1.0) digits.remove_suffix(1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(),
                                     t.number);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) {
      throw SyntaxError("malformed number '" + t.text + "'", t.span);
    }
    t.number /= scale;
  }

  std::string_view src_;
  std::string file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_punct(char c) const {
    return peek().kind == Tok::Punct && peek().text[0] == c;
  }
  bool is_ident(std::string_view word) const {
    return peek().kind == Tok::Ident && peek().text == word;
  }
  Token expect(Tok kind, std::string_view what) {
    if (peek().kind != kind) {
      throw SyntaxError("expected " + std::string(what) + describe(peek()),
                        peek().span);
    }
    return next();
  }
  void expect_punct(char c) {
    if (!is_punct(c)) {
      throw SyntaxError(std::string("expected '") + c + "'" + describe(peek()),
                        peek().span);
    }
    next();
  }
  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::End: return " but reached end of input";
      case Tok::String: return " but found string \"" + t.text + "\"";
      case Tok::VarName: return " but found [" + t.text + "]";
      default: return " but found '" + t.text + "'";
    }
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// Formula grammar, loosest first:
//   sum    := prod (('+'|'-') prod)*
//   prod   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?          right-associative
//   atom   := number | [name] | '(' sum ')' | SUM '(' [name] ')'
class FormulaParser {
 public:
  explicit FormulaParser(TokenStream& ts) : ts_(ts) {}

  ExprPtr parse() {
    const SourceSpan start = ts_.peek().span;
    ExprPtr e = parse_sum();
    if (sum_seen_ && !is_aggregate(*e)) {
      throw SyntaxError("SUM must be the entire formula", start);
    }
    return e;
  }

 private:
  ExprPtr parse_sum() {
    ExprPtr lhs = parse_prod();
    while (ts_.is_punct('+') || ts_.is_punct('-')) {
      const auto op = ts_.next().text[0] == '+' ? BinaryOp::Add : BinaryOp::Sub;
      lhs = make_binary(op, lhs, parse_prod());
    }
    return lhs;
  }

  ExprPtr parse_prod() {
    ExprPtr lhs = parse_unary();
    while (ts_.is_punct('*') || ts_.is_punct('/')) {
      const auto op = ts_.next().text[0] == '*' ? BinaryOp::Mul : BinaryOp::Div;
      lhs = make_binary(op, lhs, parse_unary());
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    if (ts_.is_punct('-')) {
      ts_.next();
      return make_negate(parse_unary());
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    if (ts_.is_punct('^')) {
      ts_.next();
      return make_binary(BinaryOp::Pow, base, parse_unary());
    }
    return base;
  }

  ExprPtr parse_atom() {
    const Token& t = ts_.peek();
    if (t.kind == Tok::Number) return make_literal(ts_.next().number);
    if (t.kind == Tok::VarName) return make_ref(ts_.next().text);
    if (ts_.is_punct('(')) {
      ts_.next();
      ExprPtr inner = parse_sum();
      ts_.expect_punct(')');
      return inner;
    }
    if (t.kind == Tok::Ident && (t.text == "SUM" || t.text == "sum")) {
      ts_.next();
      ts_.expect_punct('(');
      Token name = ts_.expect(Tok::VarName, "a [variable] inside SUM");
      ts_.expect_punct(')');
      sum_seen_ = true;
      return make_sum(name.text);
    }
    throw SyntaxError("expected a number, [variable], '(' or SUM" +
                          TokenStream::describe(t),
                      t.span);
  }

  TokenStream& ts_;
  bool sum_seen_ = false;
};

bool is_kind_keyword(std::string_view w) {
  return w == "input" || w == "data" || w == "calc" || w == "output";
}

VariableKind kind_from_keyword(std::string_view w) {
  if (w == "input") return VariableKind::Input;
  if (w == "data") return VariableKind::Data;
  if (w == "output") return VariableKind::Output;
  return VariableKind::Calculated;
}

class ModelParser {
 public:
  ModelParser(TokenStream& ts, ParseResult& out) : ts_(ts), out_(out) {}

  void run() {
    while (!ts_.at_end()) {
      const Token& t = ts_.peek();
      if (t.kind == Tok::Ident && t.text == "dimension") {
        parse_dimension();
      } else if (t.kind == Tok::Ident && t.text == "table") {
        ts_.next();
        out_.model.table_paths.push_back(ts_.expect(Tok::String, "a file name").text);
      } else if (t.kind == Tok::Ident && is_kind_keyword(t.text)) {
        parse_variable();
      } else {
        throw SyntaxError("expected 'dimension', 'table', 'input', 'data', "
                          "'calc' or 'output'" + TokenStream::describe(t),
                          t.span);
      }
    }
  }

 private:
  void error(std::string code, std::string message, const SourceSpan& span) {
    out_.diagnostics.push_back(
        {Severity::Error, std::move(code), std::move(message), span});
  }

  void parse_dimension() {
    ts_.next();
    Token name = ts_.expect(Tok::Ident, "a dimension name");
    if (!ts_.is_ident("initial")) {
      throw SyntaxError("expected 'initial'" + TokenStream::describe(ts_.peek()),
                        ts_.peek().span);
    }
    ts_.next();
    Token initial = ts_.expect(Tok::Ident, "a dimension initial");
    ts_.expect_punct('{');
    Dimension dim;
    dim.name = name.text;
    if (initial.text.size() != 1 ||
        !std::isupper(static_cast<unsigned char>(initial.text[0]))) {
      error("bad-initial", "initial of '" + dim.name +
                               "' must be a single uppercase letter",
            initial.span);
    } else {
      dim.initial = initial.text[0];
    }
    while (!ts_.is_punct('}')) {
      const Token& t = ts_.peek();
      if (t.kind != Tok::Ident && t.kind != Tok::Number) {
        throw SyntaxError("expected a member code or '}'" +
                              TokenStream::describe(t),
                          t.span);
      }
      Token code = ts_.next();
      Member m{code.text, {}};
      if (ts_.peek().kind == Tok::String) m.label = ts_.next().text;
      if (dim.member_index(m.code)) {
        error("duplicate-member",
              "member '" + m.code + "' repeated in dimension " + dim.name,
              code.span);
      }
      if (m.code.find('%') != std::string::npos ||
          m.code.find('.') != std::string::npos) {
        error("bad-member-code",
              "member code '" + m.code + "' may only use letters, digits and _",
              code.span);
      }
      dim.members.push_back(std::move(m));
      if (ts_.is_punct('-')) {
        error("bad-member-code", "member codes cannot contain '-'",
              ts_.peek().span);
        ts_.next();
      }
    }
    ts_.next();
    if (dim.members.empty()) {
      error("empty-dimension", "dimension " + dim.name + " has no members",
            name.span);
    }
    for (const auto& other : out_.model.dimensions) {
      if (other.name == dim.name) {
        error("duplicate-dimension", "dimension " + dim.name + " declared twice",
              name.span);
      } else if (other.initial == dim.initial) {
        error("duplicate-initial",
              std::string("initial '") + dim.initial + "' of " + dim.name +
                  " already used by " + other.name,
              initial.span);
      }
    }
    if (out_.model.dimensions.size() >= DimensionSet::kMaxDimensions) {
      error("too-many-dimensions", "at most 64 dimensions are supported",
            name.span);
      return;
    }
    out_.model.dimensions.push_back(std::move(dim));
  }

  void parse_variable() {
    Token kw = ts_.next();
    Token name = ts_.expect(Tok::String, "a quoted variable name");
    Variable v;
    v.kind = kind_from_keyword(kw.text);
    v.name = Lexer::trim(name.text);
    v.span = name.span;
    if (v.name.empty()) error("empty-name", "variable name is empty", name.span);

    if (ts_.is_ident("over")) {
      ts_.next();
      parse_dimset_into(v);
    }
    if (ts_.is_ident("format")) {
      ts_.next();
      Token f = ts_.expect(Tok::Ident, "a number format");
      if (f.text == "currency") v.number_format = NumberFormat::Currency;
      else if (f.text == "percent") v.number_format = NumberFormat::Percent;
      else if (f.text == "decimal") v.number_format = NumberFormat::Decimal2;
      else if (f.text == "general") v.number_format = NumberFormat::General;
      else error("bad-format", "unknown number format '" + f.text + "'", f.span);
    }
    if (ts_.is_punct('=')) {
      const SourceSpan at = ts_.peek().span;
      ts_.next();
      FormulaParser fp(ts_);
      ExprPtr e = fp.parse();
      if (carries_values(v.kind)) {
        bind_inline_value(v, *e, at);
      } else {
        v.formula = std::move(e);
      }
    } else if (!carries_values(v.kind)) {
      error("missing-formula",
            std::string(to_string(v.kind)) + " variable '" + v.name +
                "' needs '= <formula>'",
            name.span);
    } else if (v.dimset.empty()) {
      // Dimensionless data may also come from a table; checked at load.
    }

    for (const auto& other : out_.model.variables) {
      if (other.name == v.name) {
        error("duplicate-variable", "variable '" + v.name + "' declared twice",
              name.span);
        break;
      }
    }
    out_.model.variables.push_back(std::move(v));
  }

  void bind_inline_value(Variable& v, const Expr& e, const SourceSpan& at) {
    double value = 0.0;
    if (const auto* lit = std::get_if<Literal>(&e.node)) {
      value = lit->value;
    } else if (const auto* neg = std::get_if<Negate>(&e.node);
               neg && std::holds_alternative<Literal>(neg->operand->node)) {
      value = -std::get<Literal>(neg->operand->node).value;
    } else {
      error("unexpected-formula",
            std::string(to_string(v.kind)) + " variable '" + v.name +
                "' takes a number, not a formula",
            at);
      return;
    }
    if (!v.dimset.empty()) {
      error("inline-data",
            "inline values are only allowed for dimensionless variables; "
            "put '" + v.name + "' in a table",
            at);
      return;
    }
    v.inline_value = value;
  }

  void parse_dimset_into(Variable& v) {
    for (;;) {
      Token d = ts_.expect(Tok::Ident, "a dimension name");
      auto idx = out_.model.dimension_index(d.text);
      if (!idx) {
        error("unknown-dimension", "unknown dimension '" + d.text + "'", d.span);
      } else if (v.dimset.contains(*idx)) {
        error("repeated-dimension",
              "dimension '" + d.text + "' repeated in the set of '" + v.name + "'",
              d.span);
      } else {
        v.dimset = v.dimset.with(*idx);
      }
      if (!ts_.is_punct('-')) break;
      ts_.next();
    }
  }

  TokenStream& ts_;
  ParseResult& out_;
};

void check_references(ParseResult& r) {
  Model& m = r.model;
  m.reindex();
  std::map<std::string, std::string> mangled;
  for (const auto& v : m.variables) {
    std::string key;
    try {
      key = to_lower(mangle_variable_name(v.name));
    } catch (const NamingError& e) {
      r.diagnostics.push_back({Severity::Error, "bad-name", e.what(), v.span});
      continue;
    }
    auto [it, inserted] = mangled.emplace(key, v.name);
    if (!inserted && it->second != v.name) {
      r.diagnostics.push_back(
          {Severity::Error, "name-collision",
           "'" + v.name + "' and '" + it->second +
               "' map to the same spreadsheet name",
           v.span});
    }
    if (!v.formula) continue;
    for (const auto& ref : referenced_variables(*v.formula)) {
      if (!m.variable_index(ref)) {
        r.diagnostics.push_back({Severity::Error, "unresolved-reference",
                                 "'" + v.name + "' references undeclared variable '" +
                                     ref + "'",
                                 v.span});
      }
    }
  }
  if (m.dimensions.empty() && m.variables.empty()) {
    r.diagnostics.push_back(
        {Severity::Warning, "empty-model", "empty model", {m.source_name, 1, 1}});
  }
}

}  // namespace

ParseResult parse_model(std::string_view source, std::string_view file_name) {
  ParseResult r;
  r.model.source_name = std::string(file_name);
  try {
    TokenStream ts(Lexer(source, std::string(file_name)).run());
    ModelParser(ts, r).run();
  } catch (const SyntaxError& e) {
    r.diagnostics.push_back({Severity::Error, "syntax", e.what(), e.span()});
    r.model.reindex();
    return r;
  }
  check_references(r);
  return r;
}

ExprPtr parse_formula(std::string_view text) {
  TokenStream ts(Lexer(text, "<formula>").run());
  ExprPtr e = FormulaParser(ts).parse();
  if (!ts.at_end()) {
    throw SyntaxError("unexpected trailing input" + TokenStream::describe(ts.peek()),
                      ts.peek().span);
  }
  return e;
}

namespace {

int precedence(const Expr& e) {
  if (const auto* b = std::get_if<Binary>(&e.node)) {
    switch (b->op) {
      case BinaryOp::Add:
      case BinaryOp::Sub: return 1;
      case BinaryOp::Mul:
      case BinaryOp::Div: return 2;
      case BinaryOp::Pow: return 4;
    }
  }
  if (std::holds_alternative<Negate>(e.node)) return 3;
  return 5;
}

std::string number_text(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void render(const Expr& e, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Literal>) {
          if (n.value < 0 || (n.value == 0 && std::signbit(n.value))) {
            out += "(-" + number_text(-n.value) + ")";
          } else {
            out += number_text(n.value);
          }
        } else if constexpr (std::is_same_v<T, VarRef>) {
          out += "[" + n.name + "]";
        } else if constexpr (std::is_same_v<T, Sum>) {
          out += "SUM([" + n.name + "])";
        } else if constexpr (std::is_same_v<T, Negate>) {
          out += '-';
          const bool wrap = precedence(*n.operand) < 3;
          if (wrap) out += '(';
          render(*n.operand, out);
          if (wrap) out += ')';
        } else {
          const int p = precedence(e);
          // Left-associative operators need parentheses on the right at equal
          // precedence; '^' is right-associative so the mirror image holds.
          const bool pow = n.op == BinaryOp::Pow;
          const bool wrap_l = pow ? precedence(*n.lhs) <= p : precedence(*n.lhs) < p;
          const bool wrap_r = pow ? precedence(*n.rhs) < 3 : precedence(*n.rhs) <= p;
          if (wrap_l) out += '(';
          render(*n.lhs, out);
          if (wrap_l) out += ')';
          out += ' ';
          out += binary_op_symbol(n.op);
          out += ' ';
          if (wrap_r) out += '(';
          render(*n.rhs, out);
          if (wrap_r) out += ')';
        }
      },
      e.node);
}

}  // namespace

std::string render_formula(const Expr& e) {
  std::string out;
  render(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// CSV

std::vector<CsvRow> read_csv(std::string_view text, std::string_view name) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  int line = 1;
  row.line = 1;
  bool in_quotes = false;
  bool any = false;  // current row has content
  int quote_line = 0;
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  auto end_row = [&] {
    if (any || !row.fields.empty() || !field.empty()) {
      row.fields.push_back(std::move(field));
      rows.push_back(std::move(row));
    }
    row = CsvRow{};
    field.clear();
    any = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (!any && row.fields.empty() && field.empty()) row.line = line;
    switch (c) {
      case '"':
        in_quotes = true;
        quote_line = line;
        any = true;
        break;
      case ',':
        row.fields.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        break;
      default:
        field += c;
        any = true;
    }
  }
  if (in_quotes) {
    throw SyntaxError("unterminated quoted field", {std::string(name), quote_line, 1});
  }
  end_row();
  return rows;
}

std::optional<double> parse_data_number(std::string_view text) {
  auto b = text.find_first_not_of(" \t");
  if (b == std::string_view::npos) return std::nullopt;
  auto e = text.find_last_not_of(" \t");
  text = text.substr(b, e - b + 1);
  double scale = 1.0;
  if (!text.empty() && text.back() == '%') {
    scale = 100.0;
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v / scale;
}

namespace {

DataTable& table_for(Model& m, DimensionSet set) {
  for (auto& t : m.tables) {
    if (t.dimset == set) return t;
  }
  m.tables.push_back(DataTable{set, {}});
  return m.tables.back();
}

void load_one(Model& m, const CsvDocument& doc, std::vector<Diagnostic>& diags,
              std::set<std::string>& bound) {
  auto err = [&](std::string code, std::string msg, int line, int col = 1) {
    diags.push_back({Severity::Error, std::move(code), std::move(msg),
                     {doc.name, line, col}});
  };
  std::vector<CsvRow> rows;
  try {
    rows = read_csv(doc.text, doc.name);
  } catch (const SyntaxError& e) {
    diags.push_back({Severity::Error, "csv-syntax", e.what(), e.span()});
    return;
  }
  if (rows.empty()) {
    err("empty-table", "table has no header row", 1);
    return;
  }
  const auto& header = rows.front().fields;
  DimensionSet set;
  std::vector<std::size_t> dim_cols;   // column index per table dimension
  std::vector<std::size_t> dim_of_col;
  std::vector<std::pair<std::size_t, std::size_t>> var_cols;  // (col, var idx)
  std::vector<std::pair<std::size_t, std::size_t>> dim_pairs;  // (dim, col)
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = Lexer::trim(header[c]);
    if (auto d = m.dimension_index(name)) {
      if (set.contains(*d)) {
        err("duplicate-column", "dimension column '" + name + "' repeated", 1,
            static_cast<int>(c) + 1);
        return;
      }
      set = set.with(*d);
      dim_pairs.emplace_back(*d, c);
    } else if (auto v = m.variable_index(name)) {
      var_cols.emplace_back(c, *v);
    } else {
      err("unknown-column",
          "column '" + name + "' is neither a dimension nor a variable", 1,
          static_cast<int>(c) + 1);
      return;
    }
  }
  std::sort(dim_pairs.begin(), dim_pairs.end());
  for (auto& [d, c] : dim_pairs) dim_cols.push_back(c);
  const auto dims = set.dims();

  for (auto [col, vi] : var_cols) {
    const Variable& v = m.variables[vi];
    if (!carries_values(v.kind)) {
      err("not-data", "'" + v.name + "' is " + to_string(v.kind) +
                          " and cannot be given values",
          1, static_cast<int>(col) + 1);
      return;
    }
    if (v.dimset != set) {
      err("wrong-table", "'" + v.name + "' is declared over '" +
                             m.dimset_name(v.dimset) + "' but the table is over '" +
                             m.dimset_name(set) + "'",
          1, static_cast<int>(col) + 1);
      return;
    }
    if (!bound.insert(v.name).second || v.inline_value) {
      err("duplicate-data", "values for '" + v.name + "' given more than once", 1,
          static_cast<int>(col) + 1);
      return;
    }
  }

  const auto radices = m.radices(set);
  const std::size_t count = m.cardinality(set);
  std::vector<std::vector<double>> values(var_cols.size(),
                                          std::vector<double>(count, 0.0));
  std::vector<int> seen_line(count, 0);
  bool failed = false;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    if (row.fields.size() != header.size()) {
      err("bad-row", "row has " + std::to_string(row.fields.size()) +
                         " fields, header has " + std::to_string(header.size()),
          row.line);
      failed = true;
      continue;
    }
    Tuple t(dims.size());
    bool ok = true;
    for (std::size_t i = 0; i < dims.size(); ++i) {
      const std::string code = Lexer::trim(row.fields[dim_cols[i]]);
      auto mi = m.dimensions[dims[i]].member_index(code);
      if (!mi) {
        err("unknown-member", "unknown member '" + code + "' of dimension " +
                                  m.dimensions[dims[i]].name,
            row.line, static_cast<int>(dim_cols[i]) + 1);
        ok = false;
        break;
      }
      t[i] = *mi;
    }
    if (!ok) {
      failed = true;
      continue;
    }
    const std::size_t ord = tuple_ordinal(radices, t);
    if (seen_line[ord] != 0) {
      err("duplicate-tuple",
          "tuple " + join_codes(m.member_codes(set, t)) +
              " already given on line " + std::to_string(seen_line[ord]),
          row.line);
      failed = true;
      continue;
    }
    seen_line[ord] = row.line;
    for (std::size_t k = 0; k < var_cols.size(); ++k) {
      const auto& cell = row.fields[var_cols[k].first];
      auto num = parse_data_number(cell);
      if (!num) {
        err("not-numeric", "value '" + cell + "' for '" +
                               m.variables[var_cols[k].second].name +
                               "' is not numeric",
            row.line, static_cast<int>(var_cols[k].first) + 1);
        failed = true;
        continue;
      }
      values[k][ord] = *num;
    }
  }
  for (std::size_t ord = 0; ord < count && !failed; ++ord) {
    if (seen_line[ord] == 0) {
      err("missing-tuple",
          "missing tuple " + join_codes(m.member_codes(set, tuple_at(radices, ord))) +
              " (tables must cover every combination)",
          rows.back().line);
      failed = true;
    }
  }
  if (failed) return;
  DataTable& table = table_for(m, set);
  for (std::size_t k = 0; k < var_cols.size(); ++k) {
    table.columns.push_back({m.variables[var_cols[k].second].name, std::move(values[k])});
  }
}

}  // namespace

ParseResult load_data(Model model, const std::vector<CsvDocument>& tables) {
  ParseResult r;
  r.model = std::move(model);
  Model& m = r.model;
  m.reindex();
  m.tables.clear();
  std::set<std::string> bound;
  for (const auto& v : m.variables) {
    if (carries_values(v.kind) && v.inline_value) {
      table_for(m, DimensionSet{}).columns.push_back({v.name, {*v.inline_value}});
      bound.insert(v.name);
    }
  }
  for (const auto& doc : tables) load_one(m, doc, r.diagnostics, bound);
  for (const auto& v : m.variables) {
    if (carries_values(v.kind) && !bound.count(v.name)) {
      r.diagnostics.push_back({Severity::Error, "missing-data",
                               std::string(to_string(v.kind)) + " variable '" +
                                   v.name + "' has no values",
                               v.span});
    }
  }
  // Keep tables in order of the first variable they hold.
  auto first_var = [&](const DataTable& t) {
    std::size_t best = m.variables.size();
    for (const auto& c : t.columns) {
      best = std::min(best, m.variable_index(c.variable).value_or(best));
    }
    return best;
  };
  std::stable_sort(m.tables.begin(), m.tables.end(),
                   [&](const DataTable& a, const DataTable& b) {
                     return first_var(a) < first_var(b);
                   });
  for (auto& t : m.tables) {
    std::stable_sort(t.columns.begin(), t.columns.end(),
                     [&](const DataColumn& a, const DataColumn& b) {
                       return m.variable_index(a.variable) < m.variable_index(b.variable);
                     });
  }
  return r;
}

}  // namespace dimbook
