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

#include "dimbook/formula.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <queue>
#include <regex>
#include <unordered_map>

#include "dimbook/keygen.hpp"
#include "dimbook/naming.hpp"

namespace dimbook {

// ---------------------------------------------------------------------------
// Values

bool is_error(const CellValue& v) { return std::holds_alternative<ErrorValue>(v); }

std::optional<double> as_number(const CellValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::nullopt;
}

std::string to_display(const CellValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "";
        else if constexpr (std::is_same_v<T, double>) return format_number(x);
        else if constexpr (std::is_same_v<T, std::string>) return x;
        else if constexpr (std::is_same_v<T, bool>) return x ? "TRUE" : "FALSE";
        else return x.code;
      },
      v);
}

CellValue arith(char op, double a, double b) {
  double r = 0;
  switch (op) {
    case '+': r = a + b; break;
    case '-': r = a - b; break;
    case '*': r = a * b; break;
    case '/':
      if (b == 0) return kDivZero;
      r = a / b;
      break;
    case '^':
      if (a == 0 && b < 0) return kDivZero;
      r = std::pow(a, b);
      break;
    default: return kBadValue;
  }
  if (!std::isfinite(r)) return kBadNum;
  return r;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

const std::regex kCellPattern(R"(^\$?([A-Za-z]{1,3})\$?([0-9]+)$)");
const std::regex kRowRangePattern(R"(^\$?([0-9]+):\$?([0-9]+))");

SExprPtr node(auto n) { return std::make_shared<const SExpr>(SExpr{std::move(n)}); }

class SParser {
 public:
  explicit SParser(std::string_view s) : s_(s) {}

  SExprPtr parse() {
    skip_ws();
    if (peek() == '=') ++i_;
    SExprPtr e = comparison();
    skip_ws();
    if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw FormulaSyntaxError(why + " at offset " + std::to_string(i_), i_);
  }
  char peek(std::size_t k = 0) const { return i_ + k < s_.size() ? s_[i_ + k] : '\0'; }
  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(std::string_view tok) {
    skip_ws();
    if (s_.substr(i_, tok.size()) == tok) {
      i_ += tok.size();
      return true;
    }
    return false;
  }

  SExprPtr comparison() {
    SExprPtr l = concat();
    for (;;) {
      std::string op;
      for (std::string_view cand : {"<=", ">=", "<>", "=", "<", ">"}) {
        if (eat(cand)) {
          op = cand;
          break;
        }
      }
      if (op.empty()) return l;
      l = node(SBinary{op, l, concat()});
    }
  }

  SExprPtr concat() {
    SExprPtr l = additive();
    while (eat("&")) l = node(SBinary{"&", l, additive()});
    return l;
  }

  SExprPtr additive() {
    SExprPtr l = multiplicative();
    for (;;) {
      if (eat("+")) l = node(SBinary{"+", l, multiplicative()});
      else if (eat("-")) l = node(SBinary{"-", l, multiplicative()});
      else return l;
    }
  }

  SExprPtr multiplicative() {
    SExprPtr l = unary();
    for (;;) {
      if (eat("*")) l = node(SBinary{"*", l, unary()});
      else if (eat("/")) l = node(SBinary{"/", l, unary()});
      else return l;
    }
  }

  SExprPtr unary() {
    if (eat("-")) return node(SUnary{unary()});
    if (eat("+")) return unary();
    return power();
  }

  SExprPtr power() {
    SExprPtr base = primary();
    if (eat("^")) return node(SBinary{"^", base, unary()});
    return base;
  }

  SExprPtr primary() {
    skip_ws();
    const char c = peek();
    if (c == '\0') fail("unexpected end of formula");
    if (c == '(') {
      ++i_;
      SExprPtr e = comparison();
      if (!eat(")")) fail("expected ')'");
      return e;
    }
    if (c == '"') return string_literal();
    if (c == '\'') {
      std::string sheet = quoted_sheet();
      return reference(std::move(sheet));
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      if (auto rows = row_range(std::nullopt)) return rows;
      return number();
    }
    if (c == '$') {
      if (auto rows = row_range(std::nullopt)) return rows;
      return reference(std::nullopt);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = i_;
      std::string word = read_word();
      if (peek() == '!') {
        ++i_;
        return reference(std::move(word));
      }
      if (peek() == '(') {
        ++i_;
        return call(word);
      }
      std::string upper = word;
      for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      if (upper == "TRUE" || upper == "FALSE") return node(SBool{upper == "TRUE"});
      if (std::regex_match(word, kCellPattern) || word.find('$') != std::string::npos) {
        i_ = start;
        return reference(std::nullopt);
      }
      return node(SName{std::move(word)});
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string read_word() {
    std::string w;
    while (i_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_' ||
            s_[i_] == '.' || s_[i_] == '$')) {
      w += s_[i_++];
    }
    return w;
  }

  SExprPtr string_literal() {
    ++i_;
    std::string out;
    for (;;) {
      if (i_ >= s_.size()) fail("unterminated string");
      if (s_[i_] == '"') {
        if (peek(1) == '"') {
          out += '"';
          i_ += 2;
          continue;
        }
        ++i_;
        return node(SText{std::move(out)});
      }
      out += s_[i_++];
    }
  }

  std::string quoted_sheet() {
    ++i_;
    std::string out;
    for (;;) {
      if (i_ >= s_.size()) fail("unterminated sheet name");
      if (s_[i_] == '\'') {
        if (peek(1) == '\'') {
          out += '\'';
          i_ += 2;
          continue;
        }
        ++i_;
        break;
      }
      out += s_[i_++];
    }
    if (peek() != '!') fail("expected '!' after sheet name");
    ++i_;
    return out;
  }

  SExprPtr number() {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + i_, s_.data() + s_.size(), v);
    if (ec != std::errc()) fail("malformed number");
    i_ = static_cast<std::size_t>(ptr - s_.data());
    return node(SNumber{v});
  }

  SExprPtr row_range(std::optional<std::string> sheet) {
    std::match_results<std::string_view::const_iterator> m;
    const std::string_view rest = s_.substr(i_);
    if (!std::regex_search(rest.begin(), rest.end(), m, kRowRangePattern)) return nullptr;
    RangeRef r;
    r.sheet = std::move(sheet);
    r.row1 = std::stoul(m[1].str());
    r.row2 = std::stoul(m[2].str());
    if (r.row1 == 0 || r.row2 == 0) fail("row 0 in reference");
    if (r.row1 > r.row2) std::swap(r.row1, r.row2);
    r.col1 = 1;
    r.col2 = kMaxColumns;
    i_ += static_cast<std::size_t>(m.length(0));
    return node(SRef{r});
  }

  CellAddr cell(const std::string& word) {
    std::smatch m;
    if (!std::regex_match(word, m, kCellPattern)) fail("malformed reference '" + word + "'");
    const std::size_t col = column_index(m[1].str());
    const std::size_t row = std::stoul(m[2].str());
    if (col == 0 || col > kMaxColumns || row == 0) fail("reference out of range '" + word + "'");
    return {row, col};
  }

  SExprPtr reference(std::optional<std::string> sheet) {
    if (auto rows = row_range(sheet)) return rows;
    const CellAddr a = cell(read_word());
    CellAddr b = a;
    if (peek() == ':') {
      ++i_;
      b = cell(read_word());
    }
    RangeRef r;
    r.sheet = std::move(sheet);
    r.row1 = std::min(a.row, b.row);
    r.row2 = std::max(a.row, b.row);
    r.col1 = std::min(a.col, b.col);
    r.col2 = std::max(a.col, b.col);
    return node(SRef{r});
  }

  SExprPtr call(std::string name) {
    for (auto& ch : name) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    SCall c{std::move(name), {}};
    if (eat(")")) return node(std::move(c));
    do {
      c.args.push_back(comparison());
    } while (eat(","));
    if (!eat(")")) fail("expected ')' or ','");
    return node(std::move(c));
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

}  // namespace

SExprPtr parse_sheet_formula(std::string_view text) { return SParser(text).parse(); }

void collect_names(const SExpr& e, std::vector<std::string>& names,
                   std::vector<std::string>& functions) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, SName>) {
          names.push_back(n.name);
        } else if constexpr (std::is_same_v<T, SUnary>) {
          collect_names(*n.operand, names, functions);
        } else if constexpr (std::is_same_v<T, SBinary>) {
          collect_names(*n.lhs, names, functions);
          collect_names(*n.rhs, names, functions);
        } else if constexpr (std::is_same_v<T, SCall>) {
          functions.push_back(n.function);
          for (const auto& a : n.args) collect_names(*a, names, functions);
        }
      },
      e.node);
}

// ---------------------------------------------------------------------------
// Interpreter

namespace {

struct Ctx {
  std::size_t sheet;
  CellAddr at;
};

// A reference resolved to a sheet index, or an error.
struct Ref {
  std::size_t sheet = 0;
  RangeRef range;
  std::optional<ErrorValue> error;
};

bool range_argument(const std::string& fn, std::size_t arg) {
  if (fn == "INDEX") return arg == 0;
  if (fn == "MATCH") return arg == 1;
  if (fn == "SUMIF") return arg == 0 || arg == 2;
  return fn == "SUM" || fn == "COUNTA";
}

std::optional<double> coerce_number(const CellValue& v) {
  return std::visit(
      [](const auto& x) -> std::optional<double> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) return 0.0;
        else if constexpr (std::is_same_v<T, double>) return x;
        else if constexpr (std::is_same_v<T, bool>) return x ? 1.0 : 0.0;
        else if constexpr (std::is_same_v<T, std::string>) {
          double d = 0;
          auto [ptr, ec] = std::from_chars(x.data(), x.data() + x.size(), d);
          if (ec != std::errc() || ptr != x.data() + x.size() || x.empty()) return std::nullopt;
          return d;
        } else {
          return std::nullopt;
        }
      },
      v);
}

bool same_key(const CellValue& a, const CellValue& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<std::monostate>(a)) return false;
  return a == b;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

int compare_values(const CellValue& a, const CellValue& b) {
  auto rank = [](const CellValue& v) {
    if (std::holds_alternative<std::string>(v)) return 1;
    if (std::holds_alternative<bool>(v)) return 2;
    return 0;
  };
  CellValue x = a, y = b;
  if (std::holds_alternative<std::monostate>(x)) {
    x = std::holds_alternative<std::string>(y) ? CellValue{std::string()}
        : std::holds_alternative<bool>(y)      ? CellValue{false}
                                               : CellValue{0.0};
  }
  if (std::holds_alternative<std::monostate>(y)) {
    y = std::holds_alternative<std::string>(x) ? CellValue{std::string()}
        : std::holds_alternative<bool>(x)      ? CellValue{false}
                                               : CellValue{0.0};
  }
  if (rank(x) != rank(y)) return rank(x) < rank(y) ? -1 : 1;
  if (const auto* s = std::get_if<std::string>(&x)) {
    const std::string l = upper(*s), r = upper(std::get<std::string>(y));
    return l < r ? -1 : (l > r ? 1 : 0);
  }
  if (const auto* bv = std::get_if<bool>(&x)) {
    const bool r = std::get<bool>(y);
    return *bv == r ? 0 : (*bv ? 1 : -1);
  }
  const double l = std::get<double>(x), r = std::get<double>(y);
  return l < r ? -1 : (l > r ? 1 : 0);
}

class Engine {
 public:
  Engine(const Workbook& wb, const std::vector<std::map<CellAddr, CellValue>>& values)
      : wb_(wb), values_(values) {
    for (std::size_t i = 0; i < wb.sheets.size(); ++i) {
      sheet_index_.emplace(to_lower(wb.sheets[i].name()), i);
    }
    for (const auto& n : wb.names) names_.emplace(to_lower(n.name), &n);
  }

  std::optional<std::size_t> sheet_of(std::string_view name) const {
    auto it = sheet_index_.find(to_lower(name));
    if (it == sheet_index_.end()) return std::nullopt;
    return it->second;
  }

  CellValue cell(std::size_t sheet, CellAddr addr) const {
    const auto& computed = values_[sheet];
    if (auto it = computed.find(addr); it != computed.end()) return it->second;
    const Cell* c = wb_.sheets[sheet].at(addr);
    if (!c) return std::monostate{};
    if (const auto* d = std::get_if<double>(&c->content)) return *d;
    if (const auto* s = std::get_if<std::string>(&c->content)) return *s;
    return std::monostate{};  // formula not evaluated (outside the graph)
  }

  std::optional<Ref> reference(const SExpr& e, const Ctx& ctx) const {
    if (const auto* r = std::get_if<SRef>(&e.node)) {
      Ref out{ctx.sheet, r->range, std::nullopt};
      if (r->range.sheet) {
        auto s = sheet_of(*r->range.sheet);
        if (!s) out.error = kBadRef;
        else out.sheet = *s;
      }
      return out;
    }
    if (const auto* n = std::get_if<SName>(&e.node)) {
      auto it = names_.find(to_lower(n->name));
      if (it == names_.end()) return Ref{0, {}, kBadName};
      const NamedRange& nr = *it->second;
      auto s = sheet_of(nr.sheet);
      if (!s) return Ref{0, {}, kBadRef};
      RangeRef rr;
      rr.row1 = rr.row2 = nr.row;
      if (nr.col) {
        rr.col1 = rr.col2 = *nr.col;
      } else {
        rr.col1 = 1;
        rr.col2 = kMaxColumns;
      }
      return Ref{*s, rr, std::nullopt};
    }
    return std::nullopt;
  }

  // The single cell a reference stands for in scalar position.
  std::optional<CellAddr> intersect(const RangeRef& r, const Ctx& ctx) const {
    if (r.single_cell()) return CellAddr{r.row1, r.col1};
    if (r.row1 == r.row2 && ctx.at.col >= r.col1 && ctx.at.col <= r.col2) {
      return CellAddr{r.row1, ctx.at.col};
    }
    if (r.col1 == r.col2 && ctx.at.row >= r.row1 && ctx.at.row <= r.row2) {
      return CellAddr{ctx.at.row, r.col1};
    }
    return std::nullopt;
  }

  template <typename Fn>
  void for_each_cell(const Ref& ref, Fn&& fn) const {
    const auto& cells = wb_.sheets[ref.sheet].cells();
    const std::size_t last_row = std::min(ref.range.row2, wb_.sheets[ref.sheet].max_row());
    for (std::size_t r = ref.range.row1; r <= last_row; ++r) {
      for (auto it = cells.lower_bound({r, ref.range.col1});
           it != cells.end() && it->first.row == r && it->first.col <= ref.range.col2; ++it) {
        fn(it->first, cell(ref.sheet, it->first));
      }
    }
  }

  CellValue value(const SExpr& e, const Ctx& ctx) const {
    return std::visit([&](const auto& n) { return value_of(n, e, ctx); }, e.node);
  }

 private:
  CellValue value_of(const SNumber& n, const SExpr&, const Ctx&) const { return n.value; }
  CellValue value_of(const SText& n, const SExpr&, const Ctx&) const { return n.value; }
  CellValue value_of(const SBool& n, const SExpr&, const Ctx&) const { return n.value; }

  CellValue scalar_ref(const SExpr& e, const Ctx& ctx) const {
    auto ref = reference(e, ctx);
    if (ref->error) return *ref->error;
    auto at = intersect(ref->range, ctx);
    if (!at) return kBadValue;
    return cell(ref->sheet, *at);
  }
  CellValue value_of(const SRef&, const SExpr& e, const Ctx& ctx) const {
    return scalar_ref(e, ctx);
  }
  CellValue value_of(const SName&, const SExpr& e, const Ctx& ctx) const {
    return scalar_ref(e, ctx);
  }

  CellValue value_of(const SUnary& n, const SExpr&, const Ctx& ctx) const {
    CellValue v = value(*n.operand, ctx);
    if (is_error(v)) return v;
    auto d = coerce_number(v);
    if (!d) return kBadValue;
    return -*d;
  }

  CellValue value_of(const SBinary& n, const SExpr&, const Ctx& ctx) const {
    CellValue l = value(*n.lhs, ctx);
    if (is_error(l)) return l;
    CellValue r = value(*n.rhs, ctx);
    if (is_error(r)) return r;
    const std::string& op = n.op;
    if (op == "&") return to_display(l) + to_display(r);
    if (op.size() == 1 && std::string_view("+-*/^").find(op[0]) != std::string_view::npos) {
      auto a = coerce_number(l);
      auto b = coerce_number(r);
      if (!a || !b) return kBadValue;
      return arith(op[0], *a, *b);
    }
    const int c = compare_values(l, r);
    if (op == "=") return c == 0;
    if (op == "<>") return c != 0;
    if (op == "<") return c < 0;
    if (op == ">") return c > 0;
    if (op == "<=") return c <= 0;
    return c >= 0;
  }

  CellValue value_of(const SCall& n, const SExpr&, const Ctx& ctx) const {
    const auto& f = n.function;
    const auto& a = n.args;
    if (f == "INDEX") return fn_index(a, ctx);
    if (f == "MATCH") return fn_match(a, ctx);
    if (f == "SUMIF") return fn_sumif(a, ctx);
    if (f == "SUM") return fn_sum(a, ctx);
    if (f == "COUNTA") return fn_counta(a, ctx);
    if (f == "ADDRESS") return fn_address(a, ctx);
    if (f == "IF") return fn_if(a, ctx);
    return kBadName;
  }

  std::optional<std::size_t> index_arg(const SExpr& e, const Ctx& ctx, CellValue& err) const {
    CellValue v = value(e, ctx);
    if (is_error(v)) {
      err = v;
      return std::nullopt;
    }
    auto d = coerce_number(v);
    if (!d || *d < 1) {
      err = d ? CellValue{kBadRef} : CellValue{kBadValue};
      return std::nullopt;
    }
    return static_cast<std::size_t>(*d);
  }

  CellValue fn_index(const std::vector<SExprPtr>& a, const Ctx& ctx) const {
    if (a.size() < 2 || a.size() > 3) return kBadValue;
    auto ref = reference(*a[0], ctx);
    if (!ref) return kBadValue;
    if (ref->error) return *ref->error;
    const RangeRef& r = ref->range;
    CellValue err;
    auto n = index_arg(*a[1], ctx, err);
    if (!n) return err;
    std::size_t row = r.row1, col = r.col1;
    if (a.size() == 3) {
      auto m = index_arg(*a[2], ctx, err);
      if (!m) return err;
      row += *n - 1;
      col += *m - 1;
    } else if (r.row1 == r.row2) {
      col += *n - 1;
    } else if (r.col1 == r.col2) {
      row += *n - 1;
    } else {
      return kBadRef;
    }
    if (row > r.row2 || col > r.col2) return kBadRef;
    return cell(ref->sheet, {row, col});
  }

  CellValue fn_match(const std::vector<SExprPtr>& a, const Ctx& ctx) const {
    if (a.size() != 3) return kBadValue;
    CellValue key = value(*a[0], ctx);
    if (is_error(key)) return key;
    CellValue kind = value(*a[2], ctx);
    if (is_error(kind)) return kind;
    if (coerce_number(kind) != 0.0) return kBadValue;  // only exact matching
    auto ref = reference(*a[1], ctx);
    if (!ref) return kBadValue;
    if (ref->error) return *ref->error;
    const RangeRef& r = ref->range;
    if (r.row1 != r.row2 && r.col1 != r.col2) return kNotAvailable;
    std::optional<std::size_t> found;
    for_each_cell(*ref, [&](CellAddr at, const CellValue& v) {
      if (found || !same_key(v, key)) return;
      found = r.row1 == r.row2 ? at.col - r.col1 + 1 : at.row - r.row1 + 1;
    });
    if (!found) return kNotAvailable;
    return static_cast<double>(*found);
  }

  CellValue fn_sumif(const std::vector<SExprPtr>& a, const Ctx& ctx) const {
    if (a.size() < 2 || a.size() > 3) return kBadValue;
    auto crit_ref = reference(*a[0], ctx);
    if (!crit_ref) return kBadValue;
    if (crit_ref->error) return *crit_ref->error;
    CellValue criterion = value(*a[1], ctx);
    if (is_error(criterion)) return criterion;
    auto sum_ref = a.size() == 3 ? reference(*a[2], ctx) : crit_ref;
    if (!sum_ref) return kBadValue;
    if (sum_ref->error) return *sum_ref->error;
    double total = 0;
    std::optional<CellValue> err;
    for_each_cell(*crit_ref, [&](CellAddr at, const CellValue& v) {
      if (err || !same_key(v, criterion)) return;
      const CellAddr s{at.row - crit_ref->range.row1 + sum_ref->range.row1,
                       at.col - crit_ref->range.col1 + sum_ref->range.col1};
      CellValue x = cell(sum_ref->sheet, s);
      if (is_error(x)) err = x;
      else if (const auto* d = std::get_if<double>(&x)) total += *d;
    });
    if (err) return *err;
    return total;
  }

  CellValue fn_sum(const std::vector<SExprPtr>& a, const Ctx& ctx) const {
    double total = 0;
    for (const auto& arg : a) {
      if (auto ref = reference(*arg, ctx)) {
        if (ref->error) return *ref->error;
        std::optional<CellValue> err;
        for_each_cell(*ref, [&](CellAddr, const CellValue& v) {
          if (err) return;
          if (is_error(v)) err = v;
          else if (const auto* d = std::get_if<double>(&v)) total += *d;
        });
        if (err) return *err;
        continue;
      }
      CellValue v = value(*arg, ctx);
      if (is_error(v)) return v;
      auto d = coerce_number(v);
      if (!d) return kBadValue;
      total += *d;
    }
    return total;
  }

  CellValue fn_counta(const std::vector<SExprPtr>& a, const Ctx& ctx) const {
    double count = 0;
    for (const auto& arg : a) {
      if (auto ref = reference(*arg, ctx)) {
        if (ref->error) return *ref->error;
        for_each_cell(*ref, [&](CellAddr, const CellValue& v) {
          if (!std::holds_alternative<std::monostate>(v)) ++count;
        });
        continue;
      }
      if (!std::holds_alternative<std::monostate>(value(*arg, ctx))) ++count;
    }
    return count;
  }

  CellValue fn_address(const std::vector<SExprPtr>& a, const Ctx& ctx) const {
    if (a.size() < 2 || a.size() > 4) return kBadValue;
    double args[4] = {0, 0, 1, 1};
    for (std::size_t i = 0; i < a.size(); ++i) {
      CellValue v = value(*a[i], ctx);
      if (is_error(v)) return v;
      auto d = coerce_number(v);
      if (!d) return kBadValue;
      args[i] = *d;
    }
    const double row = std::floor(args[0]), col = std::floor(args[1]);
    const int mode = static_cast<int>(args[2]);
    if (row < 1 || col < 1 || col > static_cast<double>(kMaxColumns) || mode < 1 || mode > 4) {
      return kBadValue;
    }
    if (args[3] == 0) return kBadValue;  // R1C1 style is not supported
    const std::string c = column_letters(static_cast<std::size_t>(col));
    const std::string r = std::to_string(static_cast<std::size_t>(row));
    const bool abs_col = mode == 1 || mode == 3;
    const bool abs_row = mode == 1 || mode == 2;
    return (abs_col ? "$" : "") + c + (abs_row ? "$" : "") + r;
  }

  CellValue fn_if(const std::vector<SExprPtr>& a, const Ctx& ctx) const {
    if (a.size() < 2 || a.size() > 3) return kBadValue;
    CellValue c = value(*a[0], ctx);
    if (is_error(c)) return c;
    if (std::holds_alternative<std::string>(c)) return kBadValue;
    const bool truth = *coerce_number(c) != 0;
    if (truth) return value(*a[1], ctx);
    if (a.size() == 3) return value(*a[2], ctx);
    return false;
  }

  const Workbook& wb_;
  const std::vector<std::map<CellAddr, CellValue>>& values_;
  std::unordered_map<std::string, std::size_t> sheet_index_;
  std::unordered_map<std::string, const NamedRange*> names_;
};

struct FormulaNode {
  std::size_t sheet;
  CellAddr at;
  SExprPtr ast;  // null when the text does not parse
};

// Formula cells `e` reads when evaluated at ctx.
void dependencies(const Engine& engine, const SExpr& e, const Ctx& ctx, bool as_range,
                  const std::vector<std::map<CellAddr, std::size_t>>& ids,
                  std::vector<std::size_t>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, SRef> || std::is_same_v<T, SName>) {
          auto ref = engine.reference(e, ctx);
          if (!ref || ref->error) return;
          const auto& sheet_ids = ids[ref->sheet];
          if (!as_range) {
            auto at = engine.intersect(ref->range, ctx);
            if (!at) return;
            if (auto it = sheet_ids.find(*at); it != sheet_ids.end()) out.push_back(it->second);
            return;
          }
          const RangeRef& r = ref->range;
          for (auto it = sheet_ids.lower_bound({r.row1, 0});
               it != sheet_ids.end() && it->first.row <= r.row2; ++it) {
            if (it->first.col >= r.col1 && it->first.col <= r.col2) out.push_back(it->second);
          }
        } else if constexpr (std::is_same_v<T, SUnary>) {
          dependencies(engine, *n.operand, ctx, false, ids, out);
        } else if constexpr (std::is_same_v<T, SBinary>) {
          dependencies(engine, *n.lhs, ctx, false, ids, out);
          dependencies(engine, *n.rhs, ctx, false, ids, out);
        } else if constexpr (std::is_same_v<T, SCall>) {
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            dependencies(engine, *n.args[i], ctx, range_argument(n.function, i), ids, out);
          }
        }
      },
      e.node);
}

}  // namespace

CellValue WorkbookValues::at(std::string_view sheet, CellAddr addr) const {
  for (std::size_t i = 0; i < wb_->sheets.size(); ++i) {
    if (to_lower(wb_->sheets[i].name()) != to_lower(sheet)) continue;
    if (auto it = values_[i].find(addr); it != values_[i].end()) return it->second;
    const Cell* c = wb_->sheets[i].at(addr);
    if (!c) return std::monostate{};
    if (const auto* d = std::get_if<double>(&c->content)) return *d;
    if (const auto* s = std::get_if<std::string>(&c->content)) return *s;
    return std::monostate{};
  }
  return kBadRef;
}

CellValue WorkbookValues::name_at(std::string_view name, std::size_t col) const {
  for (const auto& n : wb_->names) {
    if (to_lower(n.name) != to_lower(name)) continue;
    return at(n.sheet, {n.row, n.col ? *n.col : col});
  }
  return kBadName;
}

WorkbookValues interpret_workbook(const Workbook& wb) {
  WorkbookValues out;
  out.wb_ = &wb;
  out.values_.resize(wb.sheets.size());
  Engine engine(wb, out.values_);

  std::unordered_map<std::string, SExprPtr> cache;
  std::vector<FormulaNode> nodes;
  std::vector<std::map<CellAddr, std::size_t>> ids(wb.sheets.size());
  for (std::size_t s = 0; s < wb.sheets.size(); ++s) {
    for (const auto& [addr, c] : wb.sheets[s].cells()) {
      const std::string* text = c.formula();
      if (!text) continue;
      auto it = cache.find(*text);
      if (it == cache.end()) {
        SExprPtr ast;
        try {
          ast = parse_sheet_formula(*text);
        } catch (const FormulaSyntaxError&) {
        }
        it = cache.emplace(*text, std::move(ast)).first;
      }
      ids[s].emplace(addr, nodes.size());
      nodes.push_back({s, addr, it->second});
    }
  }
  out.formula_count_ = nodes.size();

  std::vector<std::vector<std::size_t>> dependents(nodes.size());
  std::vector<std::size_t> indegree(nodes.size(), 0);
  std::vector<std::size_t> deps;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!nodes[i].ast) continue;
    deps.clear();
    dependencies(engine, *nodes[i].ast, {nodes[i].sheet, nodes[i].at}, false, ids, deps);
    std::sort(deps.begin(), deps.end());
    deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
    for (auto d : deps) dependents[d].push_back(i);
    indegree[i] = deps.size();
  }

  std::queue<std::size_t> ready;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<bool> done(nodes.size(), false);
  while (!ready.empty()) {
    const std::size_t i = ready.front();
    ready.pop();
    done[i] = true;
    const FormulaNode& n = nodes[i];
    CellValue v = n.ast ? engine.value(*n.ast, {n.sheet, n.at}) : CellValue{kBadName};
    if (std::holds_alternative<std::monostate>(v)) v = 0.0;  // =A1 of a blank shows 0
    out.values_[n.sheet][n.at] = std::move(v);
    for (auto d : dependents[i]) {
      if (--indegree[d] == 0) ready.push(d);
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (done[i]) continue;
    out.values_[nodes[i].sheet][nodes[i].at] = kCycle;
    out.cyclic_.push_back({wb.sheets[nodes[i].sheet].name(), nodes[i].at});
  }
  return out;
}

CellValue evaluate_formula(const Workbook& wb, const WorkbookValues& values,
                           std::string_view sheet, CellAddr at, std::string_view formula) {
  WorkbookValues scratch = values;
  if (scratch.values_.size() != wb.sheets.size()) scratch.values_.resize(wb.sheets.size());
  scratch.wb_ = &wb;
  Engine engine(wb, scratch.values_);
  auto s = engine.sheet_of(sheet);
  if (!s) return kBadRef;
  SExprPtr ast;
  try {
    ast = parse_sheet_formula(formula);
  } catch (const FormulaSyntaxError&) {
    return kBadName;
  }
  return engine.value(*ast, {*s, at});
}

}  // namespace dimbook
