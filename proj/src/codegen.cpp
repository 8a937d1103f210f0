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

#include "dimbook/codegen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "dimbook/keygen.hpp"
#include "dimbook/naming.hpp"

namespace dimbook {

// ---------------------------------------------------------------------------
// Report configuration

namespace {

std::vector<std::pair<std::string, bool>> config_words(std::string_view line,
                                                       int line_no) {
  std::vector<std::pair<std::string, bool>> out;  // (word, quoted)
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '"') {
      auto end = line.find('"', i + 1);
      if (end == std::string_view::npos) {
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated string");
      }
      out.emplace_back(std::string(line.substr(i + 1, end - i - 1)), true);
      i = end + 1;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) &&
           line[j] != '#') {
      ++j;
    }
    out.emplace_back(std::string(line.substr(i, j - i)), false);
    i = j;
  }
  return out;
}

}  // namespace

ReportConfig parse_report_config(std::string_view text) {
  ReportConfig cfg;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const auto words = config_words(text.substr(start, end - start), line_no);
    start = end + 1;
    if (words.empty()) continue;
    auto fail = [&](const std::string& why) {
      return ConfigError("line " + std::to_string(line_no) + ": " + why);
    };
    if (words[0].first != "report" || words[0].second) {
      throw fail("expected 'report'");
    }
    if (words.size() < 2 || !words[1].second) {
      throw fail("expected a quoted variable name after 'report'");
    }
    ReportItem item{words[1].first, {}, {}, {}};
    for (std::size_t i = 2; i < words.size(); i += 2) {
      if (i + 1 >= words.size()) throw fail("'" + words[i].first + "' needs a dimension");
      const std::string& key = words[i].first;
      std::optional<std::string>* slot = nullptr;
      if (key == "rows") slot = &item.rows;
      else if (key == "columns") slot = &item.columns;
      else if (key == "blocks") slot = &item.blocks;
      else throw fail("unknown placement '" + key + "'");
      if (*slot) throw fail("'" + key + "' given twice");
      *slot = words[i + 1].first;
    }
    cfg.items.push_back(std::move(item));
  }
  return cfg;
}

ReportConfig default_report_config(const Model& model) {
  ReportConfig cfg;
  for (const auto& v : model.variables) {
    if (v.kind == VariableKind::Output) cfg.items.push_back({v.name, {}, {}, {}});
  }
  return cfg;
}

ResolvedReport resolve_report(const Model& model, const ReportItem& item) {
  auto idx = model.variable_index(item.variable);
  if (!idx) throw ConfigError("report names unknown variable '" + item.variable + "'");
  const Variable& v = model.variables[*idx];
  if (v.dimset.size() > 3) {
    throw ConfigError("'" + v.name + "' has " + std::to_string(v.dimset.size()) +
                      " dimensions; a report can lay out at most 3");
  }
  ResolvedReport r;
  r.variable = *idx;
  DimensionSet used;
  auto take = [&](const std::optional<std::string>& name, const char* what)
      -> std::optional<std::size_t> {
    if (!name) return std::nullopt;
    auto d = model.dimension_index(*name);
    if (!d) throw ConfigError("unknown dimension '" + *name + "'");
    if (!v.dimset.contains(*d)) {
      throw ConfigError("'" + v.name + "' does not vary by " + *name);
    }
    if (used.contains(*d)) {
      throw ConfigError(std::string("dimension ") + *name + " placed twice (" + what + ")");
    }
    used = used.with(*d);
    return d;
  };
  r.rows = take(item.rows, "rows");
  r.columns = take(item.columns, "columns");
  r.blocks = take(item.blocks, "blocks");

  std::vector<std::size_t> free;
  for (auto d : v.dimset.dims()) {
    if (!used.contains(d)) free.push_back(d);
  }
  if (!r.blocks && v.dimset.size() == 3 && !free.empty()) {
    auto best = std::min_element(free.begin(), free.end(), [&](auto a, auto b) {
      return model.dimensions[a].members.size() < model.dimensions[b].members.size();
    });
    r.blocks = *best;
    free.erase(best);
  }
  if (!r.columns && !free.empty()) {
    r.columns = free.front();
    free.erase(free.begin());
  }
  if (!r.rows && !free.empty()) {
    r.rows = free.front();
    free.erase(free.begin());
  }
  if (!free.empty()) {
    r.blocks = free.front();  // only reachable with explicit rows+columns on 3 dims
  }
  return r;
}

// ---------------------------------------------------------------------------
// Formula emission

std::string emit_reference_formula(const Model& model, const KeyPlan& keys,
                                   std::string_view operand, DimensionSet host) {
  const Variable& v = model.variable(operand);
  const std::string name = mangle_variable_name(v.name);
  if (v.dimset == host || v.dimset.empty()) return "=" + name;
  if (!dimset_is_subset(v.dimset, host)) {
    throw CodegenError("'" + v.name + "' over '" + model.dimset_name(v.dimset) +
                       "' cannot be referenced from '" + model.dimset_name(host) + "'");
  }
  const ForeignKey* fk = keys.foreign(v.dimset, host);
  const PrimaryKey* pk = keys.primary(v.dimset);
  if (!fk || !pk) {
    throw CodegenError("key plan lacks " + foreign_key_name(model, v.dimset, host));
  }
  return "=INDEX(" + name + ",MATCH(" + fk->name + "," + pk->name + ",0))";
}

namespace {

// Spreadsheet operator precedence differs from ordinary math around unary
// minus, so every non-atomic negation operand and every '^' operand that is
// not an atom is parenthesised.
int sheet_precedence(const Expr& e) {
  if (const auto* b = std::get_if<Binary>(&e.node)) {
    switch (b->op) {
      case BinaryOp::Add:
      case BinaryOp::Sub: return 1;
      case BinaryOp::Mul:
      case BinaryOp::Div: return 2;
      case BinaryOp::Pow: return 3;
    }
  }
  if (std::holds_alternative<Negate>(e.node)) return 4;
  if (const auto* l = std::get_if<Literal>(&e.node); l && std::signbit(l->value)) return 4;
  return 5;
}

void render_sheet(const Expr& e,
                  const std::function<std::string(const std::string&)>& cell_of,
                  std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Literal>) {
          out += format_number(n.value);
        } else if constexpr (std::is_same_v<T, VarRef>) {
          out += cell_of(n.name);
        } else if constexpr (std::is_same_v<T, Sum>) {
          out += "SUM(" + cell_of(n.name) + ")";
        } else if constexpr (std::is_same_v<T, Negate>) {
          out += '-';
          const bool wrap = sheet_precedence(*n.operand) < 5;
          if (wrap) out += '(';
          render_sheet(*n.operand, cell_of, out);
          if (wrap) out += ')';
        } else {
          const int p = sheet_precedence(e);
          const bool pow = n.op == BinaryOp::Pow;
          const bool wrap_l = pow ? sheet_precedence(*n.lhs) < 5
                                  : sheet_precedence(*n.lhs) < p;
          const bool wrap_r = pow ? sheet_precedence(*n.rhs) < 5
                                  : sheet_precedence(*n.rhs) <= p;
          if (wrap_l) out += '(';
          render_sheet(*n.lhs, cell_of, out);
          if (wrap_l) out += ')';
          out += binary_op_symbol(n.op);
          if (wrap_r) out += '(';
          render_sheet(*n.rhs, cell_of, out);
          if (wrap_r) out += ')';
        }
      },
      e.node);
}

std::optional<NumberFormat> display_format(const Variable& v) {
  return v.number_format.value_or(NumberFormat::Decimal2);
}

}  // namespace

std::string render_spreadsheet_formula(
    const Expr& e, const std::function<std::string(const std::string&)>& cell_of) {
  std::string out = "=";
  render_sheet(e, cell_of, out);
  return out;
}

std::vector<EmittedRow> emit_nonaggregate_block(const Model& model,
                                                const KeyPlan& keys,
                                                std::size_t variable,
                                                std::size_t first_row) {
  const Variable& v = model.variables.at(variable);
  if (!v.formula || is_aggregate(*v.formula)) {
    throw CodegenError("'" + v.name + "' is not a non-aggregate formula");
  }
  const std::size_t width = column_count(model, v.dimset);
  const auto operands = referenced_variables(*v.formula);
  std::vector<EmittedRow> rows;
  std::map<std::string, std::size_t> row_of;
  for (const auto& op : operands) {
    const Variable& ov = model.variable(op);
    const std::string f = emit_reference_formula(model, keys, op, v.dimset);
    row_of[op] = first_row + rows.size();
    EmittedRow row{ov.name, {}};
    for (std::size_t c = 0; c < width; ++c) {
      row.cells.emplace_back(kFirstDataColumn + c, formula_cell(f, display_format(ov)));
    }
    rows.push_back(std::move(row));
  }
  EmittedRow result{v.name, {}};
  for (std::size_t c = 0; c < width; ++c) {
    const std::size_t col = kFirstDataColumn + c;
    const std::string text = render_spreadsheet_formula(
        *v.formula, [&](const std::string& name) { return a1({row_of.at(name), col}); });
    result.cells.emplace_back(col, formula_cell(text, display_format(v)));
  }
  rows.push_back(std::move(result));
  return rows;
}

std::vector<EmittedRow> emit_aggregate_block(const Model& model, const KeyPlan& keys,
                                             std::size_t variable,
                                             std::size_t first_row) {
  const Variable& v = model.variables.at(variable);
  const auto* sum = v.formula ? std::get_if<Sum>(&v.formula->node) : nullptr;
  if (!sum) throw CodegenError("'" + v.name + "' is not an aggregate formula");
  const Variable& src = model.variable(sum->name);
  const PrimaryKey* src_pk = keys.primary(src.dimset);
  if (!src_pk) throw CodegenError("key plan lacks the primary key of " + src.name);
  const std::size_t src_width = column_count(model, src.dimset);
  const std::size_t host_width = column_count(model, v.dimset);

  auto repeated = [](std::size_t width, const std::string& f,
                     std::optional<NumberFormat> fmt = std::nullopt) {
    std::vector<std::pair<std::size_t, Cell>> cells;
    for (std::size_t c = 0; c < width; ++c) {
      cells.emplace_back(kFirstDataColumn + c, formula_cell(f, fmt));
    }
    return cells;
  };

  std::vector<EmittedRow> rows;
  rows.push_back({"Last " + set_token(model, src.dimset) + " column",
                  {{2, formula_cell("=" + last_column_name(model, src.dimset))}}});
  rows.push_back({src_pk->name, repeated(src_width, "=" + src_pk->name)});
  const std::string operand = mangle_variable_name(src.name);
  rows.push_back({src.name, repeated(src_width, "=" + operand, display_format(src))});
  const std::string value_row = std::to_string(first_row + 2);

  if (v.dimset.empty()) {
    rows.push_back({v.name,
                    {{kFirstDataColumn,
                      formula_cell("=SUM(" + value_row + ":" + value_row + ")",
                                   display_format(v))}}});
    return rows;
  }
  const ForeignKey* fk = keys.foreign(v.dimset, src.dimset);
  const PrimaryKey* host_pk = keys.primary(v.dimset);
  if (!fk || !host_pk) {
    throw CodegenError("key plan lacks " + foreign_key_name(model, v.dimset, src.dimset));
  }
  rows.push_back({foreign_key_label(model, v.dimset, src.dimset),
                  repeated(src_width, "=" + fk->name)});
  rows.push_back({host_pk->name, repeated(host_width, "=" + host_pk->name)});
  const std::string fk_row = std::to_string(first_row + 3);
  const std::string pk_row = std::to_string(first_row + 4);
  rows.push_back({v.name, repeated(host_width,
                                   "=SUMIF(" + fk_row + ":" + fk_row + "," + pk_row +
                                       ":" + pk_row + "," + value_row + ":" +
                                       value_row + ")",
                                   display_format(v))});
  return rows;
}

// ---------------------------------------------------------------------------
// Whole workbook

namespace {

class Generator {
 public:
  Generator(const Model& model, const Analysis& analysis, const ReportConfig& report)
      : model_(model), plan_(analysis.plan), keys_(analysis.keys), report_(report) {}

  Workbook run() {
    for (const auto& s : plan_.data_sheets) emit_data_sheet(s);
    for (const auto& s : plan_.model_sheets) emit_model_sheet(s);
    emit_management_sheet();
    emit_interface_sheet();
    return std::move(wb_);
  }

 private:
  Sheet& new_sheet(const std::string& name) {
    wb_.sheets.emplace_back(name);
    return wb_.sheets.back();
  }

  void define(std::string name, const std::string& sheet, std::size_t row,
              std::optional<std::size_t> col = std::nullopt) {
    if (!is_valid_defined_name(name)) {
      throw CodegenError("'" + name + "' is not a valid workbook name");
    }
    if (!defined_.insert(to_lower(name)).second) {
      throw CodegenError("workbook name '" + name + "' defined twice");
    }
    wb_.names.push_back({std::move(name), sheet, row, col});
  }

  void place(Sheet& sheet, std::size_t first_row, const std::vector<EmittedRow>& rows) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sheet.set({first_row + i, 1}, text_cell(rows[i].label));
      for (const auto& [col, cell] : rows[i].cells) sheet.set({first_row + i, col}, cell);
    }
  }

  void header(Sheet& sheet, DimensionSet set) {
    sheet.set({1, 1}, text_cell(sheet.name()));
    sheet.set({1, 2}, formula_cell("=" + last_column_name(model_, set)));
  }

  // PK row (row 3) and, on the owning sheet, the FK rows hosted by the set.
  // Returns the next free row.
  std::size_t key_rows(Sheet& sheet, DimensionSet set, bool owner) {
    if (set.empty()) return 3;
    const PrimaryKey* pk = keys_.primary(set);
    if (!pk) throw CodegenError("key plan lacks the primary key of " + sheet.name());
    std::size_t row = 3;
    sheet.set({row, 1}, text_cell(pk->name));
    if (owner) {
      const KeyRow keys = primary_key_row(model_, set);
      for (std::size_t i = 0; i < keys.values.size(); ++i) {
        sheet.set({row, kFirstDataColumn + i}, text_cell(keys.values[i]));
      }
      define(pk->name, sheet.name(), row);
      for (const ForeignKey* fk : keys_.hosted_by(set)) {
        ++row;
        sheet.set({row, 1}, text_cell(foreign_key_label(model_, fk->referenced, set)));
        const KeyRow fk_row = foreign_key_row(model_, set, fk->referenced);
        for (std::size_t i = 0; i < fk_row.values.size(); ++i) {
          sheet.set({row, kFirstDataColumn + i}, text_cell(fk_row.values[i]));
        }
        define(fk->name, sheet.name(), row);
      }
    } else {
      for (std::size_t i = 0; i < column_count(model_, set); ++i) {
        sheet.set({row, kFirstDataColumn + i}, formula_cell("=" + pk->name));
      }
    }
    return row + 2;
  }

  void define_variable(const Variable& v, const std::string& sheet, std::size_t row) {
    const std::string name = mangle_variable_name(v.name);
    if (v.dimset.empty()) {
      define(name, sheet, row, kFirstDataColumn);
    } else {
      define(name, sheet, row);
    }
    wb_.layout[v.name] = {sheet, row, kFirstDataColumn, column_count(model_, v.dimset)};
  }

  void emit_data_sheet(const SheetPlan& plan) {
    Sheet& sheet = new_sheet(plan.name);
    header(sheet, plan.dimset);
    std::size_t row = key_rows(sheet, plan.dimset, true);
    const DataTable* table = model_.table(plan.dimset);
    for (auto vi : plan.variables) {
      const Variable& v = model_.variables[vi];
      const DataColumn* col = table ? table->column(v.name) : nullptr;
      if (!col) throw CodegenError("no data bound for '" + v.name + "'");
      sheet.set({row, 1}, text_cell(v.name));
      for (std::size_t i = 0; i < col->values.size(); ++i) {
        sheet.set({row, kFirstDataColumn + i}, number_cell(col->values[i], display_format(v)));
      }
      define_variable(v, sheet.name(), row);
      wb_.provenance.push_back({sheet.name(), row, row, v.name, to_string(v.kind)});
      ++row;
    }
  }

  void emit_model_sheet(const SheetPlan& plan) {
    Sheet& sheet = new_sheet(plan.name);
    header(sheet, plan.dimset);
    const bool owner = plan_.key_owner(plan.dimset) == &plan;
    std::size_t row = key_rows(sheet, plan.dimset, owner);
    for (auto vi : plan.variables) {
      const Variable& v = model_.variables[vi];
      const bool aggregate = is_aggregate(*v.formula);
      const auto rows = aggregate ? emit_aggregate_block(model_, keys_, vi, row)
                                  : emit_nonaggregate_block(model_, keys_, vi, row);
      place(sheet, row, rows);
      const std::size_t result_row = row + rows.size() - 1;
      define_variable(v, sheet.name(), result_row);
      std::string note = aggregate ? "aggregate" : "";
      if (aggregate && v.dimset.empty()) note = "aggregate, plain SUM: dimensionless result";
      wb_.provenance.push_back({sheet.name(), row, result_row, v.name, note});
      row = result_row + 2;
    }
  }

  std::vector<DimensionSet> managed_sets() const {
    std::vector<DimensionSet> sets;
    for (const SheetPlan* s : plan_.all()) {
      if (std::find(sets.begin(), sets.end(), s->dimset) == sets.end()) {
        sets.push_back(s->dimset);
      }
    }
    for (const auto& pk : keys_.primary_keys) {
      if (std::find(sets.begin(), sets.end(), pk.dimset) == sets.end()) {
        sets.push_back(pk.dimset);
      }
    }
    return sets;
  }

  void emit_management_sheet() {
    Sheet& sheet = new_sheet(plan_.management_sheet);
    sheet.set({1, 1}, text_cell(sheet.name()));
    const char* headers[] = {"Dimension set", "Expected columns", "Actual columns",
                             "Check", "Last column"};
    for (std::size_t c = 0; c < 5; ++c) sheet.set({3, c + 1}, text_cell(headers[c]));

    std::size_t row = 4;
    std::map<DimensionSet, std::size_t> expected_row;
    for (DimensionSet set : managed_sets()) {
      const std::string r = std::to_string(row);
      sheet.set({row, 1}, text_cell(set.empty() ? "(dimensionless)" : model_.dimset_name(set)));
      std::string expected = "=";
      std::string actual = "=1";
      if (set.empty()) {
        expected += "1";
      } else {
        const auto dims = set.dims();
        for (std::size_t i = 0; i < dims.size(); ++i) {
          const std::string term =
              "COUNTA(" + primary_key_name(model_, DimensionSet::of({dims[i]})) + ")-1";
          if (dims.size() == 1) {
            expected += term;
          } else {
            expected += (i ? "*(" : "(") + term + ")";
          }
        }
        actual = "=COUNTA(" + keys_.primary(set)->name + ")-1";
      }
      sheet.set({row, 2}, formula_cell(expected));
      sheet.set({row, 3}, formula_cell(actual));
      sheet.set({row, 4}, formula_cell("=IF(C" + r + "=B" + r + ",\"OK\",\"ERROR\")"));
      sheet.set({row, 5}, formula_cell("=ADDRESS(1,B" + r + "+" +
                                       std::to_string(kFirstDataColumn - 1) + ",4)"));
      define(last_column_name(model_, set), sheet.name(), row, 5);
      wb_.management_checks.push_back(
          {"columns of " + (set.empty() ? std::string("(dimensionless)")
                                        : model_.dimset_name(set)),
           {sheet.name(), {row, 4}}});
      expected_row[set] = row;
      ++row;
    }

    ++row;
    sheet.set({row, 1}, text_cell("Worksheet"));
    sheet.set({row, 2}, text_cell("Expected columns"));
    sheet.set({row, 3}, text_cell("Actual columns"));
    sheet.set({row, 4}, text_cell("Check"));
    ++row;
    for (const SheetPlan* s : plan_.all()) {
      if (s->dimset.empty()) continue;
      const std::string r = std::to_string(row);
      sheet.set({row, 1}, text_cell(s->name));
      sheet.set({row, 2}, formula_cell("=B" + std::to_string(expected_row.at(s->dimset))));
      sheet.set({row, 3}, formula_cell("=COUNTA(" + quote_sheet_name(s->name) + "!$3:$3)-1"));
      sheet.set({row, 4}, formula_cell("=IF(C" + r + "=B" + r + ",\"OK\",\"ERROR\")"));
      wb_.management_checks.push_back({"columns of sheet " + s->name, {sheet.name(), {row, 4}}});
      ++row;
    }

    // Single-dimension keys that no worksheet owns live here.
    bool first = true;
    for (const auto& pk : keys_.primary_keys) {
      if (plan_.key_owner(pk.dimset)) continue;
      if (first) {
        ++row;
        first = false;
      }
      sheet.set({row, 1}, text_cell(pk.name));
      const KeyRow keys = primary_key_row(model_, pk.dimset);
      for (std::size_t i = 0; i < keys.values.size(); ++i) {
        sheet.set({row, kFirstDataColumn + i}, text_cell(keys.values[i]));
      }
      define(pk.name, sheet.name(), row);
      ++row;
    }
  }

  void emit_interface_sheet() {
    Sheet& sheet = new_sheet(plan_.interface_sheet);
    sheet.set({1, 1}, text_cell(sheet.name()));
    std::size_t row = 3;
    for (const auto& item : report_.items) {
      const ResolvedReport rep = resolve_report(model_, item);
      const Variable& v = model_.variables[rep.variable];
      const std::string name = mangle_variable_name(v.name);
      const std::size_t first = row;
      sheet.set({row++, 1}, text_cell(v.name));
      if (v.dimset.empty()) {
        sheet.set({row, 1}, text_cell("Value"));
        sheet.set({row, kFirstDataColumn}, formula_cell("=" + name, display_format(v)));
        wb_.interface_cells.push_back({v.name, 0, {sheet.name(), {row, kFirstDataColumn}}});
        wb_.provenance.push_back({sheet.name(), first, row, v.name, "report"});
        row += 2;
        continue;
      }
      const std::string pk = keys_.primary(v.dimset)->name;
      const Grid keys_grid = layout_grid(rep, row + 1);
      sheet.set({row++, 1}, text_cell("Keys"));
      fill_key_grid(sheet, rep, keys_grid);
      row = keys_grid.end_row + 1;
      sheet.set({row++, 1}, text_cell("Values"));
      const Grid values_grid = layout_grid(rep, row);
      fill_value_grid(sheet, rep, values_grid, keys_grid, name, pk, display_format(v));
      wb_.provenance.push_back({sheet.name(), first, values_grid.end_row - 1, v.name, "report"});
      row = values_grid.end_row + 1;
    }
  }

  // Row/column coordinates of one presentation structure.
  struct Grid {
    std::vector<std::size_t> block_rows;            // per block member
    std::vector<std::size_t> header_rows;           // per block, 0 if no columns dim
    std::vector<std::vector<std::size_t>> line_rows;  // [block][row member]
    std::size_t end_row = 0;                        // first row after the grid
  };

  std::size_t members(std::optional<std::size_t> dim) const {
    return dim ? model_.dimensions[*dim].members.size() : 1;
  }

  Grid layout_grid(const ResolvedReport& rep, std::size_t row) const {
    Grid g;
    for (std::size_t b = 0; b < members(rep.blocks); ++b) {
      g.block_rows.push_back(rep.blocks ? row++ : 0);
      g.header_rows.push_back(rep.columns ? row++ : 0);
      std::vector<std::size_t> lines;
      for (std::size_t r = 0; r < members(rep.rows); ++r) lines.push_back(row++);
      g.line_rows.push_back(std::move(lines));
      if (rep.blocks) ++row;  // spacer between blocks
    }
    g.end_row = row;
    return g;
  }

  template <typename Fn>
  void for_each_value_cell(const ResolvedReport& rep, const Grid& g, Fn&& fn) const {
    for (std::size_t b = 0; b < g.line_rows.size(); ++b) {
      for (std::size_t r = 0; r < g.line_rows[b].size(); ++r) {
        for (std::size_t c = 0; c < members(rep.columns); ++c) {
          fn(b, r, c, CellAddr{g.line_rows[b][r], kFirstDataColumn + c});
        }
      }
    }
  }

  void fill_key_grid(Sheet& sheet, const ResolvedReport& rep, const Grid& g) {
    auto code = [&](std::size_t dim, std::size_t m) {
      return model_.dimensions[dim].members[m].code;
    };
    for (std::size_t b = 0; b < g.line_rows.size(); ++b) {
      if (rep.blocks) sheet.set({g.block_rows[b], 1}, text_cell(code(*rep.blocks, b)));
      if (rep.columns) {
        for (std::size_t c = 0; c < members(rep.columns); ++c) {
          sheet.set({g.header_rows[b], kFirstDataColumn + c}, text_cell(code(*rep.columns, c)));
        }
      }
      if (rep.rows) {
        for (std::size_t r = 0; r < g.line_rows[b].size(); ++r) {
          sheet.set({g.line_rows[b][r], 1}, text_cell(code(*rep.rows, r)));
        }
      }
    }
    const auto dims = model_.variables[rep.variable].dimset.dims();
    for_each_value_cell(rep, g, [&](std::size_t b, std::size_t, std::size_t,
                                    CellAddr at) {
      std::string f = "=";
      for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) f += "&\"" + std::string(1, kKeySeparator) + "\"&";
        if (rep.columns && dims[i] == *rep.columns) {
          f += column_letters(at.col) + "$" + std::to_string(g.header_rows[b]);
        } else if (rep.rows && dims[i] == *rep.rows) {
          f += "$A" + std::to_string(at.row);
        } else {
          f += "$A$" + std::to_string(g.block_rows[b]);
        }
      }
      sheet.set(at, formula_cell(f));
    });
  }

  void fill_value_grid(Sheet& sheet, const ResolvedReport& rep, const Grid& g,
                       const Grid& keys, const std::string& name, const std::string& pk,
                       std::optional<NumberFormat> fmt) {
    auto label = [&](std::size_t dim, std::size_t m) {
      const Member& mem = model_.dimensions[dim].members[m];
      return mem.label.empty() ? mem.code : mem.label;
    };
    for (std::size_t b = 0; b < g.line_rows.size(); ++b) {
      if (rep.blocks) sheet.set({g.block_rows[b], 1}, text_cell(label(*rep.blocks, b)));
      if (rep.columns) {
        for (std::size_t c = 0; c < members(rep.columns); ++c) {
          sheet.set({g.header_rows[b], kFirstDataColumn + c}, text_cell(label(*rep.columns, c)));
        }
      }
      if (rep.rows) {
        for (std::size_t r = 0; r < g.line_rows[b].size(); ++r) {
          sheet.set({g.line_rows[b][r], 1}, text_cell(label(*rep.rows, r)));
        }
      }
    }
    const Variable& v = model_.variables[rep.variable];
    const auto dims = v.dimset.dims();
    const auto radices = model_.radices(v.dimset);
    for_each_value_cell(rep, g, [&](std::size_t b, std::size_t r, std::size_t c,
                                    CellAddr at) {
      const CellAddr key_at{keys.line_rows[b][r], at.col};
      sheet.set(at, formula_cell("=INDEX(" + name + ",MATCH(" + a1(key_at) + "," + pk + ",0))",
                                 fmt));
      Tuple t(dims.size());
      for (std::size_t i = 0; i < dims.size(); ++i) {
        if (rep.columns && dims[i] == *rep.columns) t[i] = c;
        else if (rep.rows && dims[i] == *rep.rows) t[i] = r;
        else t[i] = b;
      }
      wb_.interface_cells.push_back({v.name, tuple_ordinal(radices, t), {sheet.name(), at}});
    });
  }

  const Model& model_;
  const WorksheetPlan& plan_;
  const KeyPlan& keys_;
  const ReportConfig& report_;
  Workbook wb_;
  std::set<std::string> defined_;
};

}  // namespace

Workbook generate_workbook(const Model& model, const Analysis& analysis,
                           const ReportConfig& report) {
  if (!analysis.ok()) throw CodegenError("cannot generate a workbook for an invalid model");
  // Resolve the whole report up front so a bad config fails before any work.
  for (const auto& item : report.items) resolve_report(model, item);
  return Generator(model, analysis, report).run();
}

}  // namespace dimbook
