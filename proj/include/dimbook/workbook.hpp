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

// In-memory workbook: sparse sheets of literal or formula cells plus
// workbook-scoped defined names. Rows and columns are 1-based.

#pragma once

#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dimbook/model.hpp"

namespace dimbook {

struct CellAddr {
  std::size_t row = 1;
  std::size_t col = 1;
  friend auto operator<=>(const CellAddr&, const CellAddr&) = default;
};

/// "C5", or "$C$5" when absolute.
std::string a1(CellAddr addr, bool absolute = false);

struct FormulaText {
  std::string text;  // always starts with '='
  friend bool operator==(const FormulaText&, const FormulaText&) = default;
};

struct Cell {
  std::variant<double, std::string, FormulaText> content;
  std::optional<NumberFormat> format;

  bool is_formula() const { return std::holds_alternative<FormulaText>(content); }
  const std::string* formula() const {
    const auto* f = std::get_if<FormulaText>(&content);
    return f ? &f->text : nullptr;
  }
};

Cell number_cell(double v, std::optional<NumberFormat> fmt = std::nullopt);
Cell text_cell(std::string s);
Cell formula_cell(std::string text, std::optional<NumberFormat> fmt = std::nullopt);

class Sheet {
 public:
  explicit Sheet(std::string name = {}) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  void set(CellAddr at, Cell cell);
  const Cell* at(CellAddr addr) const;
  Cell* at(CellAddr addr);
  const std::map<CellAddr, Cell>& cells() const { return cells_; }
  std::size_t max_row() const;
  /// Highest used column in `row`, 0 when the row is empty.
  std::size_t row_width(std::size_t row) const;

 private:
  std::string name_;
  std::map<CellAddr, Cell> cells_;
};

/// A workbook-global name for a whole row (`col` empty) or a single cell.
struct NamedRange {
  std::string name;
  std::string sheet;
  std::size_t row = 1;
  std::optional<std::size_t> col;

  /// 'Sheet'!$5:$5 or 'Sheet'!$C$5
  std::string reference() const;
};

/// Where the values of a variable live: tuple i sits at (row, first_col + i).
struct VariableLayout {
  std::string sheet;
  std::size_t row = 0;
  std::size_t first_col = 0;
  std::size_t count = 0;
};

/// A block of rows generated for one variable, for readers of the output.
struct Provenance {
  std::string sheet;
  std::size_t first_row = 0;
  std::size_t last_row = 0;
  std::string variable;
  std::string note;
};

struct SheetCell {
  std::string sheet;
  CellAddr addr;
};

struct InterfaceCell {
  std::string variable;
  std::size_t ordinal = 0;  // tuple ordinal in the variable's set
  SheetCell cell;
};

struct ManagementCheck {
  std::string label;
  SheetCell flag;  // evaluates to "OK" when consistent
};

class Workbook {
 public:
  std::vector<Sheet> sheets;
  std::vector<NamedRange> names;
  std::vector<Provenance> provenance;
  std::map<std::string, VariableLayout> layout;  // by variable name
  std::vector<InterfaceCell> interface_cells;
  std::vector<ManagementCheck> management_checks;

  Sheet* sheet(std::string_view name);
  const Sheet* sheet(std::string_view name) const;
  const NamedRange* name(std::string_view n) const;
};

/// Quotes a sheet name for use in a reference: Data -> Data, A-B -> 'A-B'.
std::string quote_sheet_name(std::string_view name);

/// Shortest text that reads back as the same double.
std::string format_number(double v);

class FormulaViewError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic text dump of every sheet's raw cell contents followed by
/// the name table:
///
///   [sheet Sector-Product]
///   1<TAB>Sector-Product<TAB>=Last_SP_column
///   ...
///   # Price: rows 9-11
///   [names]
///   Price<TAB>'Sector-Product'!$11:$11
///
/// Text that would read back as a number or formula is prefixed with "'".
std::string render_formula_view(const Workbook& wb);

/// Rebuilds sheets and names from a formula view. Layout and provenance
/// are not part of the view. Throws FormulaViewError.
Workbook parse_formula_view(std::string_view text);

}  // namespace dimbook
