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

// The spreadsheet formula dialect emitted by codegen, and an interpreter
// for whole workbooks.
//
// Supported: numbers, "text", TRUE/FALSE, A1 references with optional '$',
// rectangular ranges A1:B2, whole-row ranges 3:3, sheet-qualified
// references ('A-B'!C5), defined names, the operators = <> < > <= >= & + -
// * / ^ and unary minus, and the functions INDEX, MATCH, SUMIF, SUM,
// COUNTA, ADDRESS and IF.
//
// Precedence, loosest first: comparison, &, + -, * /, unary -, ^. So -2^2
// is -4. '^' is right-associative.

#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dimbook/workbook.hpp"

namespace dimbook {

struct ErrorValue {
  std::string code;  // "#N/A", "#NAME?", "#DIV/0!", "#VALUE!", "#REF!", "#NUM!", "#CYCLE!"
  friend bool operator==(const ErrorValue&, const ErrorValue&) = default;
};

inline const ErrorValue kNotAvailable{"#N/A"};
inline const ErrorValue kBadName{"#NAME?"};
inline const ErrorValue kDivZero{"#DIV/0!"};
inline const ErrorValue kBadValue{"#VALUE!"};
inline const ErrorValue kBadRef{"#REF!"};
inline const ErrorValue kBadNum{"#NUM!"};
inline const ErrorValue kCycle{"#CYCLE!"};

/// Blank, number, text, boolean or error.
using CellValue = std::variant<std::monostate, double, std::string, bool, ErrorValue>;

bool is_error(const CellValue& v);
std::optional<double> as_number(const CellValue& v);
std::string to_display(const CellValue& v);

/// Arithmetic shared by the interpreter and the model oracle, so both
/// engines fail the same way: x/0 and 0^negative give #DIV/0!, other
/// non-finite results give #NUM!.
CellValue arith(char op, double a, double b);

class FormulaSyntaxError : public std::runtime_error {
 public:
  FormulaSyntaxError(std::string message, std::size_t offset)
      : std::runtime_error(std::move(message)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct SExpr;
using SExprPtr = std::shared_ptr<const SExpr>;

/// A rectangle on one sheet. Whole rows span columns 1..kMaxColumns.
struct RangeRef {
  std::optional<std::string> sheet;  // empty: the formula's own sheet
  std::size_t row1 = 1, col1 = 1, row2 = 1, col2 = 1;
  bool single_cell() const { return row1 == row2 && col1 == col2; }
};

inline constexpr std::size_t kMaxColumns = 16384;

struct SNumber { double value; };
struct SText { std::string value; };
struct SBool { bool value; };
struct SRef { RangeRef range; };
struct SName { std::string name; };
struct SUnary { SExprPtr operand; };
struct SBinary {
  std::string op;  // "+", "-", "*", "/", "^", "&", "=", "<>", "<", ">", "<=", ">="
  SExprPtr lhs, rhs;
};
struct SCall {
  std::string function;  // upper case
  std::vector<SExprPtr> args;
};

struct SExpr {
  std::variant<SNumber, SText, SBool, SRef, SName, SUnary, SBinary, SCall> node;
};

/// Parses a formula with or without its leading '='.
SExprPtr parse_sheet_formula(std::string_view text);

/// Defined names and function names a formula mentions, upper-cased for
/// functions and as written for names.
void collect_names(const SExpr& e, std::vector<std::string>& names,
                   std::vector<std::string>& functions);

/// Evaluated workbook. Literal cells read as themselves.
class WorkbookValues {
 public:
  CellValue at(std::string_view sheet, CellAddr addr) const;
  /// Value of a defined name: the cell for single-cell names, the cell in
  /// column `col` for whole-row names.
  CellValue name_at(std::string_view name, std::size_t col) const;

  std::size_t formula_cells() const { return formula_count_; }
  /// Formula cells on a cycle or downstream of one.
  const std::vector<SheetCell>& cyclic() const { return cyclic_; }

 private:
  friend WorkbookValues interpret_workbook(const Workbook& wb);
  friend CellValue evaluate_formula(const Workbook& wb, const WorkbookValues& values,
                                    std::string_view sheet, CellAddr at,
                                    std::string_view formula);
  const Workbook* wb_ = nullptr;
  std::vector<std::map<CellAddr, CellValue>> values_;  // per sheet, formula cells
  std::size_t formula_count_ = 0;
  std::vector<SheetCell> cyclic_;
};

/// Evaluates every formula cell in dependency order. Cells on a cycle get
/// #CYCLE!. Unparseable formulas evaluate to #NAME?. The workbook must
/// outlive the result.
WorkbookValues interpret_workbook(const Workbook& wb);

/// Evaluates one formula as if it sat at (sheet, at), reading other cells
/// from `values`.
CellValue evaluate_formula(const Workbook& wb, const WorkbookValues& values,
                           std::string_view sheet, CellAddr at, std::string_view formula);

}  // namespace dimbook
