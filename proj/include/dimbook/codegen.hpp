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

// Workbook generation. Each sheet holds the definitions of one dimension
// set; column C + i of every sheet of a set belongs to tuple i. Variables
// are laid out as blocks: reference rows on top, the defining row below.
//
//   non-aggregate            aggregate (SUM over a larger set)
//   ----------------------   ------------------------------------------
//   =INDEX(V,MATCH(FK,PK,0)) Last <src> column   =Last_<src>_column
//   =W                       <src PK>            =<srcPK> ...
//   =C5*C6                   <operand>           =<operand> ...
//                            <res> in <src>      =<FK> ...
//                            <host PK>           =<hostPK> ...
//                            <result>            =SUMIF(8:8,9:9,7:7) ...

#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dimbook/analyzer.hpp"
#include "dimbook/model.hpp"
#include "dimbook/workbook.hpp"

namespace dimbook {

class CodegenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One output on the interface sheet. Unassigned dimensions are placed
/// automatically: with three dimensions the smallest one repeats as blocks,
/// then the earliest remaining dimension goes to columns, the next to rows.
struct ReportItem {
  std::string variable;
  std::optional<std::string> rows;
  std::optional<std::string> columns;
  std::optional<std::string> blocks;
};

struct ReportConfig {
  std::vector<ReportItem> items;
};

/// Lines of the form
///   report "MPR Unit Sales" rows Region columns Month blocks Product
/// with '#' comments. Throws ConfigError.
ReportConfig parse_report_config(std::string_view text);

/// Every Output variable in declaration order.
ReportConfig default_report_config(const Model& model);

struct ResolvedReport {
  std::size_t variable = 0;
  std::optional<std::size_t> rows, columns, blocks;  // dimension indices
};

/// Checks a report item against the model and fills in the placement.
/// Throws ConfigError (unknown variable, more than three dimensions, ...).
ResolvedReport resolve_report(const Model& model, const ReportItem& item);

/// `=Var` for the same set or a dimensionless operand,
/// `=INDEX(Var,MATCH(FK,PK,0))` for a proper subset.
/// Throws CodegenError when the operand set is not a subset of `host` or the
/// key plan lacks the foreign key.
std::string emit_reference_formula(const Model& model, const KeyPlan& keys,
                                   std::string_view operand, DimensionSet host);

/// Formula in spreadsheet syntax with each variable replaced by `cell_of`.
std::string render_spreadsheet_formula(
    const Expr& e, const std::function<std::string(const std::string&)>& cell_of);

struct EmittedRow {
  std::string label;
  std::vector<std::pair<std::size_t, Cell>> cells;  // (column, cell) past A
};

std::vector<EmittedRow> emit_nonaggregate_block(const Model& model,
                                                const KeyPlan& keys,
                                                std::size_t variable,
                                                std::size_t first_row);

std::vector<EmittedRow> emit_aggregate_block(const Model& model, const KeyPlan& keys,
                                             std::size_t variable,
                                             std::size_t first_row);

/// Full compilation of an analysed model. Throws CodegenError/ConfigError.
Workbook generate_workbook(const Model& model, const Analysis& analysis,
                           const ReportConfig& report);

}  // namespace dimbook
