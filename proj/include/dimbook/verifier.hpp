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

// Direct evaluation of a model, and the comparison of those values with an
// interpreted workbook.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dimbook/formula.hpp"
#include "dimbook/model.hpp"
#include "dimbook/workbook.hpp"

namespace dimbook {

/// Every variable over its full tuple set, indexed [variable][ordinal].
struct ValueStore {
  std::vector<std::vector<CellValue>> values;

  const std::vector<CellValue>& of(const Model& model, std::string_view variable) const;
  /// Numeric value or throws ModelError (unknown variable, error marker).
  double number(const Model& model, std::string_view variable, std::size_t ordinal) const;
};

/// Throws ModelError when the model is cyclic or data is missing.
ValueStore evaluate_model(const Model& model);

/// |a-b| / max(|a|,|b|); 0 when both are 0.
double relative_deviation(double a, double b);

struct Deviation {
  std::string variable;
  std::size_t ordinal = 0;
  std::string tuple;  // rendered key, "" for dimensionless
  SheetCell cell;
  CellValue oracle;
  CellValue workbook;
  double absolute = 0;
  double relative = 0;  // infinity when the kinds differ
  bool interface = false;
  bool ok = false;
};

struct FlagResult {
  std::string label;
  SheetCell cell;
  CellValue value;
  bool ok = false;
};

struct CheckReport {
  double tolerance = 0;
  std::vector<Deviation> entries;  // model cells first, then interface cells
  std::vector<FlagResult> management;
  std::vector<SheetCell> cyclic;
  std::vector<std::string> missing;  // variables without a located row

  std::size_t failures() const;
  const Deviation* worst() const;
  bool passed() const;
};

/// Compares every (variable, tuple) and every interface cell with the
/// oracle, and reads every management flag. Cells are located through the
/// codegen layout, or through the defined names when the workbook was read
/// back from a formula view.
CheckReport cross_check(const Model& model, const Workbook& wb, double tolerance);
CheckReport cross_check(const Model& model, const Workbook& wb, const ValueStore& oracle,
                        const WorkbookValues& values, double tolerance);

std::string report_to_text(const CheckReport& report, std::size_t max_failures = 20);
std::string report_to_json(const CheckReport& report);

/// Tuple columns (member codes) then the value.
std::string values_to_csv(const Model& model, const ValueStore& store,
                          std::string_view variable);

}  // namespace dimbook
