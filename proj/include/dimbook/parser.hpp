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

// Front end for the `.dsm` model language and the CSV data tables.
//
//   # comment
//   dimension Sector initial S { G "Government" M "Military" }
//   table "sector.csv"
//   input  "Base Price" format currency = 140
//   data   "Rebate Percentage" over Sector format percent
//   calc   "Sector Price Factor" over Sector = 1 - [Rebate Percentage]
//   output "Total Profit" = SUM([Monthly Profit])
//
// Newlines carry no meaning; every statement starts with a keyword.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dimbook/model.hpp"

namespace dimbook {

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  SourceSpan span;
};

std::string format_diagnostic(const Diagnostic& d);
bool has_errors(const std::vector<Diagnostic>& diags);

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::string message, SourceSpan span)
      : std::runtime_error(message), span_(std::move(span)) {}
  const SourceSpan& span() const { return span_; }

 private:
  SourceSpan span_;
};

struct ParseResult {
  Model model;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return !has_errors(diagnostics); }
};

ParseResult parse_model(std::string_view source,
                        std::string_view file_name = "<input>");

/// Parses one formula in the model language. Throws SyntaxError.
ExprPtr parse_formula(std::string_view text);

/// Canonical model-language rendering; parse_formula(render_formula(e)) == e.
std::string render_formula(const Expr& e);

struct CsvDocument {
  std::string name;
  std::string text;
};

struct CsvRow {
  int line = 1;
  std::vector<std::string> fields;
};

/// RFC-4180 reader. Throws SyntaxError on an unterminated quote.
std::vector<CsvRow> read_csv(std::string_view text, std::string_view name);

/// Parses "12.5", "9%", " 3 " into a number. Empty optional when invalid.
std::optional<double> parse_data_number(std::string_view text);

/// Binds data tables to a parsed model. Inline scalar values of
/// dimensionless Input/Data variables become the dimensionless table.
ParseResult load_data(Model model, const std::vector<CsvDocument>& tables);

}  // namespace dimbook
