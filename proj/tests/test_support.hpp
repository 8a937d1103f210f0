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

// Shared fixtures: the bundled Acme model, compiled once per process.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "dimbook/analyzer.hpp"
#include "dimbook/codegen.hpp"
#include "dimbook/project.hpp"

namespace dimbook::testing {

inline std::filesystem::path source_dir() { return DIMBOOK_SOURCE_DIR; }
inline std::filesystem::path acme_model_path() {
  return source_dir() / "models" / "acme" / "acme.dsm";
}
inline std::filesystem::path golden_dir() { return source_dir() / "tests" / "golden"; }

inline Model load_acme() {
  ParseResult r = load_model_file(acme_model_path());
  if (!r.ok()) throw std::runtime_error("bundled model does not load");
  return std::move(r.model);
}

inline ReportConfig acme_report() {
  return parse_report_config(read_file(source_dir() / "models" / "acme" / "report.cfg"));
}

struct Compiled {
  Model model;
  Analysis analysis;
  Workbook workbook;
};

inline Compiled compile(Model model, const ReportConfig& report) {
  Analysis a = analyze(model);
  if (!a.ok()) throw std::runtime_error("model does not analyse");
  Workbook wb = generate_workbook(model, a, report);
  return {std::move(model), std::move(a), std::move(wb)};
}

inline const Compiled& acme() {
  static const Compiled c = compile(load_acme(), acme_report());
  return c;
}

/// Formula text with blanks outside string literals removed.
inline std::string squeeze(const std::string& f) {
  std::string out;
  bool in_string = false;
  for (char c : f) {
    if (c == '"') in_string = !in_string;
    if (!in_string && (c == ' ' || c == '\t')) continue;
    out += c;
  }
  return out;
}

}  // namespace dimbook::testing
