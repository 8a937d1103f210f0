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

// Office Open XML (.xlsx) output. Formula cells carry the interpreter's
// values as cached results so readers that do not recalculate still show
// numbers. Output is byte-for-byte deterministic.

#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dimbook/formula.hpp"
#include "dimbook/workbook.hpp"

namespace dimbook {

class XlsxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The package as bytes. `cached` may be null to omit cached values.
std::string xlsx_bytes(const Workbook& wb, const WorkbookValues* cached);

/// Throws XlsxError when the file cannot be written.
void write_xlsx(const std::string& path, const Workbook& wb, const WorkbookValues* cached);

/// Part name -> uncompressed contents. Handles the stored and deflate
/// methods. Throws XlsxError on a malformed archive.
std::map<std::string, std::string> read_zip(std::string_view bytes);

std::string xml_escape(std::string_view text);

}  // namespace dimbook
