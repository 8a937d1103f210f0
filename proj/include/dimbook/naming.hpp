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

// Workbook naming convention. Every defined name is workbook-global, so the
// scheme has to be injective over variables, keys and management cells:
//
//   variable "MSP Unit Sales"        MSP_Unit_Sales
//   primary key of {Sector}          Sector_Code
//   primary key of {Sector,Product}  SP
//   foreign key SP inside MSP        SP_in_MSP
//   last column of MSP               Last_MSP_column

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dimbook/model.hpp"

namespace dimbook {

class NamingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxSheetNameLength = 31;
inline constexpr char kKeySeparator = '-';

std::string to_lower(std::string_view s);
std::string join_codes(const std::vector<std::string>& codes);

/// True for names a spreadsheet accepts as a defined name: letters, digits
/// and '_', not starting with a digit, and not readable as a cell address.
bool is_valid_defined_name(std::string_view name);

/// Spaces and punctuation become '_'. Throws NamingError when the result is
/// not a valid defined name.
std::string mangle_variable_name(std::string_view name);

/// Short handle for a dimension set: the dimension name for a single
/// dimension, the initials otherwise, "Scalar" for the empty set.
std::string set_token(const Model& model, DimensionSet set);

std::string primary_key_name(const Model& model, DimensionSet set);
std::string foreign_key_name(const Model& model, DimensionSet referenced,
                             DimensionSet host);
std::string last_column_name(const Model& model, DimensionSet set);

/// Human label for a foreign key row, e.g. "MP in MSP".
std::string foreign_key_label(const Model& model, DimensionSet referenced,
                              DimensionSet host);

/// "Data"/"Model" for the empty set, otherwise the dimension names joined
/// by '-' (initials for sets of four or more dimensions or when the name
/// would exceed the sheet-name limit), plus "Data" for data sheets.
std::string sheet_name(const Model& model, DimensionSet set, bool data_sheet);

}  // namespace dimbook
