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

#include "dimbook/naming.hpp"

#include <cctype>
#include <regex>

namespace dimbook {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string join_codes(const std::vector<std::string>& codes) {
  std::string out;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (i) out += kKeySeparator;
    out += codes[i];
  }
  return out;
}

bool is_valid_defined_name(std::string_view name) {
  if (name.empty()) return false;
  if (std::isdigit(static_cast<unsigned char>(name[0]))) return false;
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  static const std::regex a1(R"(^[A-Za-z]{1,3}[0-9]+$)");
  static const std::regex r1c1(R"(^([Rr][0-9]*)?([Cc][0-9]*)?$)");
  const std::string s(name);
  if (std::regex_match(s, a1) || std::regex_match(s, r1c1)) return false;
  const auto lower = to_lower(s);
  return lower != "true" && lower != "false";
}

std::string mangle_variable_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  }
  if (!out.empty() && std::isdigit(static_cast<unsigned char>(out[0]))) {
    out.insert(out.begin(), '_');
  }
  if (!is_valid_defined_name(out)) {
    throw NamingError("'" + std::string(name) + "' cannot be used as a workbook name (" +
                      out + ")");
  }
  return out;
}

std::string set_token(const Model& model, DimensionSet set) {
  if (set.empty()) return "Scalar";
  if (set.size() == 1) return model.dimensions.at(set.dims().front()).name;
  return model.dimset_initials(set);
}

std::string primary_key_name(const Model& model, DimensionSet set) {
  if (set.empty()) throw NamingError("the dimensionless set has no primary key");
  if (set.size() == 1) return set_token(model, set) + "_Code";
  return model.dimset_initials(set);
}

std::string foreign_key_name(const Model& model, DimensionSet referenced,
                             DimensionSet host) {
  return model.dimset_initials(referenced) + "_in_" + model.dimset_initials(host);
}

std::string foreign_key_label(const Model& model, DimensionSet referenced,
                              DimensionSet host) {
  return model.dimset_initials(referenced) + " in " + model.dimset_initials(host);
}

std::string last_column_name(const Model& model, DimensionSet set) {
  return "Last_" + set_token(model, set) + "_column";
}

std::string sheet_name(const Model& model, DimensionSet set, bool data_sheet) {
  const std::string suffix = data_sheet ? "Data" : "";
  if (set.empty()) return data_sheet ? "Data" : "Model";
  std::string base = model.dimset_name(set);
  if (set.size() > 3 || base.size() + suffix.size() > kMaxSheetNameLength) {
    base = model.dimset_initials(set);
  }
  return base + suffix;
}

}  // namespace dimbook
