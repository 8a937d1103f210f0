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

#include "dimbook/keygen.hpp"

#include <algorithm>
#include <cctype>

#include "dimbook/naming.hpp"

namespace dimbook {

std::vector<Tuple> enumerate_tuples(const Model& model, DimensionSet set) {
  const auto radices = model.radices(set);
  const std::size_t count = model.cardinality(set);
  std::vector<Tuple> out;
  out.reserve(count);
  Tuple t(radices.size(), 0);
  for (std::size_t n = 0; n < count; ++n) {
    out.push_back(t);
    // Odometer increment, last position fastest.
    for (std::size_t i = radices.size(); i-- > 0;) {
      if (++t[i] < radices[i]) break;
      t[i] = 0;
    }
  }
  return out;
}

std::string render_key(const Model& model, DimensionSet set, const Tuple& tuple) {
  return join_codes(model.member_codes(set, tuple));
}

KeyRow primary_key_row(const Model& model, DimensionSet set) {
  KeyRow row{set, {}};
  for (const auto& t : enumerate_tuples(model, set)) {
    row.values.push_back(render_key(model, set, t));
  }
  return row;
}

KeyRow foreign_key_row(const Model& model, DimensionSet host,
                       DimensionSet referenced) {
  if (!dimset_is_subset(referenced, host)) {
    throw ModelError(model.dimset_name(referenced) + " is not a subset of " +
                     model.dimset_name(host));
  }
  KeyRow row{referenced, {}};
  for (const auto& t : enumerate_tuples(model, host)) {
    row.values.push_back(
        render_key(model, referenced, project_tuple(t, host, referenced)));
  }
  return row;
}

std::size_t column_count(const Model& model, DimensionSet set) {
  return model.cardinality(set);
}

std::string column_letters(std::size_t index) {
  std::string out;
  while (index > 0) {
    const std::size_t rem = (index - 1) % 26;
    out.push_back(static_cast<char>('A' + rem));
    index = (index - 1) / 26;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::size_t column_index(std::string_view letters) {
  if (letters.empty()) return 0;
  std::size_t n = 0;
  for (char c : letters) {
    const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (u < 'A' || u > 'Z') return 0;
    n = n * 26 + static_cast<std::size_t>(u - 'A' + 1);
  }
  return n;
}

std::string last_column_letters(const Model& model, DimensionSet set,
                                std::size_t first_data_column) {
  return column_letters(first_data_column - 1 + column_count(model, set));
}

}  // namespace dimbook
