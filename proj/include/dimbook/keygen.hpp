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

// Tuple enumeration and key rows. Tuples are enumerated as nested loops over
// the set's dimensions in canonical order, the last dimension fastest, so
// column i of every sheet of a set holds tuple i.

#pragma once

#include <string>
#include <vector>

#include "dimbook/model.hpp"

namespace dimbook {

/// First spreadsheet column holding values (A = labels, B = management).
inline constexpr std::size_t kFirstDataColumn = 3;

struct KeyRow {
  DimensionSet dimset;
  std::vector<std::string> values;
};

std::vector<Tuple> enumerate_tuples(const Model& model, DimensionSet set);

/// Member codes joined with '-'; the empty tuple renders as "".
std::string render_key(const Model& model, DimensionSet set, const Tuple& tuple);

KeyRow primary_key_row(const Model& model, DimensionSet set);

/// Value i is the key of tuple i of `host` projected onto `referenced`.
/// Throws ModelError when `referenced` is not a subset of `host`.
KeyRow foreign_key_row(const Model& model, DimensionSet host,
                       DimensionSet referenced);

std::size_t column_count(const Model& model, DimensionSet set);

/// Bijective base-26: 1 -> "A", 26 -> "Z", 27 -> "AA".
std::string column_letters(std::size_t index);
/// Inverse of column_letters; 0 on malformed input.
std::size_t column_index(std::string_view letters);

std::string last_column_letters(const Model& model, DimensionSet set,
                                std::size_t first_data_column = kFirstDataColumn);

}  // namespace dimbook
