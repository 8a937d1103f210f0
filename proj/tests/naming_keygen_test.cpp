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

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "dimbook/keygen.hpp"
#include "dimbook/naming.hpp"
#include "dimbook/parser.hpp"
#include "test_support.hpp"

namespace dimbook {
namespace {

using testing::load_acme;

TEST(ColumnLetters, KnownValues) {
  EXPECT_EQ(column_letters(1), "A");
  EXPECT_EQ(column_letters(26), "Z");
  EXPECT_EQ(column_letters(27), "AA");
  EXPECT_EQ(column_letters(52), "AZ");
  EXPECT_EQ(column_letters(53), "BA");
  EXPECT_EQ(column_letters(98), "CT");
  EXPECT_EQ(column_letters(702), "ZZ");
  EXPECT_EQ(column_letters(703), "AAA");
  EXPECT_EQ(column_letters(16384), "XFD");
  EXPECT_EQ(column_index("xfd"), 16384u);
  EXPECT_EQ(column_index(""), 0u);
  EXPECT_EQ(column_index("A1"), 0u);
}

TEST(ColumnLetters, BijectionUpTo10000) {
  std::string prev;
  for (std::size_t i = 1; i <= 10000; ++i) {
    const std::string s = column_letters(i);
    ASSERT_EQ(column_index(s), i) << s;
    // Shorter strings come first; equal lengths sort alphabetically.
    if (!prev.empty()) {
      ASSERT_TRUE(prev.size() < s.size() || (prev.size() == s.size() && prev < s)) << s;
    }
    for (char c : s) ASSERT_TRUE(c >= 'A' && c <= 'Z');
    prev = s;
  }
}

TEST(KeyRows, LastColumnsOfTheAcmeSets) {
  const Model m = load_acme();
  EXPECT_EQ(last_column_letters(m, m.parse_dimset("Month-Product")), "Z");
  EXPECT_EQ(last_column_letters(m, m.parse_dimset("Month-Sector-Product")), "CT");
  EXPECT_EQ(column_count(m, m.parse_dimset("Month-Sector-Product-Region")), 480u);
  EXPECT_EQ(last_column_letters(m, m.parse_dimset("Sector")), "F");
}

TEST(KeyRows, PrimaryAndForeignKeys) {
  const Model m = load_acme();
  const auto sp = m.parse_dimset("Sector-Product");
  const auto pk = primary_key_row(m, sp);
  EXPECT_EQ(pk.values, (std::vector<std::string>{"G-S", "G-D", "M-S", "M-D", "P-S", "P-D",
                                                 "E-S", "E-D"}));
  const auto fk = foreign_key_row(m, sp, m.parse_dimset("Product"));
  EXPECT_EQ(fk.values, (std::vector<std::string>{"S", "D", "S", "D", "S", "D", "S", "D"}));
  EXPECT_THROW(foreign_key_row(m, m.parse_dimset("Sector"), sp), ModelError);

  const auto mspr = m.parse_dimset("Month-Sector-Product-Region");
  const auto keys = primary_key_row(m, mspr).values;
  EXPECT_EQ(keys.front(), "Jan-G-S-N");
  EXPECT_EQ(keys[1], "Jan-G-S-SE");
  EXPECT_EQ(keys.back(), "Dec-E-D-W");
}

// Every subset of every subset: foreign key values are the projected
// primary keys, tuple by tuple.
TEST(KeyRows, ForeignKeysAreProjections) {
  const Model m = load_acme();
  for (std::uint64_t hb = 1; hb < 16; ++hb) {
    const auto host = DimensionSet::from_bits(hb);
    const auto tuples = enumerate_tuples(m, host);
    for (std::uint64_t rb = 1; rb < 16; ++rb) {
      const auto ref = DimensionSet::from_bits(rb);
      if (!dimset_is_subset(ref, host)) continue;
      const auto fk = foreign_key_row(m, host, ref);
      const auto ref_pk = primary_key_row(m, ref).values;
      const Projector proj(m, host, ref);
      ASSERT_EQ(fk.values.size(), tuples.size());
      for (std::size_t i = 0; i < tuples.size(); ++i) {
        ASSERT_EQ(fk.values[i], render_key(m, ref, project_tuple(tuples[i], host, ref)));
        ASSERT_EQ(fk.values[i], ref_pk[proj(i)]);
      }
    }
  }
}

TEST(KeyRows, RenderedKeysAreUnique) {
  const Model m = load_acme();
  for (std::uint64_t b = 1; b < 16; ++b) {
    const auto s = DimensionSet::from_bits(b);
    const auto keys = primary_key_row(m, s).values;
    EXPECT_EQ(std::set<std::string>(keys.begin(), keys.end()).size(), m.cardinality(s));
  }
}

TEST(Naming, AcmeNames) {
  const Model m = load_acme();
  EXPECT_EQ(mangle_variable_name("MSP Unit Sales"), "MSP_Unit_Sales");
  EXPECT_EQ(mangle_variable_name("Annual Sector-Product Sales Amount"),
            "Annual_Sector_Product_Sales_Amount");
  EXPECT_EQ(primary_key_name(m, m.parse_dimset("Sector")), "Sector_Code");
  EXPECT_EQ(primary_key_name(m, m.parse_dimset("Sector-Product")), "SP");
  EXPECT_EQ(foreign_key_name(m, m.parse_dimset("Month-Product"),
                             m.parse_dimset("Month-Sector-Product")),
            "MP_in_MSP");
  EXPECT_EQ(foreign_key_label(m, m.parse_dimset("Month"), m.parse_dimset("Month-Sector-Product")),
            "M in MSP");
  EXPECT_EQ(last_column_name(m, m.parse_dimset("Month-Sector-Product")), "Last_MSP_column");
  EXPECT_EQ(sheet_name(m, m.parse_dimset("Sector-Product"), false), "Sector-Product");
  EXPECT_EQ(sheet_name(m, m.parse_dimset("Sector-Product"), true), "Sector-ProductData");
  EXPECT_EQ(sheet_name(m, m.parse_dimset("Month-Sector-Product-Region"), false), "MSPR");
  EXPECT_EQ(sheet_name(m, DimensionSet{}, false), "Model");
  EXPECT_EQ(sheet_name(m, DimensionSet{}, true), "Data");
}

TEST(Naming, DefinedNameValidity) {
  EXPECT_TRUE(is_valid_defined_name("Price"));
  EXPECT_TRUE(is_valid_defined_name("_1"));
  EXPECT_FALSE(is_valid_defined_name(""));
  EXPECT_FALSE(is_valid_defined_name("1A"));
  EXPECT_FALSE(is_valid_defined_name("C5"));
  EXPECT_FALSE(is_valid_defined_name("XFD1"));
  EXPECT_FALSE(is_valid_defined_name("R1C1"));
  EXPECT_FALSE(is_valid_defined_name("A B"));
  EXPECT_EQ(mangle_variable_name("2nd pass"), "_2nd_pass");
  EXPECT_THROW(mangle_variable_name("AB12"), NamingError);
}

// The parser is the gate: whatever pair of names it accepts must mangle to
// distinct names, compared case-insensitively.
TEST(Naming, MangledNamesOfAcceptedModelsAreDistinct) {
  std::mt19937 rng(7);
  const std::string alphabet = "aAbB -_1";
  std::uniform_int_distribution<std::size_t> len(1, 4), ch(0, alphabet.size() - 1);
  int accepted = 0, rejected = 0;
  for (int i = 0; i < 3000; ++i) {
    std::string a, b;
    for (std::size_t k = len(rng); k > 0; --k) a += alphabet[ch(rng)];
    for (std::size_t k = len(rng); k > 0; --k) b += alphabet[ch(rng)];
    if (a == b) continue;
    const auto r = parse_model("input \"x" + a + "\" = 1 input \"x" + b + "\" = 2");
    if (!r.ok()) {
      ++rejected;
      continue;
    }
    ++accepted;
    // Names are compared as the parser stored them (trimmed).
    const auto& vars = r.model.variables;
    ASSERT_EQ(vars.size(), 2u);
    EXPECT_NE(to_lower(mangle_variable_name(vars[0].name)),
              to_lower(mangle_variable_name(vars[1].name)))
        << a << " / " << b;
  }
  EXPECT_GT(accepted, 100);
  EXPECT_GT(rejected, 100);
}

TEST(Naming, AcmeDefinedNamesAreDistinct) {
  const auto& wb = testing::acme().workbook;
  std::set<std::string> seen;
  for (const auto& n : wb.names) {
    EXPECT_TRUE(is_valid_defined_name(n.name)) << n.name;
    EXPECT_TRUE(seen.insert(to_lower(n.name)).second) << n.name;
  }
  EXPECT_EQ(seen.size(), 69u);
}

}  // namespace
}  // namespace dimbook
