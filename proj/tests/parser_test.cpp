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

#include "dimbook/parser.hpp"
#include "test_support.hpp"

namespace dimbook {
namespace {

constexpr const char* kDims = R"(
dimension Month initial M { Jan "January" Feb "February" }
dimension Sector initial S { G "Government" M "Military" }
)";

ParseResult parse(const std::string& body) { return parse_model(std::string(kDims) + body); }

bool has_code(const ParseResult& r, std::string_view code) {
  for (const auto& d : r.diagnostics) {
    if (d.code == code) return true;
  }
  return false;
}

TEST(ModelParser, ReadsTheBundledModel) {
  const Model m = testing::load_acme();
  ASSERT_EQ(m.dimensions.size(), 4u);
  EXPECT_EQ(m.dimensions[0].name, "Month");
  EXPECT_EQ(m.dimensions[0].members.size(), 12u);
  EXPECT_EQ(m.dimensions[3].members[1].code, "SE");
  EXPECT_EQ(m.dimensions[3].members[1].label, "Southeast");
  ASSERT_EQ(m.variables.size(), 31u);
  EXPECT_EQ(m.variables.front().name, "Base Price");
  EXPECT_EQ(m.variables.back().name, "Total Profit");
  EXPECT_EQ(*m.variable("Base Price").inline_value, 140);
  EXPECT_EQ(m.variable("Rebate Percentage").number_format, NumberFormat::Percent);
  EXPECT_EQ(m.variable("Total Profit").kind, VariableKind::Output);
  EXPECT_TRUE(m.variable("Total Profit").dimset.empty());
  EXPECT_EQ(render_formula(*m.variable("Sector Annual Demand Units").formula),
            "[DemParB] / [Sector Base Price] ^ [DemParA]");
}

TEST(ModelParser, PercentDataIsExact) {
  const Model m = testing::load_acme();
  const auto* t = m.table(m.parse_dimset("Sector"));
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->column("Rebate Percentage")->values,
            (std::vector<double>{0.4, 0.2, 0.1, 0.7}));
  EXPECT_EQ(parse_data_number("70%"), 0.7);
  EXPECT_EQ(parse_data_number(" 3 "), 3.0);
  EXPECT_EQ(parse_data_number("1e3"), 1000.0);
  EXPECT_FALSE(parse_data_number("abc").has_value());
  EXPECT_FALSE(parse_data_number("").has_value());
  EXPECT_FALSE(parse_data_number("1 2").has_value());
}

TEST(ModelParser, FormulaPrecedence) {
  EXPECT_EQ(render_formula(*parse_formula("1 + 2 * 3")), "1 + 2 * 3");
  EXPECT_EQ(render_formula(*parse_formula("(1 + 2) * 3")), "(1 + 2) * 3");
  EXPECT_EQ(render_formula(*parse_formula("2 ^ 3 ^ 2")), "2 ^ 3 ^ 2");
  EXPECT_EQ(render_formula(*parse_formula("(2 ^ 3) ^ 2")), "(2 ^ 3) ^ 2");
  EXPECT_EQ(render_formula(*parse_formula("1 - (2 - 3)")), "1 - (2 - 3)");
  EXPECT_EQ(render_formula(*parse_formula("1-2-3")), "1 - 2 - 3");
  EXPECT_EQ(render_formula(*parse_formula("SUM([A b])")), "SUM([A b])");
  EXPECT_THROW(parse_formula("1 +"), SyntaxError);
  EXPECT_THROW(parse_formula("[unterminated"), SyntaxError);
  EXPECT_THROW(parse_formula("1 2"), SyntaxError);
}

ExprPtr random_expr(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 4);
  static const char* names[] = {"A", "B c", "Var-1", "x"};
  switch (pick(rng)) {
    case 0:
      return make_literal(std::uniform_int_distribution<int>(0, 2000)(rng) / 8.0);
    case 1:
      return make_ref(names[std::uniform_int_distribution<int>(0, 3)(rng)]);
    case 2:
      return make_negate(random_expr(rng, depth - 1));
    default: {
      const auto op = static_cast<BinaryOp>(std::uniform_int_distribution<int>(0, 4)(rng));
      return make_binary(op, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    }
  }
}

TEST(ModelParser, RenderParseRoundTrip) {
  std::mt19937 rng(20260101);
  for (int i = 0; i < 2000; ++i) {
    const ExprPtr e = random_expr(rng, 5);
    const std::string text = render_formula(*e);
    const ExprPtr back = parse_formula(text);
    ASSERT_TRUE(expr_equal(*e, *back)) << text << " -> " << render_formula(*back);
    EXPECT_EQ(render_formula(*back), text);
  }
}

TEST(ModelParser, Diagnostics) {
  EXPECT_TRUE(has_code(parse(R"(input "A" = 1 input "A" = 2)"), "duplicate-variable"));
  EXPECT_TRUE(has_code(parse(R"(calc "A" over Month = [Nope])"), "unresolved-reference"));
  EXPECT_TRUE(has_code(parse(R"(data "A" over Colour)"), "unknown-dimension"));
  EXPECT_TRUE(has_code(parse(R"(data "A" over Month-Month)"), "repeated-dimension"));
  EXPECT_TRUE(has_code(parse(R"(calc "A" over Month)"), "missing-formula"));
  EXPECT_TRUE(has_code(parse(R"(data "A" over Month = 1)"), "inline-data"));
  EXPECT_TRUE(has_code(parse(R"(input "A" = 1 + 2)"), "unexpected-formula"));
  EXPECT_TRUE(has_code(parse(R"(input "A" format fancy = 1)"), "bad-format"));
  EXPECT_TRUE(has_code(parse(R"(input "A" = 1 input "a" = 2)"), "name-collision"));
  EXPECT_TRUE(has_code(parse(R"(calc "A" = = 1)"), "syntax"));
  EXPECT_TRUE(has_code(parse_model(R"(dimension D initial D { A "a" A "b" })"),
                       "duplicate-member"));
  EXPECT_TRUE(has_code(parse_model(R"(dimension D initial D { })"), "empty-dimension"));
  EXPECT_TRUE(has_code(parse_model(""), "empty-model"));

  const auto r = parse(R"(
input "A" = 1
calc "B" = [Missing] + 1)");
  ASSERT_FALSE(r.ok());
  const auto& d = r.diagnostics.front();
  EXPECT_EQ(d.span.line, 6);
  EXPECT_NE(format_diagnostic(d).find("<input>:6:"), std::string::npos);
}

TEST(CsvReader, QuotingAndLines) {
  const auto rows = read_csv("a,\"b,c\"\n\"say \"\"hi\"\"\",2\r\n\n3,4", "t.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].fields, (std::vector<std::string>{"a", "b,c"}));
  EXPECT_EQ(rows[1].fields, (std::vector<std::string>{"say \"hi\"", "2"}));
  EXPECT_EQ(rows[2].line, 4);
  EXPECT_THROW(read_csv("a,\"b", "t.csv"), SyntaxError);
}

TEST(DataLoading, BindsAndValidatesTables) {
  auto r = parse(R"(data "Share" over Month-Sector
calc "Twice" over Month-Sector = [Share] * 2)");
  ASSERT_TRUE(r.ok());
  const std::string good = "Sector,Month,Share\nG,Jan,1\nM,Jan,2\nG,Feb,3\nM,Feb,4\n";
  auto loaded = load_data(r.model, {{"ms.csv", good}});
  ASSERT_TRUE(loaded.ok()) << format_diagnostic(loaded.diagnostics.front());
  const auto* t = loaded.model.table(loaded.model.parse_dimset("Month-Sector"));
  // Column order in the file does not matter; values land in tuple order.
  EXPECT_EQ(t->column("Share")->values, (std::vector<double>{1, 2, 3, 4}));

  EXPECT_TRUE(has_code(load_data(r.model, {{"ms.csv", "Sector,Month,Share\nG,Jan,1\n"}}),
                       "missing-tuple"));
  EXPECT_TRUE(has_code(load_data(r.model, {{"ms.csv", good + "G,Jan,5\n"}}),
                       "duplicate-tuple"));
  EXPECT_TRUE(has_code(load_data(r.model, {{"ms.csv", "Sector,Month,Share\nX,Jan,1\n"}}),
                       "unknown-member"));
  EXPECT_TRUE(has_code(
      load_data(r.model, {{"ms.csv", "Sector,Month,Share\nG,Jan,x\nM,Jan,2\nG,Feb,3\nM,Feb,4\n"}}),
      "not-numeric"));
  EXPECT_TRUE(has_code(load_data(r.model, {{"ms.csv", "Sector,Month,Twice\nG,Jan,1\n"}}),
                       "not-data"));
  EXPECT_TRUE(has_code(load_data(r.model, {}), "missing-data"));
}

}  // namespace
}  // namespace dimbook
