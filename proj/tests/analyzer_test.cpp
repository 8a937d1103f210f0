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

#include <map>
#include <set>

#include "dimbook/analyzer.hpp"
#include "dimbook/naming.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace dimbook {
namespace {

using testing::load_acme;
using Inventory = std::vector<std::pair<std::string, std::vector<std::string>>>;

Inventory inventory(const Model& m, const std::vector<SheetPlan>& sheets) {
  Inventory out;
  for (const auto& s : sheets) {
    std::vector<std::string> vars;
    for (auto v : s.variables) vars.push_back(m.variables[v].name);
    out.emplace_back(s.name, vars);
  }
  return out;
}

bool has_code(const std::vector<Diagnostic>& diags, std::string_view code,
              Severity severity = Severity::Error) {
  for (const auto& d : diags) {
    if (d.code == code && d.severity == severity) return true;
  }
  return false;
}

Model parse_ok(const std::string& text) {
  auto r = parse_model(text);
  EXPECT_TRUE(r.ok()) << (r.diagnostics.empty() ? "" : format_diagnostic(r.diagnostics[0]));
  return std::move(r.model);
}

TEST(WorksheetPlan, DataSheets) {
  const Model m = load_acme();
  const Inventory expected = {
      {"Data", {"Base Price", "Monthly Fixed Cost"}},
      {"ProductData", {"Base Price Multiplier", "Unit Production Cost"}},
      {"SectorData", {"Rebate Percentage", "DemParA", "DemParB"}},
      {"RegionData", {"Unit Delivery Cost"}},
      {"Sector-ProductData", {"Product Distribution per Sector"}},
      {"Sector-RegionData", {"Region Sales Distribution per Sector"}},
      {"Month-SectorData", {"Monthly Sales Distribution per Sector"}},
  };
  EXPECT_EQ(inventory(m, assign_worksheets(m).data_sheets), expected);
}

TEST(WorksheetPlan, ModelSheets) {
  const Model m = load_acme();
  const Inventory expected = {
      {"Sector", {"Sector Price Factor", "Sector Base Price", "Sector Annual Demand Units"}},
      {"Product-Region", {"PR Unit Cost"}},
      {"Sector-Product",
       {"Annual Sector-Product Unit Sales", "Price", "Annual Sector-Product Sales Amount"}},
      {"Month-Sector-Product", {"MSP Unit Sales", "MSP Sales Amount"}},
      {"MSPR", {"MSPR Unit Sales", "MSPR Variable Cost"}},
      {"Month",
       {"Monthly Variable Cost", "Monthly Unit Sales", "Monthly Sales Amount", "Monthly Costs",
        "Monthly Profit"}},
      {"Month-Product-Region", {"MPR Unit Sales"}},
      {"Month-Product", {"MP Unit Sales", "MP Sales Amount"}},
      {"Model", {"Total Profit"}},
  };
  const auto plan = assign_worksheets(m);
  EXPECT_EQ(inventory(m, plan.model_sheets), expected);
  EXPECT_EQ(plan.key_owner(m.parse_dimset("Sector"))->name, "SectorData");
  EXPECT_EQ(plan.key_owner(m.parse_dimset("Month-Product"))->name, "Month-Product");
  EXPECT_EQ(plan.all().size(), 16u);
}

TEST(KeyPlan, PrimaryKeys) {
  const Model m = load_acme();
  std::set<std::string> names;
  for (const auto& k : derive_keys(m).primary_keys) names.insert(k.name);
  EXPECT_EQ(names, (std::set<std::string>{"Product_Code", "Sector_Code", "Region_Code",
                                          "Month_Code", "SP", "MS", "SR", "MP", "PR", "MSP",
                                          "MPR", "MSPR"}));
}

TEST(KeyPlan, ForeignKeys) {
  const Model m = load_acme();
  std::set<std::string> aggregate, plain;
  for (const auto& k : derive_keys(m).foreign_keys) {
    (k.from_aggregate ? aggregate : plain).insert(foreign_key_label(m, k.referenced, k.host));
    EXPECT_TRUE(dimset_is_proper_subset(k.referenced, k.host));
  }
  EXPECT_EQ(aggregate,
            (std::set<std::string>{"M in MSPR", "M in MSP", "MPR in MSPR", "MP in MSP"}));
  EXPECT_EQ(plain, (std::set<std::string>{"P in PR", "R in PR", "S in SP", "P in SP",
                                          "SP in MSP", "MS in MSP", "MSP in MSPR",
                                          "SR in MSPR", "PR in MSPR"}));
  const auto keys = derive_keys(m);
  const auto* sp_in_msp =
      keys.foreign(m.parse_dimset("Sector-Product"), m.parse_dimset("Month-Sector-Product"));
  ASSERT_NE(sp_in_msp, nullptr);
  std::vector<std::string> provoking;
  for (auto v : sp_in_msp->provoking) provoking.push_back(m.variables[v].name);
  EXPECT_EQ(provoking, (std::vector<std::string>{"MSP Unit Sales", "MSP Sales Amount"}));
  EXPECT_EQ(keys.hosted_by(m.parse_dimset("Month-Sector-Product-Region")).size(), 5u);
}

TEST(Analysis, AcmeIsClean) {
  const Model m = load_acme();
  const auto a = analyze(m);
  EXPECT_TRUE(a.diagnostics.empty());
  ASSERT_TRUE(a.graph.acyclic());
  ASSERT_EQ(a.graph.order.size(), m.variables.size());
  std::vector<std::size_t> position(m.variables.size());
  for (std::size_t i = 0; i < a.graph.order.size(); ++i) position[a.graph.order[i]] = i;
  for (std::size_t v = 0; v < m.variables.size(); ++v) {
    for (auto u : a.graph.dependencies[v]) EXPECT_LT(position[u], position[v]);
  }
}

TEST(Analysis, CycleIsReported) {
  const Model m = parse_ok(R"(
dimension D initial D { a "A" }
calc "X" over D = [Y] + 1
calc "Y" over D = [X] * 2
calc "Z" over D = [Y])");
  const auto g = build_graph(m);
  EXPECT_FALSE(g.acyclic());
  EXPECT_TRUE(g.order.empty());
  EXPECT_EQ(g.cycle.size(), 2u);
  const auto a = analyze(m);
  EXPECT_TRUE(has_code(a.diagnostics, "cycle"));
  EXPECT_FALSE(a.ok());
}

TEST(Analysis, DimensionRules) {
  const Model m = parse_ok(R"(
dimension A initial A { x "X" }
dimension B initial B { y "Y" }
data "P" over A
data "Q" over B
calc "Wrong" over A = [P] * [Q]
calc "Widen" over A-B = SUM([P])
calc "Early" over A = [Late] + 1
calc "Late" over A = [P])");
  const auto diags = check_dimensions(m);
  EXPECT_TRUE(has_code(diags, "dimension-mismatch"));
  EXPECT_TRUE(has_code(diags, "aggregate-set"));
  EXPECT_TRUE(has_code(diags, "forward-reference", Severity::Warning));
}

// Applies the change for real, recompiles both models and compares every
// sheet width and every aggregate source width.
void expect_impact_matches_recompilation(const Model& m, const std::string& dim,
                                         std::size_t n) {
  const auto report = impact_of_member_change(m, dim, n);
  const auto d = *m.dimension_index(dim);
  Model changed = m;
  const auto& members = m.dimensions[d].members;
  for (std::size_t k = members.size(); k < n; ++k) {
    changed = with_member_added(changed, dim, {"Z" + std::to_string(k), ""}, members[0].code);
  }
  for (std::size_t k = members.size(); k > n; --k) {
    changed = with_member_removed(changed, dim, members[k - 1].code);
  }
  const auto before = testing::compile(m, default_report_config(m));
  const auto after = testing::compile(changed, default_report_config(changed));

  std::map<std::string, std::pair<std::size_t, std::size_t>> expected;
  for (const auto* s : before.analysis.plan.all()) {
    const auto* t = after.analysis.plan.data_sheet(s->dimset);
    if (!t) t = after.analysis.plan.model_sheet(s->dimset);
    ASSERT_NE(t, nullptr);
    const auto old_w = before.workbook.sheet(s->name)->row_width(3);
    const auto new_w = after.workbook.sheet(t->name)->row_width(3);
    if (s->dimset.contains(d)) expected[s->name] = {old_w - 2, new_w - 2};
  }
  std::map<std::string, std::pair<std::size_t, std::size_t>> got;
  for (const auto& s : report.sheets) got[s.sheet] = {s.old_columns, s.new_columns};
  EXPECT_EQ(got, expected) << dim << " -> " << n;

  std::set<std::string> widened;
  for (const auto& v : m.variables) {
    if (!v.formula) continue;
    const auto* sum = std::get_if<Sum>(&v.formula->node);
    if (!sum) continue;
    const bool source_changed =
        before.workbook.layout.at(sum->name).count != after.workbook.layout.at(sum->name).count;
    const bool own_same =
        before.workbook.layout.at(v.name).count == after.workbook.layout.at(v.name).count;
    if (source_changed && own_same) widened.insert(v.name);
  }
  EXPECT_EQ(std::set<std::string>(report.widened_aggregates.begin(),
                                  report.widened_aggregates.end()),
            widened)
      << dim << " -> " << n;
}

TEST(Impact, AddingASector) {
  const Model m = load_acme();
  const auto r = impact_of_member_change(m, "Sector", 5);
  std::map<std::string, std::size_t> cols;
  for (const auto& s : r.sheets) cols[s.sheet] = s.new_columns;
  EXPECT_EQ(cols, (std::map<std::string, std::size_t>{{"SectorData", 5},
                                                      {"Sector-ProductData", 10},
                                                      {"Sector-RegionData", 25},
                                                      {"Month-SectorData", 60},
                                                      {"Sector", 5},
                                                      {"Sector-Product", 10},
                                                      {"Month-Sector-Product", 120},
                                                      {"MSPR", 600}}));
  EXPECT_EQ(std::set<std::string>(r.widened_aggregates.begin(), r.widened_aggregates.end()),
            (std::set<std::string>{"MP Sales Amount", "MP Unit Sales", "MPR Unit Sales",
                                   "Monthly Variable Cost", "Monthly Sales Amount",
                                   "Monthly Unit Sales"}));
  const auto j = nlohmann::json::parse(impact_to_json(r));
  EXPECT_EQ(j["dimension"], "Sector");
  EXPECT_EQ(j["sheets"].size(), 8u);
  EXPECT_NE(impact_to_text(r).find("MSPR"), std::string::npos);
  EXPECT_THROW(impact_of_member_change(m, "Colour", 3), ModelError);
}

TEST(Impact, AgreesWithRecompilation) {
  const Model m = load_acme();
  for (const char* dim : {"Month", "Sector", "Product", "Region"}) {
    for (std::size_t n : {1, 3, 6}) expect_impact_matches_recompilation(m, dim, n);
  }
}

TEST(Impact, SameCountChangesNothing) {
  const Model m = load_acme();
  const auto r = impact_of_member_change(m, "Product", 2);
  for (const auto& s : r.sheets) EXPECT_EQ(s.old_columns, s.new_columns);
}

}  // namespace
}  // namespace dimbook
