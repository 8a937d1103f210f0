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

#include <set>

#include "acme_reference.hpp"
#include "dimbook/verifier.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace dimbook {
namespace {

using testing::acme;
using testing::AcmeReference;

constexpr double kTol = 1e-9;

class OracleVsReference : public ::testing::Test {
 protected:
  void expect(const char* var, std::size_t ordinal, double want) {
    const double got = store_.number(acme().model, var, ordinal);
    EXPECT_LE(relative_deviation(got, want), 1e-12) << var << "[" << ordinal << "]";
  }
  const ValueStore store_ = evaluate_model(acme().model);
  const AcmeReference ref_;
};

TEST_F(OracleVsReference, EveryTupleOfEveryVariable) {
  using R = AcmeReference;
  for (int s = 0; s < R::S; ++s) {
    expect("Sector Base Price", s, ref_.sector_base_price[s]);
    expect("Sector Annual Demand Units", s, ref_.annual_demand[s]);
    for (int p = 0; p < R::P; ++p) {
      const int sp = s * R::P + p;
      expect("Annual Sector-Product Unit Sales", sp, ref_.sp_units[s][p]);
      expect("Price", sp, ref_.price[s][p]);
      expect("Annual Sector-Product Sales Amount", sp, ref_.sp_amount[s][p]);
    }
  }
  for (int p = 0; p < R::P; ++p)
    for (int r = 0; r < R::R; ++r) expect("PR Unit Cost", p * R::R + r, ref_.pr_unit_cost[p][r]);
  for (int m = 0; m < R::M; ++m) {
    expect("Monthly Variable Cost", m, ref_.monthly_variable_cost[m]);
    expect("Monthly Unit Sales", m, ref_.monthly_units[m]);
    expect("Monthly Sales Amount", m, ref_.monthly_amount[m]);
    expect("Monthly Costs", m, ref_.monthly_costs[m]);
    expect("Monthly Profit", m, ref_.monthly_profit[m]);
    for (int p = 0; p < R::P; ++p) {
      expect("MP Unit Sales", m * R::P + p, ref_.mp_units[m][p]);
      expect("MP Sales Amount", m * R::P + p, ref_.mp_amount[m][p]);
      for (int r = 0; r < R::R; ++r) {
        expect("MPR Unit Sales", (m * R::P + p) * R::R + r, ref_.mpr_units[m][p][r]);
      }
    }
    for (int s = 0; s < R::S; ++s)
      for (int p = 0; p < R::P; ++p) {
        const int msp = (m * R::S + s) * R::P + p;
        expect("MSP Unit Sales", msp, ref_.msp_units[m][s][p]);
        expect("MSP Sales Amount", msp, ref_.msp_amount[m][s][p]);
        for (int r = 0; r < R::R; ++r) {
          expect("MSPR Unit Sales", msp * R::R + r, ref_.mspr_units[m][s][p][r]);
          expect("MSPR Variable Cost", msp * R::R + r, ref_.mspr_cost[m][s][p][r]);
        }
      }
  }
  expect("Total Profit", 0, ref_.total_profit);
}

TEST_F(OracleVsReference, KnownAcmeValues) {
  const Model& m = acme().model;
  const double base[] = {84, 112, 126, 42};
  const double demand[] = {2718.07, 1787.02, 4605.16, 4686.71};
  for (int s = 0; s < 4; ++s) {
    EXPECT_NEAR(store_.number(m, "Sector Base Price", s), base[s], 1e-9);
    EXPECT_NEAR(store_.number(m, "Sector Annual Demand Units", s), demand[s], 0.02);
  }
  const double price[] = {84.00, 121.80, 112.00, 162.40, 126.00, 182.70, 42.00, 60.90};
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(store_.number(m, "Price", i), price[i], 0.005);
  EXPECT_NEAR(store_.number(m, "Annual Sector-Product Sales Amount", 0), 148406, 1);
  const double msp[] = {159.01, 85.62, 35.74, 107.22, 221.05,
                        331.57, 224.96, 56.24, 176.67, 95.13};
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(store_.number(m, "MSP Unit Sales", i), msp[i], 0.01);
  const double mp[] = {640.76, 580.65, 719.46, 594.68, 759.91, 581.22, 769.50, 562.14};
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(store_.number(m, "MP Unit Sales", i), mp[i], 0.01);
}

TEST_F(OracleVsReference, AggregationConservesTotals) {
  const Model& m = acme().model;
  auto total = [&](const char* v) {
    double t = 0;
    for (const auto& x : store_.of(m, v)) t += *as_number(x);
    return t;
  };
  const double units = total("MSPR Unit Sales");
  EXPECT_NEAR(total("Monthly Unit Sales"), units, 1e-9 * units);
  EXPECT_NEAR(total("MPR Unit Sales"), units, 1e-9 * units);
  EXPECT_NEAR(total("MP Unit Sales"), total("MSP Unit Sales"), 1e-9 * units);
  EXPECT_NEAR(total("MP Sales Amount"), total("Monthly Sales Amount"), 1e-6);
  EXPECT_NEAR(store_.number(m, "Total Profit", 0), total("Monthly Profit"), 1e-6);
  // Each sector's monthly shares sum to one, so the year's MSP units
  // recover the annual units.
  EXPECT_NEAR(total("MSP Unit Sales"), total("Annual Sector-Product Unit Sales"), 1e-6);
}

TEST(CrossCheck, AcmeWorkbookAgreesWithTheOracle) {
  const auto& c = acme();
  const auto report = cross_check(c.model, c.workbook, kTol);
  EXPECT_TRUE(report.passed()) << report_to_text(report);
  EXPECT_EQ(report.failures(), 0u);
  EXPECT_TRUE(report.missing.empty());
  EXPECT_TRUE(report.cyclic.empty());
  EXPECT_EQ(report.management.size(), 27u);
  for (const auto& f : report.management) EXPECT_TRUE(f.ok) << f.label;
  std::size_t model_cells = 0, interface_cells = 0;
  for (const auto& e : report.entries) (e.interface ? interface_cells : model_cells)++;
  std::size_t expected = 0;
  for (const auto& v : c.model.variables) expected += c.model.cardinality(v.dimset);
  EXPECT_EQ(model_cells, expected);
  EXPECT_EQ(interface_cells, c.workbook.interface_cells.size());
  ASSERT_NE(report.worst(), nullptr);
  EXPECT_LE(report.worst()->relative, kTol);

  const auto j = nlohmann::json::parse(report_to_json(report));
  EXPECT_EQ(j["passed"], true);
  EXPECT_NE(report_to_text(report).find("PASS"), std::string::npos);
}

std::set<std::pair<std::string, std::size_t>> failing(const CheckReport& r) {
  std::set<std::pair<std::string, std::size_t>> out;
  for (const auto& e : r.entries) {
    if (!e.ok && !e.interface) out.insert({e.variable, e.ordinal});
  }
  return out;
}

TEST(CrossCheck, CorruptedAggregateForeignKeyIsDetected) {
  Workbook wb = acme().workbook;
  // First MSP column belongs to Jan-S; point it at Feb-S instead.
  Sheet* msp = wb.sheet("Month-Sector-Product");
  ASSERT_EQ(std::get<std::string>(msp->at({7, 3})->content), "Jan-S");
  msp->set({7, 3}, text_cell("Feb-S"));
  const auto report = cross_check(acme().model, wb, kTol);
  EXPECT_FALSE(report.passed());
  const std::set<std::pair<std::string, std::size_t>> expected = {
      {"MP Unit Sales", 0}, {"MP Unit Sales", 2}, {"MP Sales Amount", 0}, {"MP Sales Amount", 2}};
  EXPECT_EQ(failing(report), expected);
  for (const auto& f : report.management) EXPECT_TRUE(f.ok);
}

TEST(CrossCheck, CorruptedLookupForeignKeyPropagates) {
  Workbook wb = acme().workbook;
  Sheet* msp = wb.sheet("Month-Sector-Product");
  msp->set({4, 3}, text_cell("M-S"));  // SP in MSP for Jan-G-S
  const auto report = cross_check(acme().model, wb, kTol);
  const auto bad = failing(report);
  EXPECT_TRUE(bad.count({"MSP Unit Sales", 0}));
  EXPECT_FALSE(bad.count({"MSP Unit Sales", 1}));
  EXPECT_TRUE(bad.count({"MSPR Unit Sales", 0}));
  EXPECT_TRUE(bad.count({"Monthly Unit Sales", 0}));
  EXPECT_FALSE(bad.count({"Monthly Unit Sales", 1}));
  EXPECT_TRUE(bad.count({"Total Profit", 0}));
  EXPECT_FALSE(bad.count({"Price", 0}));
}

TEST(CrossCheck, StrayKeyTripsManagementFlags) {
  Workbook wb = acme().workbook;
  Sheet* msp = wb.sheet("Month-Sector-Product");
  msp->set({3, 99}, text_cell("Jan-X-S"));  // one key past CT
  const auto report = cross_check(acme().model, wb, kTol);
  EXPECT_FALSE(report.passed());
  std::size_t errors = 0;
  for (const auto& f : report.management) errors += f.ok ? 0 : 1;
  EXPECT_GE(errors, 2u);
}

TEST(CrossCheck, WorkbookReadBackFromViewStillVerifies) {
  const auto& c = acme();
  const Workbook back = parse_formula_view(render_formula_view(c.workbook));
  Workbook bare = c.workbook;
  bare.provenance.clear();
  EXPECT_EQ(render_formula_view(back), render_formula_view(bare));
  const auto report = cross_check(c.model, back, kTol);
  EXPECT_TRUE(report.passed()) << report_to_text(report);
  EXPECT_EQ(report.management.size(), 27u);
}

TEST(Scalability, FifthSectorRecompilesCleanly) {
  const auto& base = acme();
  Model bigger = with_member_added(base.model, "Sector", {"X", "Export"}, "G");
  const auto grown = testing::compile(bigger, testing::acme_report());
  const auto report = cross_check(grown.model, grown.workbook, kTol);
  EXPECT_TRUE(report.passed()) << report_to_text(report);
  for (const auto& f : report.management) EXPECT_TRUE(f.ok) << f.label;

  // The cloned sector doubles G's demand, so every month's MP units grow by
  // exactly G's share.
  const auto before = evaluate_model(base.model);
  const auto after = evaluate_model(grown.model);
  for (std::size_t i = 0; i < 24; ++i) {
    const std::size_t month = i / 2, product = i % 2;
    const double g = before.number(base.model, "MSP Unit Sales", month * 8 + product);
    EXPECT_NEAR(after.number(grown.model, "MP Unit Sales", i),
                before.number(base.model, "MP Unit Sales", i) + g, 1e-9);
  }

  const auto s = *base.model.dimension_index("Sector");
  std::size_t compared = 0;
  for (const auto* plan : base.analysis.plan.all()) {
    if (plan->dimset.contains(s)) continue;
    const Sheet* old_sheet = base.workbook.sheet(plan->name);
    const Sheet* new_sheet = grown.workbook.sheet(plan->name);
    ASSERT_NE(new_sheet, nullptr) << plan->name;
    for (const auto& [addr, cell] : old_sheet->cells()) {
      const Cell* other = new_sheet->at(addr);
      ASSERT_NE(other, nullptr) << plan->name << " " << a1(addr);
      EXPECT_EQ(cell.content, other->content) << plan->name << " " << a1(addr);
    }
    // New cells only extend the source rows of widened aggregates, which
    // ran to CT (MSP) or RN (MSPR) before.
    for (const auto& [addr, cell] : new_sheet->cells()) {
      if (old_sheet->at(addr)) continue;
      const auto width = old_sheet->row_width(addr.row);
      EXPECT_TRUE(width == 98 || width == 482) << plan->name << " " << a1(addr);
      EXPECT_GT(addr.col, width);
    }
    ++compared;
  }
  EXPECT_EQ(compared, 8u);
  for (const char* name : {"Management", "Interface"}) {
    const Sheet* a = base.workbook.sheet(name);
    const Sheet* b = grown.workbook.sheet(name);
    EXPECT_EQ(a->cells().size(), b->cells().size());
    for (const auto& [addr, cell] : a->cells()) EXPECT_EQ(cell.content, b->at(addr)->content);
  }
}

TEST(Verifier, OracleErrorsMatchTheInterpreter) {
  auto r = parse_model(R"(
dimension D initial D { a "A" b "B" }
data "X" over D
calc "Y" over D = 1 / [X]
output "Z" = SUM([Y]))");
  auto loaded = load_data(r.model, {{"d.csv", "D,X\na,0\nb,2\n"}});
  ASSERT_TRUE(loaded.ok());
  const auto c = testing::compile(loaded.model, default_report_config(loaded.model));
  const auto store = evaluate_model(c.model);
  EXPECT_EQ(store.of(c.model, "Y")[0], CellValue(kDivZero));
  EXPECT_EQ(store.of(c.model, "Z")[0], CellValue(kDivZero));
  EXPECT_THROW(store.number(c.model, "Y", 0), ModelError);
  const auto report = cross_check(c.model, c.workbook, kTol);
  EXPECT_TRUE(report.passed()) << report_to_text(report);
}

TEST(Verifier, RelativeDeviation) {
  EXPECT_EQ(relative_deviation(0, 0), 0);
  EXPECT_EQ(relative_deviation(1, -1), 2);
  EXPECT_DOUBLE_EQ(relative_deviation(100, 101), 1.0 / 101);
  EXPECT_EQ(relative_deviation(5, 5), 0);
}

TEST(Verifier, CsvExport) {
  const auto& m = acme().model;
  const auto csv = values_to_csv(m, evaluate_model(m), "Price");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "Sector,Product,Price");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
}

}  // namespace
}  // namespace dimbook
