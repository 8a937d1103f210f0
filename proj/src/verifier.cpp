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

#include "dimbook/verifier.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

#include "dimbook/analyzer.hpp"
#include "dimbook/keygen.hpp"
#include "dimbook/naming.hpp"

namespace dimbook {

const std::vector<CellValue>& ValueStore::of(const Model& model,
                                             std::string_view variable) const {
  auto idx = model.variable_index(variable);
  if (!idx || *idx >= values.size()) {
    throw ModelError("no values for '" + std::string(variable) + "'");
  }
  return values[*idx];
}

double ValueStore::number(const Model& model, std::string_view variable,
                          std::size_t ordinal) const {
  const CellValue& v = of(model, variable).at(ordinal);
  if (auto d = as_number(v)) return *d;
  throw ModelError("'" + std::string(variable) + "' #" + std::to_string(ordinal) +
                   " is " + to_display(v));
}

namespace {

class Oracle {
 public:
  explicit Oracle(const Model& model) : model_(model) {
    store_.values.resize(model.variables.size());
  }

  ValueStore run() {
    const DependencyGraph graph = build_graph(model_);
    if (!graph.acyclic()) throw ModelError("model has a circular definition");
    for (auto vi : graph.order) evaluate(vi);
    return std::move(store_);
  }

 private:
  void evaluate(std::size_t vi) {
    const Variable& v = model_.variables[vi];
    auto& out = store_.values[vi];
    const std::size_t n = model_.cardinality(v.dimset);
    if (!v.formula) {
      const DataTable* table = model_.table(v.dimset);
      const DataColumn* col = table ? table->column(v.name) : nullptr;
      if (!col || col->values.size() != n) {
        throw ModelError("no data bound for '" + v.name + "'");
      }
      out.assign(col->values.begin(), col->values.end());
      return;
    }
    if (const auto* sum = std::get_if<Sum>(&v.formula->node)) {
      const auto src = *model_.variable_index(sum->name);
      const Variable& sv = model_.variables[src];
      const Projector onto(model_, sv.dimset, v.dimset);
      std::vector<double> totals(n, 0.0);
      std::vector<std::optional<ErrorValue>> errors(n);
      const auto& in = store_.values[src];
      for (std::size_t s = 0; s < in.size(); ++s) {
        const std::size_t t = onto(s);
        if (errors[t]) continue;
        if (const auto* e = std::get_if<ErrorValue>(&in[s])) errors[t] = *e;
        else totals[t] += std::get<double>(in[s]);
      }
      out.resize(n);
      for (std::size_t t = 0; t < n; ++t) {
        out[t] = errors[t] ? CellValue{*errors[t]} : CellValue{totals[t]};
      }
      return;
    }
    std::map<std::string, std::pair<std::size_t, Projector>> operands;
    for (const auto& name : referenced_variables(*v.formula)) {
      const auto idx = *model_.variable_index(name);
      operands.emplace(name, std::make_pair(
                                 idx, Projector(model_, v.dimset, model_.variables[idx].dimset)));
    }
    out.resize(n);
    for (std::size_t t = 0; t < n; ++t) out[t] = eval(*v.formula, t, operands);
  }

  CellValue eval(const Expr& e, std::size_t t,
                 const std::map<std::string, std::pair<std::size_t, Projector>>& ops) const {
    return std::visit(
        [&](const auto& n) -> CellValue {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Literal>) {
            return n.value;
          } else if constexpr (std::is_same_v<T, VarRef>) {
            const auto& [idx, proj] = ops.at(n.name);
            return store_.values[idx][proj(t)];
          } else if constexpr (std::is_same_v<T, Negate>) {
            CellValue x = eval(*n.operand, t, ops);
            if (is_error(x)) return x;
            return -std::get<double>(x);
          } else if constexpr (std::is_same_v<T, Binary>) {
            CellValue l = eval(*n.lhs, t, ops);
            if (is_error(l)) return l;
            CellValue r = eval(*n.rhs, t, ops);
            if (is_error(r)) return r;
            return arith(binary_op_symbol(n.op), std::get<double>(l), std::get<double>(r));
          } else {
            throw ModelError("SUM must be the entire formula");
          }
        },
        e.node);
  }

  const Model& model_;
  ValueStore store_;
};

// Where a variable's values sit: the codegen layout when
// present, else from the defined names.
std::optional<VariableLayout> locate(const Model& model, const Workbook& wb,
                                     const Variable& v) {
  if (auto it = wb.layout.find(v.name); it != wb.layout.end()) return it->second;
  const NamedRange* n = wb.name(mangle_variable_name(v.name));
  if (!n) return std::nullopt;
  return VariableLayout{n->sheet, n->row, n->col ? *n->col : kFirstDataColumn,
                        model.cardinality(v.dimset)};
}

Deviation compare(std::string variable, std::size_t ordinal, std::string tuple,
                  SheetCell cell, const CellValue& oracle, const CellValue& got,
                  double tolerance) {
  Deviation d{std::move(variable), ordinal, std::move(tuple), std::move(cell), oracle, got,
              0, 0, false, false};
  const auto a = as_number(oracle);
  const auto b = as_number(got);
  if (a && b) {
    d.absolute = std::fabs(*a - *b);
    d.relative = relative_deviation(*a, *b);
    d.ok = d.relative <= tolerance;
  } else {
    d.ok = oracle == got;
    d.absolute = d.relative = d.ok ? 0 : std::numeric_limits<double>::infinity();
  }
  return d;
}

std::vector<ManagementCheck> management_flags(const Workbook& wb) {
  if (!wb.management_checks.empty()) return wb.management_checks;
  // Read back from a formula view: every IF(...,"OK","ERROR") cell.
  std::vector<ManagementCheck> out;
  const Sheet* s = wb.sheet("Management");
  if (!s) return out;
  for (const auto& [addr, cell] : s->cells()) {
    const std::string* f = cell.formula();
    if (!f || f->find("\"OK\"") == std::string::npos) continue;
    const Cell* label = s->at({addr.row, 1});
    const auto* text = label ? std::get_if<std::string>(&label->content) : nullptr;
    out.push_back({text ? *text : a1(addr), {s->name(), addr}});
  }
  return out;
}

}  // namespace

ValueStore evaluate_model(const Model& model) { return Oracle(model).run(); }

double relative_deviation(double a, double b) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  if (scale == 0) return 0;
  return std::fabs(a - b) / scale;
}

std::size_t CheckReport::failures() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.ok ? 0 : 1;
  for (const auto& f : management) n += f.ok ? 0 : 1;
  return n + missing.size() + cyclic.size();
}

const Deviation* CheckReport::worst() const {
  const Deviation* w = nullptr;
  for (const auto& e : entries) {
    if (!w || e.relative > w->relative) w = &e;
  }
  return w;
}

bool CheckReport::passed() const { return failures() == 0; }

CheckReport cross_check(const Model& model, const Workbook& wb, double tolerance) {
  const ValueStore oracle = evaluate_model(model);
  const WorkbookValues values = interpret_workbook(wb);
  return cross_check(model, wb, oracle, values, tolerance);
}

CheckReport cross_check(const Model& model, const Workbook& wb, const ValueStore& oracle,
                        const WorkbookValues& values, double tolerance) {
  CheckReport report;
  report.tolerance = tolerance;
  report.cyclic = values.cyclic();
  std::map<std::string, std::vector<std::string>> keys;
  auto key_of = [&](const Variable& v, std::size_t ordinal) -> std::string {
    if (v.dimset.empty()) return "";
    auto& k = keys[model.dimset_name(v.dimset)];
    if (k.empty()) k = primary_key_row(model, v.dimset).values;
    return k.at(ordinal);
  };

  for (std::size_t vi = 0; vi < model.variables.size(); ++vi) {
    const Variable& v = model.variables[vi];
    const auto where = locate(model, wb, v);
    if (!where || where->count != model.cardinality(v.dimset)) {
      report.missing.push_back(v.name);
      continue;
    }
    for (std::size_t t = 0; t < where->count; ++t) {
      const CellAddr at{where->row, where->first_col + t};
      report.entries.push_back(compare(v.name, t, key_of(v, t), {where->sheet, at},
                                       oracle.values[vi][t], values.at(where->sheet, at),
                                       tolerance));
    }
  }
  for (const auto& ic : wb.interface_cells) {
    auto vi = model.variable_index(ic.variable);
    if (!vi) {
      report.missing.push_back(ic.variable);
      continue;
    }
    Deviation d = compare(ic.variable, ic.ordinal, key_of(model.variables[*vi], ic.ordinal),
                          ic.cell, oracle.values[*vi].at(ic.ordinal),
                          values.at(ic.cell.sheet, ic.cell.addr), tolerance);
    d.interface = true;
    report.entries.push_back(std::move(d));
  }
  for (const auto& m : management_flags(wb)) {
    CellValue v = values.at(m.flag.sheet, m.flag.addr);
    const auto* s = std::get_if<std::string>(&v);
    report.management.push_back({m.label, m.flag, v, s && *s == "OK"});
  }
  return report;
}

namespace {

std::string describe(const Deviation& d) {
  std::ostringstream os;
  os << d.variable;
  if (!d.tuple.empty()) os << "[" << d.tuple << "]";
  os << " at " << quote_sheet_name(d.cell.sheet) << "!" << a1(d.cell.addr)
     << (d.interface ? " (interface)" : "") << ": oracle " << to_display(d.oracle)
     << ", workbook " << to_display(d.workbook);
  if (std::isfinite(d.relative)) os << ", relative deviation " << d.relative;
  return os.str();
}

}  // namespace

std::string report_to_text(const CheckReport& r, std::size_t max_failures) {
  std::ostringstream os;
  std::size_t model_cells = 0, interface_cells = 0;
  for (const auto& e : r.entries) (e.interface ? interface_cells : model_cells)++;
  os << "compared " << model_cells << " model cells and " << interface_cells
     << " interface cells at relative tolerance " << r.tolerance << "\n";
  if (const Deviation* w = r.worst()) {
    os << "worst relative deviation " << w->relative << " (" << w->variable;
    if (!w->tuple.empty()) os << "[" << w->tuple << "]";
    os << ")\n";
  }
  std::size_t flags_ok = 0;
  for (const auto& f : r.management) flags_ok += f.ok ? 1 : 0;
  os << "management flags OK: " << flags_ok << "/" << r.management.size() << "\n";
  std::size_t shown = 0;
  for (const auto& e : r.entries) {
    if (e.ok) continue;
    if (shown++ < max_failures) os << "MISMATCH " << describe(e) << "\n";
  }
  if (shown > max_failures) os << "... " << (shown - max_failures) << " more mismatches\n";
  for (const auto& f : r.management) {
    if (!f.ok) {
      os << "FLAG " << f.label << " at " << quote_sheet_name(f.cell.sheet) << "!"
         << a1(f.cell.addr) << " reads " << to_display(f.value) << "\n";
    }
  }
  for (const auto& m : r.missing) os << "MISSING no workbook row for " << m << "\n";
  for (const auto& c : r.cyclic) {
    os << "CYCLE " << quote_sheet_name(c.sheet) << "!" << a1(c.addr) << "\n";
  }
  os << (r.passed() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::string report_to_json(const CheckReport& r) {
  using nlohmann::json;
  auto value_json = [](const CellValue& v) -> json {
    if (auto d = as_number(v)) return *d;
    return to_display(v);
  };
  json out;
  out["passed"] = r.passed();
  out["tolerance"] = r.tolerance;
  out["compared"] = r.entries.size();
  if (const Deviation* w = r.worst()) {
    out["worst"] = {{"variable", w->variable},
                    {"tuple", w->tuple},
                    {"relative", std::isfinite(w->relative) ? json(w->relative) : json(nullptr)}};
  }
  json mismatches = json::array();
  for (const auto& e : r.entries) {
    if (e.ok) continue;
    mismatches.push_back({{"variable", e.variable},
                          {"tuple", e.tuple},
                          {"sheet", e.cell.sheet},
                          {"cell", a1(e.cell.addr)},
                          {"interface", e.interface},
                          {"oracle", value_json(e.oracle)},
                          {"workbook", value_json(e.workbook)},
                          {"absolute", std::isfinite(e.absolute) ? json(e.absolute) : json(nullptr)},
                          {"relative", std::isfinite(e.relative) ? json(e.relative) : json(nullptr)}});
  }
  out["mismatches"] = std::move(mismatches);
  json flags = json::array();
  for (const auto& f : r.management) {
    flags.push_back({{"label", f.label},
                     {"sheet", f.cell.sheet},
                     {"cell", a1(f.cell.addr)},
                     {"value", value_json(f.value)},
                     {"ok", f.ok}});
  }
  out["management"] = std::move(flags);
  out["missing"] = r.missing;
  json cycles = json::array();
  for (const auto& c : r.cyclic) cycles.push_back(c.sheet + "!" + a1(c.addr));
  out["cycles"] = std::move(cycles);
  return out.dump(2) + "\n";
}

std::string values_to_csv(const Model& model, const ValueStore& store,
                          std::string_view variable) {
  auto idx = model.variable_index(variable);
  if (!idx) throw ModelError("unknown variable '" + std::string(variable) + "'");
  const Variable& v = model.variables[*idx];
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      out += c;
      if (c == '"') out += '"';
    }
    return out + "\"";
  };
  std::ostringstream os;
  for (auto d : v.dimset.dims()) os << field(model.dimensions[d].name) << ",";
  os << field(v.name) << "\n";
  const auto tuples = enumerate_tuples(model, v.dimset);
  const auto dims = v.dimset.dims();
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    for (std::size_t i = 0; i < dims.size(); ++i) {
      os << field(model.dimensions[dims[i]].members[tuples[t][i]].code) << ",";
    }
    os << field(to_display(store.values[*idx][t])) << "\n";
  }
  return os.str();
}

}  // namespace dimbook
