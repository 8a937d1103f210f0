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

#include "dimbook/analyzer.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

#include "dimbook/naming.hpp"
#include "json.hpp"

namespace dimbook {

DependencyGraph build_graph(const Model& model) {
  const std::size_t n = model.variables.size();
  DependencyGraph g;
  g.dependencies.resize(n);
  g.dependents.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    const auto& var = model.variables[v];
    if (!var.formula) continue;
    for (const auto& ref : referenced_variables(*var.formula)) {
      auto u = model.variable_index(ref);
      if (!u) throw ModelError("unresolved variable reference '" + ref + "'");
      g.dependencies[v].push_back(*u);
      g.dependents[*u].push_back(v);
    }
  }

  // Kahn's algorithm; ties broken by declaration order.
  std::vector<std::size_t> indegree(n);
  for (std::size_t v = 0; v < n; ++v) indegree[v] = g.dependencies[v].size();
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push(v);
  }
  while (!ready.empty()) {
    const std::size_t u = ready.top();
    ready.pop();
    g.order.push_back(u);
    for (auto v : g.dependents[u]) {
      if (--indegree[v] == 0) ready.push(v);
    }
  }
  if (g.order.size() == n) return g;

  // Walk dependencies among the leftovers until a node repeats.
  std::vector<int> seen_at(n, -1);
  std::vector<std::size_t> path;
  std::size_t cur = n;
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] > 0) {
      cur = v;
      break;
    }
  }
  while (seen_at[cur] < 0) {
    seen_at[cur] = static_cast<int>(path.size());
    path.push_back(cur);
    for (auto u : g.dependencies[cur]) {
      if (indegree[u] > 0) {
        cur = u;
        break;
      }
    }
  }
  g.cycle.assign(path.begin() + seen_at[cur], path.end());
  std::reverse(g.cycle.begin(), g.cycle.end());
  g.order.clear();
  return g;
}

std::vector<Diagnostic> graph_diagnostics(const Model& model,
                                          const DependencyGraph& graph) {
  if (graph.acyclic()) return {};
  std::string names;
  for (auto v : graph.cycle) {
    if (!names.empty()) names += " -> ";
    names += "'" + model.variables[v].name + "'";
  }
  names += " -> '" + model.variables[graph.cycle.front()].name + "'";
  return {{Severity::Error, "cycle", "circular definition: " + names,
           model.variables[graph.cycle.front()].span}};
}

std::vector<Diagnostic> check_dimensions(const Model& model) {
  std::vector<Diagnostic> out;
  for (std::size_t i = 0; i < model.variables.size(); ++i) {
    const Variable& v = model.variables[i];
    if (!v.formula) continue;
    InferredDimset inferred;
    try {
      inferred = infer_dimset(*v.formula, model);
    } catch (const ModelError& e) {
      out.push_back({Severity::Error, "unresolved-reference", e.what(), v.span});
      continue;
    }
    if (inferred.aggregate) {
      if (!dimset_is_proper_subset(v.dimset, inferred.dimset)) {
        out.push_back({Severity::Error, "aggregate-set",
                       "'" + v.name + "': aggregate result must be a proper subset "
                       "of the summed variable's set (declared '" +
                           model.dimset_name(v.dimset) + "', summing over '" +
                           model.dimset_name(inferred.dimset) + "')",
                       v.span});
      }
    } else if (inferred.dimset != v.dimset) {
      out.push_back({Severity::Error, "dimension-mismatch",
                     "'" + v.name + "' is declared over '" +
                         model.dimset_name(v.dimset) +
                         "' but its formula yields '" +
                         model.dimset_name(inferred.dimset) + "'",
                     v.span});
    }
    for (const auto& ref : referenced_variables(*v.formula)) {
      auto u = model.variable_index(ref);
      if (!u || *u <= i) continue;
      const Variable& operand = model.variables[*u];
      if (operand.dimset == v.dimset && !carries_values(operand.kind)) {
        out.push_back({Severity::Warning, "forward-reference",
                       "'" + v.name + "' uses '" + operand.name +
                           "', which is defined later on the same sheet",
                       v.span});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

const SheetPlan* WorksheetPlan::data_sheet(DimensionSet set) const {
  for (const auto& s : data_sheets) {
    if (s.dimset == set) return &s;
  }
  return nullptr;
}

const SheetPlan* WorksheetPlan::model_sheet(DimensionSet set) const {
  for (const auto& s : model_sheets) {
    if (s.dimset == set) return &s;
  }
  return nullptr;
}

const SheetPlan* WorksheetPlan::key_owner(DimensionSet set) const {
  if (const auto* d = data_sheet(set)) return d;
  return model_sheet(set);
}

std::vector<const SheetPlan*> WorksheetPlan::all() const {
  std::vector<const SheetPlan*> out;
  for (const auto& s : data_sheets) out.push_back(&s);
  for (const auto& s : model_sheets) out.push_back(&s);
  return out;
}

WorksheetPlan assign_worksheets(const Model& model) {
  WorksheetPlan plan;
  for (std::size_t i = 0; i < model.variables.size(); ++i) {
    const Variable& v = model.variables[i];
    const bool data = carries_values(v.kind);
    auto& sheets = data ? plan.data_sheets : plan.model_sheets;
    auto it = std::find_if(sheets.begin(), sheets.end(),
                           [&](const SheetPlan& s) { return s.dimset == v.dimset; });
    if (it == sheets.end()) {
      sheets.push_back({sheet_name(model, v.dimset, data),
                        data ? SheetRole::Data : SheetRole::Model, v.dimset, {}});
      it = sheets.end() - 1;
    }
    it->variables.push_back(i);
  }
  return plan;
}

// ---------------------------------------------------------------------------

const PrimaryKey* KeyPlan::primary(DimensionSet set) const {
  for (const auto& k : primary_keys) {
    if (k.dimset == set) return &k;
  }
  return nullptr;
}

const ForeignKey* KeyPlan::foreign(DimensionSet referenced, DimensionSet host) const {
  for (const auto& k : foreign_keys) {
    if (k.referenced == referenced && k.host == host) return &k;
  }
  return nullptr;
}

std::vector<const ForeignKey*> KeyPlan::hosted_by(DimensionSet host) const {
  std::vector<const ForeignKey*> out;
  for (const auto& k : foreign_keys) {
    if (k.host == host) out.push_back(&k);
  }
  return out;
}

KeyPlan derive_keys(const Model& model) {
  KeyPlan plan;
  auto add_pk = [&](DimensionSet s) {
    if (s.empty() || plan.primary(s)) return;
    plan.primary_keys.push_back({s, primary_key_name(model, s)});
  };
  auto add_fk = [&](DimensionSet referenced, DimensionSet host, bool aggregate,
                    std::size_t var) {
    for (auto& k : plan.foreign_keys) {
      if (k.referenced == referenced && k.host == host) {
        k.provoking.push_back(var);
        return;
      }
    }
    plan.foreign_keys.push_back({referenced, host,
                                 foreign_key_name(model, referenced, host),
                                 aggregate, {var}});
  };

  for (const auto& v : model.variables) add_pk(v.dimset);
  std::vector<DimensionSet> sets;
  for (const auto& k : plan.primary_keys) sets.push_back(k.dimset);
  for (auto s : sets) {
    for (auto d : s.dims()) add_pk(DimensionSet::of({d}));
  }

  for (std::size_t i = 0; i < model.variables.size(); ++i) {
    const Variable& v = model.variables[i];
    if (!v.formula) continue;
    if (const auto* sum = std::get_if<Sum>(&v.formula->node)) {
      const DimensionSet source = model.variable(sum->name).dimset;
      if (!v.dimset.empty()) add_fk(v.dimset, source, true, i);
      continue;
    }
    for (const auto& ref : referenced_variables(*v.formula)) {
      const DimensionSet operand = model.variable(ref).dimset;
      if (!operand.empty() && dimset_is_proper_subset(operand, v.dimset)) {
        add_fk(operand, v.dimset, false, i);
      }
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------

ImpactReport impact_of_member_change(const Model& model, std::string_view dimension,
                                     std::size_t new_member_count) {
  auto dim = model.dimension_index(dimension);
  if (!dim) throw ModelError("unknown dimension '" + std::string(dimension) + "'");
  ImpactReport r;
  r.dimension = model.dimensions[*dim].name;
  r.old_members = model.dimensions[*dim].members.size();
  r.new_members = new_member_count;

  const WorksheetPlan plan = assign_worksheets(model);
  for (const SheetPlan* s : plan.all()) {
    if (!s->dimset.contains(*dim)) continue;
    const std::size_t old_cols = model.cardinality(s->dimset);
    r.sheets.push_back({s->name, old_cols, old_cols / r.old_members * new_member_count});
  }
  for (const auto& v : model.variables) {
    if (!v.formula) continue;
    const auto* sum = std::get_if<Sum>(&v.formula->node);
    if (!sum) continue;
    const DimensionSet source = model.variable(sum->name).dimset;
    if (source.contains(*dim) && !v.dimset.contains(*dim)) {
      r.widened_aggregates.push_back(v.name);
    }
  }
  return r;
}

std::string impact_to_text(const ImpactReport& r) {
  std::ostringstream os;
  os << "Changing " << r.dimension << " from " << r.old_members << " to "
     << r.new_members << " members\n";
  if (r.sheets.empty()) os << "  no sheet is indexed by " << r.dimension << "\n";
  std::size_t width = 5;
  for (const auto& s : r.sheets) width = std::max(width, s.sheet.size());
  for (const auto& s : r.sheets) {
    os << "  " << s.sheet << std::string(width - s.sheet.size() + 2, ' ')
       << s.old_columns << " -> " << s.new_columns << " columns";
    if (s.new_columns > s.old_columns) {
      os << " (add " << s.new_columns - s.old_columns << ")";
    } else if (s.new_columns < s.old_columns) {
      os << " (remove " << s.old_columns - s.new_columns << ")";
    }
    os << "\n";
  }
  if (!r.widened_aggregates.empty()) {
    os << "Aggregation blocks whose source rows change width "
          "(copy the columns, formulas stay as they are):\n";
    for (const auto& v : r.widened_aggregates) os << "  " << v << "\n";
  }
  return os.str();
}

std::string impact_to_json(const ImpactReport& r) {
  nlohmann::json j;
  j["dimension"] = r.dimension;
  j["old_members"] = r.old_members;
  j["new_members"] = r.new_members;
  j["sheets"] = nlohmann::json::array();
  for (const auto& s : r.sheets) {
    j["sheets"].push_back(
        {{"sheet", s.sheet}, {"old_cols", s.old_columns}, {"new_cols", s.new_columns}});
  }
  j["widened_aggregates"] = r.widened_aggregates;
  return j.dump(2);
}

Analysis analyze(const Model& model) {
  Analysis a;
  for (const auto& problem : validate_model(model)) {
    a.diagnostics.push_back({Severity::Error, "invalid-model", problem,
                             {model.source_name, 1, 1}});
  }
  if (!a.ok()) return a;
  a.graph = build_graph(model);
  auto g = graph_diagnostics(model, a.graph);
  a.diagnostics.insert(a.diagnostics.end(), g.begin(), g.end());
  auto d = check_dimensions(model);
  a.diagnostics.insert(a.diagnostics.end(), d.begin(), d.end());
  a.plan = assign_worksheets(model);
  std::set<std::string> names;
  for (const SheetPlan* s : a.plan.all()) {
    if (!names.insert(to_lower(s->name)).second ||
        to_lower(s->name) == to_lower(a.plan.management_sheet) ||
        to_lower(s->name) == to_lower(a.plan.interface_sheet)) {
      a.diagnostics.push_back({Severity::Error, "sheet-collision",
                               "two worksheets would be named '" + s->name + "'",
                               {model.source_name, 1, 1}});
    }
  }
  if (a.ok()) a.keys = derive_keys(model);
  return a;
}

}  // namespace dimbook
