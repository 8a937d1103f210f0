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

// Static analysis of a loaded model: the variable dependency graph,
// dimension-set rules, worksheet assignment, key planning and the impact of
// changing a dimension's member count.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dimbook/model.hpp"
#include "dimbook/parser.hpp"

namespace dimbook {

/// Edge u -> v when v's formula references u. Indices are variable indices.
struct DependencyGraph {
  std::vector<std::vector<std::size_t>> dependencies;
  std::vector<std::vector<std::size_t>> dependents;
  std::vector<std::size_t> order;  // topological; empty when cyclic
  std::vector<std::size_t> cycle;  // one cycle, when there is one

  bool acyclic() const { return cycle.empty(); }
};

DependencyGraph build_graph(const Model& model);
std::vector<Diagnostic> graph_diagnostics(const Model& model,
                                          const DependencyGraph& graph);

/// Declared sets against inferred sets, aggregate subset rule, and
/// same-sheet forward references. Empty result means valid.
std::vector<Diagnostic> check_dimensions(const Model& model);

enum class SheetRole { Data, Model, Management, Interface };

struct SheetPlan {
  std::string name;
  SheetRole role = SheetRole::Model;
  DimensionSet dimset;
  std::vector<std::size_t> variables;  // Formula List order
};

struct WorksheetPlan {
  std::vector<SheetPlan> data_sheets;   // order of first data variable
  std::vector<SheetPlan> model_sheets;  // order of first calculated variable
  std::string management_sheet = "Management";
  std::string interface_sheet = "Interface";

  const SheetPlan* data_sheet(DimensionSet set) const;
  const SheetPlan* model_sheet(DimensionSet set) const;
  /// Sheet holding the set's key rows: its data sheet, else its model sheet.
  const SheetPlan* key_owner(DimensionSet set) const;
  /// Data sheets then model sheets.
  std::vector<const SheetPlan*> all() const;
};

WorksheetPlan assign_worksheets(const Model& model);

struct PrimaryKey {
  DimensionSet dimset;
  std::string name;
};

struct ForeignKey {
  DimensionSet referenced;
  DimensionSet host;
  std::string name;
  bool from_aggregate = false;
  std::vector<std::size_t> provoking;  // variable indices
};

struct KeyPlan {
  std::vector<PrimaryKey> primary_keys;
  std::vector<ForeignKey> foreign_keys;

  const PrimaryKey* primary(DimensionSet set) const;
  const ForeignKey* foreign(DimensionSet referenced, DimensionSet host) const;
  std::vector<const ForeignKey*> hosted_by(DimensionSet host) const;
};

/// Primary keys for every variable set (plus single-dimension keys needed
/// by the management counts); foreign keys per (referenced, host) pair.
KeyPlan derive_keys(const Model& model);

struct SheetImpact {
  std::string sheet;
  std::size_t old_columns = 0;
  std::size_t new_columns = 0;
};

struct ImpactReport {
  std::string dimension;
  std::size_t old_members = 0;
  std::size_t new_members = 0;
  std::vector<SheetImpact> sheets;
  /// Aggregates whose source set contains the dimension but whose own set
  /// does not. Their source rows widen; the formulas stay unchanged.
  std::vector<std::string> widened_aggregates;
};

/// Throws ModelError for an unknown dimension.
ImpactReport impact_of_member_change(const Model& model, std::string_view dimension,
                                     std::size_t new_member_count);

std::string impact_to_text(const ImpactReport& report);
std::string impact_to_json(const ImpactReport& report);

/// Everything codegen needs, computed once.
struct Analysis {
  DependencyGraph graph;
  WorksheetPlan plan;
  KeyPlan keys;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return !has_errors(diagnostics); }
};

Analysis analyze(const Model& model);

}  // namespace dimbook
