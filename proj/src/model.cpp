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

#include "dimbook/model.hpp"

#include <algorithm>
#include <bit>
#include <functional>

namespace dimbook {

std::optional<std::size_t> Dimension::member_index(std::string_view code) const {
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i].code == code) return i;
  }
  return std::nullopt;
}

DimensionSet DimensionSet::of(std::initializer_list<std::size_t> dims) {
  DimensionSet s;
  for (auto d : dims) s = s.with(d);
  return s;
}

std::size_t DimensionSet::size() const {
  return static_cast<std::size_t>(std::popcount(bits_));
}

DimensionSet DimensionSet::with(std::size_t dim) const {
  if (dim >= kMaxDimensions) throw ModelError("too many dimensions");
  return from_bits(bits_ | (std::uint64_t{1} << dim));
}

std::vector<std::size_t> DimensionSet::dims() const {
  std::vector<std::size_t> out;
  for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(b)));
  }
  return out;
}

DimensionSet dimset_union(DimensionSet a, DimensionSet b) {
  return DimensionSet::from_bits(a.bits() | b.bits());
}

bool dimset_is_subset(DimensionSet a, DimensionSet b) {
  return (a.bits() & ~b.bits()) == 0;
}

Tuple project_tuple(const Tuple& tuple, DimensionSet from, DimensionSet onto) {
  if (!dimset_is_subset(onto, from)) {
    throw ModelError("projection target is not a subset of the tuple's set");
  }
  const auto dims = from.dims();
  if (dims.size() != tuple.size()) {
    throw ModelError("tuple arity does not match its dimension set");
  }
  Tuple out;
  out.reserve(onto.size());
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (onto.contains(dims[i])) out.push_back(tuple[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------

ExprPtr make_literal(double value) {
  return std::make_shared<const Expr>(Expr{Literal{value}});
}
ExprPtr make_ref(std::string name) {
  return std::make_shared<const Expr>(Expr{VarRef{std::move(name)}});
}
ExprPtr make_negate(ExprPtr operand) {
  return std::make_shared<const Expr>(Expr{Negate{std::move(operand)}});
}
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<const Expr>(
      Expr{Binary{op, std::move(lhs), std::move(rhs)}});
}
ExprPtr make_sum(std::string name) {
  return std::make_shared<const Expr>(Expr{Sum{std::move(name)}});
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& lhs) -> bool {
        using T = std::decay_t<decltype(lhs)>;
        const auto& rhs = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Literal>) {
          return lhs.value == rhs.value;
        } else if constexpr (std::is_same_v<T, VarRef> ||
                             std::is_same_v<T, Sum>) {
          return lhs.name == rhs.name;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return expr_equal(*lhs.operand, *rhs.operand);
        } else {
          return lhs.op == rhs.op && expr_equal(*lhs.lhs, *rhs.lhs) &&
                 expr_equal(*lhs.rhs, *rhs.rhs);
        }
      },
      a.node);
}

bool is_aggregate(const Expr& e) { return std::holds_alternative<Sum>(e.node); }

std::vector<std::string> referenced_variables(const Expr& e) {
  std::vector<std::string> out;
  auto add = [&](const std::string& n) {
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  };
  std::function<void(const Expr&)> walk = [&](const Expr& x) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, VarRef> || std::is_same_v<T, Sum>) {
            add(n.name);
          } else if constexpr (std::is_same_v<T, Negate>) {
            walk(*n.operand);
          } else if constexpr (std::is_same_v<T, Binary>) {
            walk(*n.lhs);
            walk(*n.rhs);
          }
        },
        x.node);
  };
  walk(e);
  return out;
}

char binary_op_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return '+';
    case BinaryOp::Sub: return '-';
    case BinaryOp::Mul: return '*';
    case BinaryOp::Div: return '/';
    case BinaryOp::Pow: return '^';
  }
  return '?';
}

const char* to_string(VariableKind kind) {
  switch (kind) {
    case VariableKind::Input: return "input";
    case VariableKind::Data: return "data";
    case VariableKind::Calculated: return "calc";
    case VariableKind::Output: return "output";
  }
  return "?";
}

const char* to_string(NumberFormat f) {
  switch (f) {
    case NumberFormat::General: return "general";
    case NumberFormat::Decimal2: return "decimal";
    case NumberFormat::Currency: return "currency";
    case NumberFormat::Percent: return "percent";
  }
  return "?";
}

const DataColumn* DataTable::column(std::string_view variable) const {
  for (const auto& c : columns) {
    if (c.variable == variable) return &c;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

std::optional<std::size_t> Model::dimension_index(std::string_view name) const {
  for (std::size_t i = 0; i < dimensions.size(); ++i) {
    if (dimensions[i].name == name) return i;
  }
  return std::nullopt;
}

void Model::reindex() {
  var_index_.clear();
  for (std::size_t i = 0; i < variables.size(); ++i) {
    var_index_.emplace(variables[i].name, i);
  }
}

std::optional<std::size_t> Model::variable_index(std::string_view name) const {
  if (var_index_.size() != variables.size()) {
    // Model built by hand without reindex(): fall back to a scan.
    for (std::size_t i = 0; i < variables.size(); ++i) {
      if (variables[i].name == name) return i;
    }
    return std::nullopt;
  }
  auto it = var_index_.find(std::string(name));
  if (it == var_index_.end()) return std::nullopt;
  return it->second;
}

const Variable& Model::variable(std::string_view name) const {
  auto idx = variable_index(name);
  if (!idx) throw ModelError("unknown variable '" + std::string(name) + "'");
  return variables[*idx];
}

const DataTable* Model::table(DimensionSet set) const {
  for (const auto& t : tables) {
    if (t.dimset == set) return &t;
  }
  return nullptr;
}

std::vector<std::size_t> Model::radices(DimensionSet set) const {
  std::vector<std::size_t> out;
  for (auto d : set.dims()) out.push_back(dimensions.at(d).members.size());
  return out;
}

std::size_t Model::cardinality(DimensionSet set) const {
  std::size_t n = 1;
  for (auto r : radices(set)) n *= r;
  return n;
}

std::string Model::dimset_name(DimensionSet set) const {
  std::string out;
  for (auto d : set.dims()) {
    if (!out.empty()) out += '-';
    out += dimensions.at(d).name;
  }
  return out;
}

std::string Model::dimset_initials(DimensionSet set) const {
  std::string out;
  for (auto d : set.dims()) out += dimensions.at(d).initial;
  return out;
}

std::vector<std::string> Model::member_codes(DimensionSet set,
                                             const Tuple& tuple) const {
  const auto dims = set.dims();
  std::vector<std::string> out;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    out.push_back(dimensions.at(dims[i]).members.at(tuple.at(i)).code);
  }
  return out;
}

DimensionSet Model::parse_dimset(std::string_view text) const {
  DimensionSet set;
  if (text.empty()) return set;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('-', start);
    if (end == std::string_view::npos) end = text.size();
    auto name = text.substr(start, end - start);
    auto idx = dimension_index(name);
    if (!idx) throw ModelError("unknown dimension '" + std::string(name) + "'");
    if (set.contains(*idx)) {
      throw ModelError("dimension '" + std::string(name) + "' repeated");
    }
    set = set.with(*idx);
    start = end + 1;
  }
  return set;
}

InferredDimset infer_dimset(const Expr& formula, const Model& model) {
  InferredDimset out;
  for (const auto& name : referenced_variables(formula)) {
    auto idx = model.variable_index(name);
    if (!idx) throw ModelError("unresolved variable reference '" + name + "'");
    out.dimset = dimset_union(out.dimset, model.variables[*idx].dimset);
  }
  out.aggregate = is_aggregate(formula);
  return out;
}

std::vector<std::string> validate_model(const Model& model) {
  std::vector<std::string> problems;
  for (const auto& v : model.variables) {
    if (carries_values(v.kind) && v.formula) {
      problems.push_back("'" + v.name + "' is " + to_string(v.kind) +
                         " and cannot carry a formula");
    }
    if (!carries_values(v.kind) && !v.formula) {
      problems.push_back("'" + v.name + "' is " + to_string(v.kind) +
                         " and needs a formula");
    }
    if (!v.formula) continue;
    for (const auto& ref : referenced_variables(*v.formula)) {
      if (!model.variable_index(ref)) {
        problems.push_back("'" + v.name + "' references undeclared variable '" +
                           ref + "'");
      }
    }
  }
  return problems;
}

std::size_t tuple_ordinal(const std::vector<std::size_t>& radices,
                          const Tuple& tuple) {
  std::size_t ord = 0;
  for (std::size_t i = 0; i < radices.size(); ++i) {
    ord = ord * radices[i] + tuple.at(i);
  }
  return ord;
}

Tuple tuple_at(const std::vector<std::size_t>& radices, std::size_t ordinal) {
  Tuple t(radices.size());
  for (std::size_t i = radices.size(); i-- > 0;) {
    t[i] = ordinal % radices[i];
    ordinal /= radices[i];
  }
  return t;
}

Projector::Projector(const Model& model, DimensionSet host, DimensionSet onto) {
  if (!dimset_is_subset(onto, host)) {
    throw ModelError("projection target is not a subset of the host set");
  }
  const auto dims = host.dims();
  host_radix_ = model.radices(host);
  target_stride_.assign(dims.size(), 0);
  std::size_t stride = 1;
  for (std::size_t i = dims.size(); i-- > 0;) {
    if (onto.contains(dims[i])) {
      target_stride_[i] = stride;
      stride *= host_radix_[i];
    }
  }
}

std::size_t Projector::operator()(std::size_t host_ordinal) const {
  std::size_t out = 0;
  for (std::size_t i = host_radix_.size(); i-- > 0;) {
    out += (host_ordinal % host_radix_[i]) * target_stride_[i];
    host_ordinal /= host_radix_[i];
  }
  return out;
}

namespace {

// Rebuilds every table containing `dim`; `source_member` maps a new member
// index of `dim` to the old member index whose values it takes.
Model remap_member_data(const Model& model, std::size_t dim, Dimension updated,
                        const std::function<std::size_t(std::size_t)>&
                            source_member) {
  Model out = model;
  out.dimensions[dim] = std::move(updated);
  for (auto& table : out.tables) {
    if (!table.dimset.contains(dim)) continue;
    const auto old_radices = model.radices(table.dimset);
    const auto new_radices = out.radices(table.dimset);
    const auto dims = table.dimset.dims();
    const auto pos = static_cast<std::size_t>(
        std::find(dims.begin(), dims.end(), dim) - dims.begin());
    const std::size_t count = out.cardinality(table.dimset);
    for (auto& col : table.columns) {
      std::vector<double> values(count);
      for (std::size_t ord = 0; ord < count; ++ord) {
        Tuple t = tuple_at(new_radices, ord);
        t[pos] = source_member(t[pos]);
        values[ord] = col.values.at(tuple_ordinal(old_radices, t));
      }
      col.values = std::move(values);
    }
  }
  out.reindex();
  return out;
}

}  // namespace

Model with_member_added(const Model& model, std::string_view dimension,
                        const Member& member, std::string_view clone_from) {
  auto dim = model.dimension_index(dimension);
  if (!dim) throw ModelError("unknown dimension '" + std::string(dimension) + "'");
  const Dimension& d = model.dimensions[*dim];
  auto src = d.member_index(clone_from);
  if (!src) {
    throw ModelError("unknown member '" + std::string(clone_from) + "' in " +
                     d.name);
  }
  if (d.member_index(member.code)) {
    throw ModelError("member '" + member.code + "' already exists in " + d.name);
  }
  Dimension updated = d;
  updated.members.push_back(member);
  const std::size_t old_count = d.members.size();
  return remap_member_data(model, *dim, std::move(updated),
                           [&](std::size_t m) { return m < old_count ? m : *src; });
}

Model with_member_removed(const Model& model, std::string_view dimension,
                          std::string_view code) {
  auto dim = model.dimension_index(dimension);
  if (!dim) throw ModelError("unknown dimension '" + std::string(dimension) + "'");
  const Dimension& d = model.dimensions[*dim];
  auto idx = d.member_index(code);
  if (!idx) {
    throw ModelError("unknown member '" + std::string(code) + "' in " + d.name);
  }
  if (d.members.size() == 1) {
    throw ModelError("cannot remove the last member of " + d.name);
  }
  Dimension updated = d;
  updated.members.erase(updated.members.begin() +
                        static_cast<std::ptrdiff_t>(*idx));
  const std::size_t removed = *idx;
  return remap_member_data(model, *dim, std::move(updated), [&](std::size_t m) {
    return m < removed ? m : m + 1;
  });
}

}  // namespace dimbook
