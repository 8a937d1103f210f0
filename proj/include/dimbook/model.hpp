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

// Model intermediate representation: dimensions, dimension sets, variables
// with formulas, and dense data tables. Everything here is immutable once a
// model has been loaded.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace dimbook {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SourceSpan {
  std::string file;
  int line = 1;
  int column = 1;
};

struct Member {
  std::string code;
  std::string label;
};

struct Dimension {
  std::string name;
  char initial = '?';
  std::vector<Member> members;

  std::optional<std::size_t> member_index(std::string_view code) const;
};

// A subset of the model's dimensions. Dimensions are identified by their
// declaration index, so the bit order is the canonical order and two sets
// built in different orders compare equal.
class DimensionSet {
 public:
  static constexpr std::size_t kMaxDimensions = 64;

  constexpr DimensionSet() = default;
  static DimensionSet of(std::initializer_list<std::size_t> dims);
  static constexpr DimensionSet from_bits(std::uint64_t bits) {
    DimensionSet s;
    s.bits_ = bits;
    return s;
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  bool contains(std::size_t dim) const { return (bits_ >> dim) & 1U; }
  DimensionSet with(std::size_t dim) const;

  /// Dimension indices in canonical order.
  std::vector<std::size_t> dims() const;

  friend constexpr bool operator==(DimensionSet, DimensionSet) = default;
  friend constexpr bool operator<(DimensionSet a, DimensionSet b) {
    return a.bits_ < b.bits_;
  }

 private:
  std::uint64_t bits_ = 0;
};

DimensionSet dimset_union(DimensionSet a, DimensionSet b);
bool dimset_is_subset(DimensionSet a, DimensionSet b);
inline bool dimset_is_proper_subset(DimensionSet a, DimensionSet b) {
  return a != b && dimset_is_subset(a, b);
}

/// Member indices, one per dimension of the owning set, canonical order.
using Tuple = std::vector<std::size_t>;

/// Keeps the members of `tuple` (a tuple of `from`) that belong to `onto`.
/// Throws ModelError when `onto` is not a subset of `from`.
Tuple project_tuple(const Tuple& tuple, DimensionSet from, DimensionSet onto);

// ---------------------------------------------------------------------------
// Expressions

enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Literal {
  double value = 0.0;
};
struct VarRef {
  std::string name;
};
struct Negate {
  ExprPtr operand;
};
struct Binary {
  BinaryOp op = BinaryOp::Add;
  ExprPtr lhs;
  ExprPtr rhs;
};
/// Whole-formula aggregate over the operand's extra dimensions.
struct Sum {
  std::string name;
};

struct Expr {
  std::variant<Literal, VarRef, Negate, Binary, Sum> node;
};

ExprPtr make_literal(double value);
ExprPtr make_ref(std::string name);
ExprPtr make_negate(ExprPtr operand);
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_sum(std::string name);

bool expr_equal(const Expr& a, const Expr& b);
bool is_aggregate(const Expr& e);

/// Distinct variable references in order of first appearance.
std::vector<std::string> referenced_variables(const Expr& e);

char binary_op_symbol(BinaryOp op);

// ---------------------------------------------------------------------------
// Variables and data

enum class VariableKind { Input, Data, Calculated, Output };

const char* to_string(VariableKind kind);
inline bool carries_values(VariableKind k) {
  return k == VariableKind::Input || k == VariableKind::Data;
}

enum class NumberFormat { General, Decimal2, Currency, Percent };

const char* to_string(NumberFormat f);

struct Variable {
  std::string name;
  VariableKind kind = VariableKind::Calculated;
  DimensionSet dimset;
  ExprPtr formula;  // null for Input/Data
  std::optional<NumberFormat> number_format;
  /// Inline scalar value for dimensionless Input/Data variables.
  std::optional<double> inline_value;
  SourceSpan span;
};

struct DataColumn {
  std::string variable;
  /// One value per tuple, in enumeration order of the table's set.
  std::vector<double> values;
};

struct DataTable {
  DimensionSet dimset;
  std::vector<DataColumn> columns;

  const DataColumn* column(std::string_view variable) const;
};

class Model {
 public:
  std::vector<Dimension> dimensions;
  std::vector<Variable> variables;
  std::vector<DataTable> tables;
  /// Data files named by the model source, relative to its directory.
  std::vector<std::string> table_paths;
  std::string source_name;

  std::optional<std::size_t> dimension_index(std::string_view name) const;
  std::optional<std::size_t> variable_index(std::string_view name) const;
  const Variable& variable(std::string_view name) const;
  const DataTable* table(DimensionSet set) const;

  /// Number of members per dimension of `set`, canonical order.
  std::vector<std::size_t> radices(DimensionSet set) const;
  std::size_t cardinality(DimensionSet set) const;

  /// Canonical full name, e.g. "Month-Sector-Product".
  std::string dimset_name(DimensionSet set) const;
  /// Concatenated initials, e.g. "MSP".
  std::string dimset_initials(DimensionSet set) const;

  std::vector<std::string> member_codes(DimensionSet set,
                                        const Tuple& tuple) const;

  /// Parses "Month-Sector" style lists; throws ModelError on unknown names.
  DimensionSet parse_dimset(std::string_view text) const;

  /// Must be called after mutating dimensions/variables.
  void reindex();

 private:
  std::unordered_map<std::string, std::size_t> var_index_;
};

/// Value of the formula's dimension set: the union of operand sets for
/// ordinary formulas. For SUM(v) the operand's set is returned with
/// `aggregate` set, because the result set cannot be inferred.
struct InferredDimset {
  DimensionSet dimset;
  bool aggregate = false;
};

InferredDimset infer_dimset(const Expr& formula, const Model& model);

/// Structural validation: references resolve, kinds carry formulas or
/// values as required. Returns human-readable problems (empty = valid).
std::vector<std::string> validate_model(const Model& model);

/// Ordinal of `tuple` in enumeration order (last dimension fastest).
std::size_t tuple_ordinal(const std::vector<std::size_t>& radices,
                          const Tuple& tuple);
Tuple tuple_at(const std::vector<std::size_t>& radices, std::size_t ordinal);

/// Maps ordinals of a host set onto ordinals of a subset.
class Projector {
 public:
  Projector(const Model& model, DimensionSet host, DimensionSet onto);
  std::size_t operator()(std::size_t host_ordinal) const;

 private:
  // For each host dimension (slowest first): divisor in the host ordinal and
  // stride in the target ordinal (0 when dropped).
  std::vector<std::size_t> host_radix_;
  std::vector<std::size_t> target_stride_;
};

/// Returns a copy of `model` with a new member appended to `dimension`,
/// every data column extended by copying the values of `clone_from`.
Model with_member_added(const Model& model, std::string_view dimension,
                        const Member& member, std::string_view clone_from);

/// Returns a copy with the member removed from the dimension and its data.
Model with_member_removed(const Model& model, std::string_view dimension,
                          std::string_view code);

}  // namespace dimbook
