#pragma once

// PLONKish constraint table: advice / fixed / instance columns, selector-gated
// gates, lookup arguments, randomized multiset permutation arguments and copy
// constraints, together with a direct satisfiability checker.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zkgraph/expr.hpp"
#include "zkgraph/field.hpp"
#include "zkgraph/sha256.hpp"

namespace zkgraph {

inline constexpr size_t kFullExtent = std::numeric_limits<size_t>::max();
inline constexpr int kMaxRotation = 2;
inline constexpr int kMaxGateDegree = 5;
inline constexpr size_t kMaxLookupArity = 4;

struct ColumnDecl {
  ColumnId id;
  std::string name;
  // Phase-2 advice columns (running products) are filled after the
  // challenges have been derived from the phase-1 commitments.
  uint8_t phase = 1;
  // Rows [0, extent) carry data; the rest are zero and not part of the
  // witness. kFullExtent means the whole table height.
  size_t extent = kFullExtent;
};

struct Gate {
  std::string name;
  ColumnId selector;
  Expr poly;
};

// One source of lookup-table tuples: either a set of columns (optionally
// restricted to rows where `selector` is non-zero) or a fixed table.
struct TableSource {
  std::vector<ColumnId> columns;
  std::optional<ColumnId> selector;
  std::optional<size_t> fixed_table;
};

// Each active input tuple must occur in the union of the table sources. A row
// is active when `selector` is absent or evaluates to non-zero.
struct LookupDecl {
  std::string name;
  std::vector<Expr> inputs;
  std::vector<TableSource> tables;
  std::optional<Expr> selector;
};

// Public lookup table stored outside the row grid. A range table holds the
// single-column values [0, range_bound).
struct FixedTable {
  std::string name;
  size_t arity = 1;
  uint64_t range_bound = 0;
  std::vector<std::vector<Fe>> rows;

  bool is_range() const { return range_bound != 0; }
  size_t size() const { return is_range() ? range_bound : rows.size(); }
};

// Multiset equality between the compressed left tuples and the compressed
// right tuples on selected rows, witnessed by the running-product column z.
struct PermutationDecl {
  std::string name;
  std::vector<ColumnId> left;
  std::vector<ColumnId> right;
  std::optional<ColumnId> left_selector;
  std::optional<ColumnId> right_selector;
  ColumnId z;
};

struct CellRef {
  ColumnId column;
  size_t row = 0;
};

struct CopyConstraint {
  CellRef a;
  CellRef b;
};

// An advice cell that must equal a public instance cell.
struct InstanceBinding {
  CellRef cell;
  CellRef instance;
};

struct CircuitSpec {
  std::vector<ColumnDecl> columns;
  std::vector<Gate> gates;
  std::vector<LookupDecl> lookups;
  std::vector<PermutationDecl> perms;
  std::vector<CopyConstraint> copies;
  std::vector<InstanceBinding> instance_bindings;
  std::vector<FixedTable> fixed_tables;
};

class ConstraintTable {
 public:
  size_t n_rows() const { return n_rows_; }
  const CircuitSpec& spec() const { return spec_; }

  bool has_column(ColumnId id) const;
  const ColumnDecl& decl(ColumnId id) const;
  // Effective extent (clamped to n_rows).
  size_t extent(ColumnId id) const;
  std::span<const Fe> column(ColumnId id) const;
  Fe cell(ColumnId id, size_t row) const { return column(id)[row]; }

  // Writes values from row 0; remaining rows keep their content.
  // Errors: UnknownColumn, TooManyRows (values longer than the extent).
  void assign_column(ColumnId id, std::span<const Fe> values);
  void set_cell(ColumnId id, size_t row, Fe value);

  const std::vector<Fe>& challenges() const { return challenges_; }
  void set_challenges(std::vector<Fe> challenges) { challenges_ = std::move(challenges); }

  // Declaration-order position of a column.
  size_t position(ColumnId id) const;

 private:
  friend ConstraintTable build_table(CircuitSpec spec, size_t n_rows);

  size_t n_rows_ = 0;
  CircuitSpec spec_;
  std::map<ColumnId, size_t> index_;
  std::vector<std::vector<Fe>> values_;
  std::vector<Fe> challenges_;
};

// Errors: RowsNotPowerOfTwo, UnknownColumn, BadArity, BadDeclaration.
ConstraintTable build_table(CircuitSpec spec, size_t n_rows);

enum class FailureKind : uint8_t { Gate, Lookup, Permutation, Copy, Instance };
std::string_view to_string(FailureKind kind);

struct Failure {
  FailureKind kind;
  size_t index = 0;
  size_t row = 0;
  std::string detail;
};

struct VerdictReport {
  bool satisfied = true;
  std::vector<Failure> failures;

  std::string serialize() const;
};

// Evaluates every gate, lookup, permutation, copy constraint and instance
// binding. Never stops at the first failure. Failures are ordered by
// (kind, constraint index, row). Errors: ChallengesMissing.
VerdictReport check_satisfied(const ConstraintTable& table);

// Per-column hash commitments in declaration order:
// SHA-256(0x01 || kind || index_u16_le || cells as 8-byte LE).
std::vector<Digest> commit_columns(const ConstraintTable& table);
// Commitments of the columns of the given phase, in declaration order.
std::vector<Digest> commit_phase(const ConstraintTable& table, uint8_t phase);
Digest commit_column(const ConstraintTable& table, ColumnId id);

// Per-tuple compression sum_j alpha^j * column_j over all rows.
std::vector<Fe> compress_columns(const ConstraintTable& table,
                                 std::span<const ColumnId> columns, Fe alpha);

// z[0] = 1, z[i+1] = z[i] * (c1[i] + beta) / (c2[i] + beta); length n + 1.
// Errors: BadArity (length mismatch), DivisionByZeroDenominator.
std::vector<Fe> build_running_product(std::span<const Fe> c1,
                                      std::span<const Fe> c2, Fe beta);

// Fills every permutation's z column from the table's challenges.
// Errors: ChallengesMissing, DivisionByZeroDenominator.
void fill_running_products(ConstraintTable& table);

}  // namespace zkgraph
