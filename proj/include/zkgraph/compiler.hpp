#pragma once

// Composition of a query plan into one constraint table.
//
// The database tables occupy the first regions. Every plan node then lays
// out its own region; inputs produced by earlier nodes are copied in with
// copy constraints. The final output is bound cell by cell to public
// instance columns, next to a header column holding the database commitment
// and the plan hash.

#include <array>
#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "zkgraph/builder.hpp"
#include "zkgraph/graph_store.hpp"
#include "zkgraph/ops/common.hpp"
#include "zkgraph/plan.hpp"
#include "zkgraph/transcript.hpp"

namespace zkgraph {

struct CompileOptions {
  // Row budgets of the node and edge tables; default next_pow2(count + 1).
  std::optional<size_t> node_budget;
  std::optional<size_t> edge_budget;
};

struct ResultTable {
  std::string op;
  std::vector<std::string> columns;
  std::vector<std::vector<Fe>> rows;
  std::vector<std::pair<std::string, Fe>> scalars;

  std::string to_string() const;
};

// Where the public result lives in the instance columns.
struct ResultShape {
  PlanOp op = PlanOp::ExpandSingle;
  std::vector<std::string> columns;
  // [segment][column]
  std::vector<std::vector<ColumnId>> cells;
  std::vector<std::pair<std::string, ColumnId>> scalars;
};

struct QueryLayout {
  ConstraintTable table;
  CostReport cost;
  Schema schema;
  size_t node_budget = 0;
  size_t edge_budget = 0;
  ops::DbLayout db;
  ColumnId header;
  ResultShape result;
  std::chrono::nanoseconds witness_time{0};
};

struct CompiledQuery {
  QueryLayout layout;
  Digest db_commitment{};
  Digest plan_hash{};
  Challenges challenges;
  ResultTable result;
};

inline constexpr size_t kHeaderRows = 16;

size_t default_budget(size_t native_rows);

// The 16 header cells: 4-byte little-endian limbs of the db commitment
// followed by those of the plan hash.
std::array<Fe, kHeaderRows> header_cells(const Digest& db_commitment, const Digest& plan_hash);

// Runs every operator natively, lays out the table, assigns the witness and
// derives challenges and running products. Errors: RowBudgetExceeded,
// UnboundInput, TypeMismatch, BadParameter and operator witness errors.
CompiledQuery compile_and_witness(const QueryPlan& plan, const GraphDb& db,
                                  const CompileOptions& options = {});

// Layout costs only; no witness is generated.
CostReport estimate(const QueryPlan& plan, const GraphDb& db,
                    const CompileOptions& options = {});

// The table structure a verifier rebuilds from public data alone; advice and
// instance columns are left empty.
QueryLayout layout_for_verify(const QueryPlan& plan, const Schema& schema, size_t node_budget,
                              size_t edge_budget);

ResultTable read_result(const ConstraintTable& table, const ResultShape& shape);

}  // namespace zkgraph
