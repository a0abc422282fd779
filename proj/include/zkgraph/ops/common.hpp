#pragma once

// Types shared by the operator circuits.
//
// Operators exchange relations. A relation is a list of segments; each
// segment is a group of equally long columns (one per relation attribute).
// An edge relation over an undirected kind has two segments, one per
// orientation, that share the same underlying columns. Rows whose first
// column is 0 are dummies.

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "zkgraph/builder.hpp"
#include "zkgraph/graph_store.hpp"

namespace zkgraph::ops {

enum class RelKind : uint8_t { Edges, Nodes };

struct Segment {
  std::vector<ColumnId> cols;
  size_t extent = 0;
  // Witness values, one vector of `extent` cells per column. Empty when the
  // layout is built without a witness.
  std::vector<std::vector<Fe>> data;
};

struct Relation {
  RelKind kind = RelKind::Edges;
  std::vector<std::string> names;
  std::vector<Segment> segments;
  // Rows of each segment before padding, as used by the cost model.
  size_t native_rows = 0;
  bool from_db = false;

  std::optional<size_t> column(std::string_view name) const;
  // Column holding node ids: "dst" for edge relations, "id" for node
  // relations.
  size_t id_column() const;
  bool has_data() const { return !segments.empty() && !segments[0].data.empty(); }
};

struct DbLayout {
  size_t node_budget = 0;
  size_t edge_budget = 0;
  ColumnId nid;
  std::vector<ColumnId> node_props;
  bool has_edges = false;
  ColumnId src, dst;
  std::vector<ColumnId> edge_props;
  bool has_csr = false;
  ColumnId rowp, col;
  std::vector<ColumnId> csr_vals;
};

// Per-compilation state shared by all operators.
struct OpContext {
  CircuitBuilder& b;
  Schema schema;
  // Available when proving or estimating; null when re-laying the circuit
  // for verification.
  const GraphDb* db = nullptr;
  DbLayout layout;
  // Time spent in native witness generation.
  std::chrono::nanoseconds witness_time{0};

  bool proving() const { return b.proving(); }
  unsigned bits() const { return schema.id_bits; }
  uint64_t max_id() const { return schema.max_id(); }
  size_t N() const { return db ? db->nodes.size() : layout.node_budget; }
  size_t E() const { return db ? db->edges.size() : layout.edge_budget; }
};

// Scoped timer adding to OpContext::witness_time.
class WitnessTimer {
 public:
  explicit WitnessTimer(OpContext& ctx)
      : ctx_(ctx), start_(std::chrono::steady_clock::now()) {}
  ~WitnessTimer() { ctx_.witness_time += std::chrono::steady_clock::now() - start_; }
  WitnessTimer(const WitnessTimer&) = delete;
  WitnessTimer& operator=(const WitnessTimer&) = delete;

 private:
  OpContext& ctx_;
  std::chrono::steady_clock::time_point start_;
};

// Database regions: the node table, and the edge list and/or CSR arrays.
DbLayout build_db_region(OpContext& ctx, bool edge_list, bool csr);
Relation db_nodes_relation(const OpContext& ctx);
Relation db_edges_relation(const OpContext& ctx);

// Recovers the database commitment from the db columns of a filled table.
// Returns nullopt if the columns are not a well-formed padded database.
std::optional<Digest> db_commitment_from_table(const ConstraintTable& table,
                                               const Schema& schema,
                                               const DbLayout& layout);

// Copies the columns of a producer segment into fresh columns of the current
// region (with copy constraints), unless the relation is a database table.
// Columns shared between segments are copied once.
Relation import_relation(OpContext& ctx, const Relation& in);

std::vector<Fe> to_fe(std::span<const uint64_t> v);
std::vector<Fe> padded(std::vector<Fe> v, size_t extent);
Expr cell(ColumnId c, int rot = 0);
Expr k(uint64_t v);

}  // namespace zkgraph::ops
