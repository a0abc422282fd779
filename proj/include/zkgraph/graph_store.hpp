#pragma once

// The private graph database: a node table, an edge list sorted by
// (src, dst), optional CSR views, dummy padding and the database commitment.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zkgraph/field.hpp"
#include "zkgraph/sha256.hpp"

namespace zkgraph {

inline constexpr uint64_t kDummyId = 0;

enum class PropType : uint8_t { Int, String };

struct PropSpec {
  std::string name;
  PropType type = PropType::Int;
};

struct Schema {
  std::string node_label = "Node";
  std::string edge_kind = "EDGE";
  bool directed = true;
  std::vector<PropSpec> node_props;
  std::vector<PropSpec> edge_props;
  unsigned id_bits = 16;

  uint64_t max_id() const { return (uint64_t{1} << id_bits) - 1; }
  std::optional<size_t> node_prop(std::string_view name) const;
  std::optional<size_t> edge_prop(std::string_view name) const;

  // Errors: ParseError.
  static Schema from_json(std::string_view text);
  // Canonical JSON (fixed key order, no whitespace).
  std::string to_json() const;
};

struct NodeTable {
  std::vector<uint64_t> ids;                // strictly increasing
  std::vector<std::vector<Fe>> props;       // one vector per node property
  size_t size() const { return ids.size(); }
};

struct EdgeTable {
  std::vector<uint64_t> src;
  std::vector<uint64_t> dst;
  std::vector<std::vector<Fe>> props;       // one vector per edge property
  size_t size() const { return src.size(); }
};

struct CsrTables {
  std::vector<uint64_t> col;
  std::vector<uint64_t> row;                // |nodes| + 1 entries
  std::vector<std::vector<Fe>> val;
  std::vector<uint64_t> idx;                // 0 .. |col| - 1
};

struct GraphDb {
  Schema schema;
  NodeTable nodes;
  EdgeTable edges;
  Digest commitment{};

  bool directed() const { return schema.directed; }
  bool has_node(uint64_t id) const;
  // Position of `id` in the node table; nullopt when absent.
  std::optional<size_t> node_index(uint64_t id) const;
};

Fe hash_to_field(std::string_view s);

// Validates, sorts and commits. Node ids must lie in [1, max_id). Errors:
// IdOutOfRange, DuplicateNodeId, DanglingEdge, BadParameter (prop arity).
GraphDb make_db(Schema schema, NodeTable nodes, EdgeTable edges);

// CSV ingestion: nodes.csv is `id[,prop...]`, edges.csv is `src,dst[,prop...]`,
// each with a header line naming the columns in schema order. Errors:
// ParseError (message carries the line), IoError, plus make_db errors.
GraphDb load_csv(const std::string& nodes_path, const std::string& edges_path,
                 const Schema& schema);
GraphDb load_csv_text(std::string_view nodes_csv, std::string_view edges_csv,
                      const Schema& schema);

CsrTables to_csr(const GraphDb& db);
// Flattens CSR back into an src-sorted edge table.
EdgeTable from_csr(const NodeTable& nodes, const CsrTables& csr);

struct PaddedEdges {
  EdgeTable table;
  std::vector<uint8_t> dummy;  // 1 on appended rows
};

// Appends all-zero dummy rows up to `target_rows` (a power of two).
// Errors: TargetTooSmall, BadParameter (target not a power of two).
PaddedEdges pad_with_dummies(const EdgeTable& table, size_t target_rows);

// Hash over the schema and the column-major node and edge cells.
Digest commit_db(const GraphDb& db);
// Same hash from raw column data, as recovered from circuit columns.
Digest commit_db_columns(const Schema& schema,
                         const std::vector<std::vector<Fe>>& node_columns,
                         const std::vector<std::vector<Fe>>& edge_columns);

// Binary "ZKGD" database file. Errors: ParseError on corrupt input.
std::vector<uint8_t> serialize_db(const GraphDb& db);
GraphDb deserialize_db(std::span<const uint8_t> bytes);

// Random simple-ish graph for fixtures and benchmarks: node ids 1..n_nodes,
// edges drawn uniformly (duplicates and self-loops allowed).
GraphDb random_graph(uint64_t seed, size_t n_nodes, size_t n_edges,
                     bool directed = true, unsigned id_bits = 16);

}  // namespace zkgraph
