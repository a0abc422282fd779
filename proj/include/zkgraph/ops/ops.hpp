#pragma once

// Operator witness generators and circuits.
//
// Each *_witness function executes an operator natively and returns the
// auxiliary columns its circuit needs. The circuit functions lay out a region
// in the builder, declare its constraints and, when proving, assign the
// witness. Parameters that appear in gates (ids, bounds) are public and
// become constants of the circuit description.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "zkgraph/ops/common.hpp"

namespace zkgraph::ops {

using Pair = std::pair<uint64_t, uint64_t>;

// ---------------------------------------------------------------- expansion

struct SingleExpansionWitness {
  uint64_t id_s = 0;
  std::vector<Fe> flags;
  std::vector<Fe> nonmatch_inv;
  std::vector<Pair> out;
};

// Over one edge view (a[i], b[i]). Rows with a[i] == id_s are selected.
SingleExpansionWitness expand_single_witness(std::span<const uint64_t> a,
                                             std::span<const uint64_t> b, uint64_t id_s);
// Errors: UnknownNode.
SingleExpansionWitness expand_single_witness(const GraphDb& db, uint64_t id_s);

struct CsrExpansionWitness {
  uint64_t id_s = 0;
  uint64_t idx_s = 0;
  uint64_t l_s = 0;
  uint64_t r_s = 0;
  std::vector<uint8_t> in_range;  // over C_idx
  std::vector<Pair> out;
};

// Errors: UnknownNode.
CsrExpansionWitness expand_single_csr_witness(const GraphDb& db, const CsrTables& csr,
                                              uint64_t id_s);

struct SetViewWitness {
  std::vector<uint64_t> sa, sb;     // view rows sorted by (a, b)
  std::vector<uint64_t> aux, auxn;  // bracketing consecutive pair per row
  std::vector<Fe> flags;
  std::vector<Fe> inv;
};

struct SetExpansionWitness {
  std::vector<uint64_t> sorted;  // ID'_s: 0, the distinct members ascending, max
  std::vector<SetViewWitness> views;
  std::vector<Pair> out;
};

// `views` are edge views (a, b); dummy rows are (0, 0). Members equal to 0 are
// ignored. Errors: SentinelCollision when a member equals max_id.
SetExpansionWitness expand_set_witness(
    std::span<const std::pair<std::vector<uint64_t>, std::vector<uint64_t>>> views,
    std::span<const uint64_t> ids, uint64_t max_id);
// Errors: SentinelCollision, UnknownNode, BadParameter (empty set).
SetExpansionWitness expand_set_witness(const GraphDb& db, std::span<const uint64_t> ids);

Relation expand_single(OpContext& ctx, const std::string& name, const Relation& edges,
                       uint64_t id_s, std::optional<size_t> out_rows);
Relation expand_single_csr(OpContext& ctx, const std::string& name, uint64_t id_s,
                           std::optional<size_t> out_rows);

using SetInput = std::variant<std::vector<uint64_t>, Relation>;
Relation expand_set(OpContext& ctx, const std::string& name, const Relation& edges,
                    const SetInput& set, std::optional<size_t> out_rows);

// ---------------------------------------------------------------- paths

struct SsspWitness {
  uint64_t src = 0;
  uint64_t dmax = 0;
  // Per node row (node order, padded rows included).
  std::vector<uint64_t> nid;
  std::vector<uint64_t> dist;
  std::vector<uint64_t> pre;
  std::vector<uint64_t> pd;
  std::vector<Fe> is, is_inv, un, un_inv;
  // Per view and edge row: distances of both endpoints.
  std::vector<std::vector<uint64_t>> da, db;
};

using EdgeViews = std::vector<std::pair<std::vector<uint64_t>, std::vector<uint64_t>>>;

// BFS over the union of the views. Unreachable rows (and dummy rows, id 0)
// take dist = dmax, and every source or unreachable row is its own
// predecessor. Errors: UnknownNode, DmaxTooSmall.
SsspWitness sssp_witness(std::span<const uint64_t> nid, const EdgeViews& views,
                         uint64_t src, uint64_t dmax);
SsspWitness sssp_witness(const GraphDb& db, uint64_t src, uint64_t dmax);

struct PathWitness {
  std::vector<uint64_t> path;
  uint64_t s = 0;
  uint64_t t = 0;
};

// Shortest path s -> t. Errors: UnknownNode, NotReachable.
PathWitness reach_witness(std::span<const uint64_t> nid, const EdgeViews& views, uint64_t s,
                          uint64_t t);

struct AllSpWitness {
  SsspWitness sssp;
  uint64_t t = 0;
  uint64_t d = 0;
  std::vector<uint64_t> level;  // nodes at distance d - 1
  std::vector<uint64_t> preds;  // members of level with an edge to t
};

// Errors: UnknownNode, NotReachable (t unreachable or t == s).
AllSpWitness allsp_witness(std::span<const uint64_t> nid, const EdgeViews& views,
                           uint64_t s, uint64_t t, uint64_t dmax);

// Output: node relation (id, dist) over the node rows.
Relation sssp(OpContext& ctx, const std::string& name, const Relation& edges, uint64_t src,
              std::optional<uint64_t> dmax);
// No output rows; the statement is that s and t lie on a common walk.
Relation reach(OpContext& ctx, const std::string& name, const Relation& edges, uint64_t s,
               uint64_t t);
// Output: node relation (id) of the last-hop predecessors of t. The shortest
// distance d is published as a public value.
Relation allsp(OpContext& ctx, const std::string& name, const Relation& edges, uint64_t s,
               uint64_t t, std::optional<uint64_t> dmax);

// ---------------------------------------------------------------- relational

struct CanonWitness {
  std::vector<uint64_t> ea, eb, l, h;
};

// Errors: IdOutOfRange when an id is not below 2^bits.
CanonWitness canonicalize_witness(std::span<const uint64_t> a, std::span<const uint64_t> b,
                                  unsigned bits);

enum class Order : uint8_t { Asc, Desc };

struct TopKWitness {
  std::vector<uint8_t> is_k;  // per row
  uint64_t val_k = 0;         // effective (packed) key of the k-th row
  std::vector<uint64_t> eff;  // effective key per row
};

// keys[i] is the (packed) key of row i; dummy rows are excluded from the
// ordering and only chosen when fewer than k real rows exist. Ties are
// broken by row order.
TopKWitness topk_witness(std::span<const uint64_t> keys, std::span<const uint8_t> dummy,
                         size_t k, Order order, uint64_t key_limit);

enum class CmpOp : uint8_t { Eq, Ge, Le };

struct FilterValue {
  bool is_string = false;
  int64_t number = 0;
  std::string text;
};

// Output: the same two views, canonicalized to (l, h) and mirrored to (h, l).
Relation canon(OpContext& ctx, const std::string& name, const Relation& edges);
Relation topk(OpContext& ctx, const std::string& name, const Relation& in,
              const std::string& key, size_t k, Order order,
              const std::optional<std::string>& key2, std::optional<size_t> out_rows);
Relation filter(OpContext& ctx, const std::string& name, const Relation& in,
                const std::string& prop, CmpOp op, const FilterValue& value,
                std::optional<size_t> out_rows);

struct ProjectItem {
  std::string column;
  uint64_t key = 0;
};
// Publishes (key, value) pairs looked up in the input relation.
void project(OpContext& ctx, const std::string& name, const Relation& in,
             const std::vector<ProjectItem>& items);

// ---------------------------------------------------------------- costs

enum class OpKind : uint8_t {
  ExpandSingle,
  ExpandSingleCsr,
  ExpandSet,
  Sssp,
  Reach,
  AllSp,
  Canon,
  Filter,
  TopK,
  Project
};

struct CountInput {
  size_t nodes = 0;        // native node rows
  size_t view_rows = 0;    // native rows of the input relation
  size_t views = 1;        // segments of the input relation
  size_t set_size = 0;     // literal set size or producer rows
  size_t set_columns = 1;  // segments feeding the set
};

struct OpCount {
  size_t rows = 0;
  size_t gates = 0;
  size_t lookups = 0;
  size_t perms = 0;
};

// Closed-form region costs for the expansion operators.
OpCount count_rows(OpKind kind, const CountInput& in);

}  // namespace zkgraph::ops
