#include <algorithm>
#include <map>

#include "zkgraph/error.hpp"
#include "zkgraph/ops/common.hpp"

namespace zkgraph::ops {

std::optional<size_t> Relation::column(std::string_view name) const {
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

size_t Relation::id_column() const {
  if (kind == RelKind::Edges) return 1;
  return 0;
}

std::vector<Fe> to_fe(std::span<const uint64_t> v) {
  std::vector<Fe> out;
  out.reserve(v.size());
  for (uint64_t x : v) out.push_back(Fe(x));
  return out;
}

std::vector<Fe> padded(std::vector<Fe> v, size_t extent) {
  v.resize(extent, Fe::zero());
  return v;
}

Expr cell(ColumnId c, int rot) { return Expr::cell(c, rot); }
Expr k(uint64_t v) { return Expr(Fe(v)); }

DbLayout build_db_region(OpContext& ctx, bool edge_list, bool csr) {
  auto& b = ctx.b;
  DbLayout& l = ctx.layout;
  const GraphDb* db = ctx.db;
  const size_t nb = l.node_budget;
  const size_t eb = l.edge_budget;
  if (db && (db->nodes.size() >= nb || db->edges.size() >= eb)) {
    throw Error(ErrorCode::RowBudgetExceeded, "database does not fit its row budgets");
  }

  b.begin_region("db.nodes", "db", nb, ctx.N());
  l.nid = b.advice("id", nb);
  for (const auto& p : ctx.schema.node_props) l.node_props.push_back(b.advice(p.name, nb));
  if (db && b.proving()) {
    b.assign(l.nid, padded(to_fe(db->nodes.ids), nb));
    for (size_t i = 0; i < l.node_props.size(); ++i) {
      b.assign(l.node_props[i], padded(db->nodes.props[i], nb));
    }
  }

  if (edge_list) {
    b.begin_region("db.edges", "db", eb, ctx.E());
    l.has_edges = true;
    l.src = b.advice("src", eb);
    l.dst = b.advice("dst", eb);
    for (const auto& p : ctx.schema.edge_props) l.edge_props.push_back(b.advice(p.name, eb));
    if (db && b.proving()) {
      b.assign(l.src, padded(to_fe(db->edges.src), eb));
      b.assign(l.dst, padded(to_fe(db->edges.dst), eb));
      for (size_t i = 0; i < l.edge_props.size(); ++i) {
        b.assign(l.edge_props[i], padded(db->edges.props[i], eb));
      }
    }
  }

  if (csr) {
    b.begin_region("db.csr", "db", std::max(nb, eb), std::max(ctx.N() + 1, ctx.E()));
    l.has_csr = true;
    l.rowp = b.advice("row", nb);
    l.col = b.advice("col", eb);
    for (const auto& p : ctx.schema.edge_props) l.csr_vals.push_back(b.advice(p.name, eb));
    if (db && b.proving()) {
      const CsrTables t = to_csr(*db);
      b.assign(l.rowp, padded(to_fe(t.row), nb));
      b.assign(l.col, padded(to_fe(t.col), eb));
      for (size_t i = 0; i < l.csr_vals.size(); ++i) {
        b.assign(l.csr_vals[i], padded(t.val[i], eb));
      }
    }
  }
  return l;
}

Relation db_nodes_relation(const OpContext& ctx) {
  const auto& l = ctx.layout;
  Relation r;
  r.kind = RelKind::Nodes;
  r.from_db = true;
  r.native_rows = ctx.N();
  r.names.push_back("id");
  Segment s;
  s.cols.push_back(l.nid);
  for (size_t i = 0; i < l.node_props.size(); ++i) {
    r.names.push_back(ctx.schema.node_props[i].name);
    s.cols.push_back(l.node_props[i]);
  }
  s.extent = l.node_budget;
  if (ctx.db && ctx.proving()) {
    s.data.push_back(padded(to_fe(ctx.db->nodes.ids), s.extent));
    for (const auto& p : ctx.db->nodes.props) s.data.push_back(padded(p, s.extent));
  }
  r.segments.push_back(std::move(s));
  return r;
}

Relation db_edges_relation(const OpContext& ctx) {
  const auto& l = ctx.layout;
  if (!l.has_edges) throw Error(ErrorCode::BadDeclaration, "edge list region missing");
  Relation r;
  r.kind = RelKind::Edges;
  r.from_db = true;
  r.native_rows = ctx.E();
  r.names = {"src", "dst"};
  Segment s;
  s.cols = {l.src, l.dst};
  for (size_t i = 0; i < l.edge_props.size(); ++i) {
    r.names.push_back(ctx.schema.edge_props[i].name);
    s.cols.push_back(l.edge_props[i]);
  }
  s.extent = l.edge_budget;
  if (ctx.db && ctx.proving()) {
    s.data.push_back(padded(to_fe(ctx.db->edges.src), s.extent));
    s.data.push_back(padded(to_fe(ctx.db->edges.dst), s.extent));
    for (const auto& p : ctx.db->edges.props) s.data.push_back(padded(p, s.extent));
  }
  r.segments.push_back(std::move(s));
  return r;
}

namespace {

// Leading rows whose key is non-zero; every later cell of every column must
// be zero.
std::optional<size_t> live_rows(const ConstraintTable& t, ColumnId key,
                                const std::vector<ColumnId>& cols) {
  auto k = t.column(key).first(t.extent(key));
  size_t n = 0;
  while (n < k.size() && !k[n].is_zero()) ++n;
  for (ColumnId c : cols) {
    auto v = t.column(c);
    for (size_t i = n; i < v.size(); ++i) {
      if (!v[i].is_zero()) return std::nullopt;
    }
  }
  return n;
}

std::vector<Fe> head(const ConstraintTable& t, ColumnId c, size_t n) {
  auto v = t.column(c);
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace

std::optional<Digest> db_commitment_from_table(const ConstraintTable& t,
                                               const Schema& schema,
                                               const DbLayout& l) {
  std::vector<ColumnId> ncols{l.nid};
  ncols.insert(ncols.end(), l.node_props.begin(), l.node_props.end());
  const auto n = live_rows(t, l.nid, ncols);
  if (!n) return std::nullopt;
  std::vector<std::vector<Fe>> node_cols;
  for (ColumnId c : ncols) node_cols.push_back(head(t, c, *n));

  std::optional<Digest> result;
  if (l.has_edges) {
    std::vector<ColumnId> ecols{l.src, l.dst};
    ecols.insert(ecols.end(), l.edge_props.begin(), l.edge_props.end());
    const auto e = live_rows(t, l.src, ecols);
    if (!e) return std::nullopt;
    std::vector<std::vector<Fe>> edge_cols;
    for (ColumnId c : ecols) edge_cols.push_back(head(t, c, *e));
    result = commit_db_columns(schema, node_cols, edge_cols);
  }
  if (l.has_csr) {
    auto row = t.column(l.rowp);
    auto col = t.column(l.col);
    if (!row[0].is_zero()) return std::nullopt;
    for (size_t i = 0; i < *n; ++i) {
      if (row[i + 1] < row[i]) return std::nullopt;
    }
    const uint64_t e = row[*n].value();
    if (e > t.extent(l.col)) return std::nullopt;
    for (size_t i = *n + 1; i < row.size(); ++i) {
      if (!row[i].is_zero()) return std::nullopt;
    }
    std::vector<ColumnId> vcols{l.col};
    vcols.insert(vcols.end(), l.csr_vals.begin(), l.csr_vals.end());
    for (ColumnId c : vcols) {
      auto v = t.column(c);
      for (size_t i = e; i < v.size(); ++i) {
        if (!v[i].is_zero()) return std::nullopt;
      }
    }
    std::vector<std::vector<Fe>> edge_cols(2 + l.csr_vals.size());
    for (size_t i = 0; i < *n; ++i) {
      for (uint64_t j = row[i].value(); j < row[i + 1].value(); ++j) {
        edge_cols[0].push_back(node_cols[0][i]);
        edge_cols[1].push_back(col[j]);
        for (size_t p = 0; p < l.csr_vals.size(); ++p) {
          edge_cols[2 + p].push_back(t.column(l.csr_vals[p])[j]);
        }
      }
    }
    const Digest d = commit_db_columns(schema, node_cols, edge_cols);
    if (result && *result != d) return std::nullopt;
    result = d;
  }
  return result;
}

Relation import_relation(OpContext& ctx, const Relation& in) {
  if (in.from_db) return in;
  auto& b = ctx.b;
  Relation out = in;
  std::map<ColumnId, ColumnId> mapped;
  for (size_t s = 0; s < in.segments.size(); ++s) {
    const auto& seg = in.segments[s];
    auto& dst = out.segments[s];
    for (size_t c = 0; c < seg.cols.size(); ++c) {
      auto it = mapped.find(seg.cols[c]);
      if (it == mapped.end()) {
        const ColumnId nc = b.advice("in." + in.names[c] + std::to_string(s), seg.extent);
        b.copy_rows(seg.cols[c], nc, seg.extent);
        if (!seg.data.empty()) b.assign(nc, seg.data[c]);
        it = mapped.emplace(seg.cols[c], nc).first;
      }
      dst.cols[c] = it->second;
    }
  }
  return out;
}

}  // namespace zkgraph::ops
