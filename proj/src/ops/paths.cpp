#include <algorithm>
#include <span>
#include <unordered_map>

#include "zkgraph/error.hpp"
#include "zkgraph/ops/ops.hpp"

namespace zkgraph::ops {

namespace {

// Node positions and hop counts are 32-bit to keep traversal state compact.
using Pos = uint32_t;
constexpr Pos kNoNode = UINT32_MAX;
constexpr Pos kFar = UINT32_MAX;

// Node id -> row position. Dense when ids are small enough, hashed otherwise.
class NodeIndex {
 public:
  explicit NodeIndex(std::span<const uint64_t> nid) {
    uint64_t top = 0;
    for (uint64_t id : nid) top = std::max(top, id);
    if (top < (uint64_t{1} << 20) || top < 8 * nid.size()) {
      dense_.assign(top + 1, kNoNode);
      for (size_t i = 0; i < nid.size(); ++i) dense_[nid[i]] = static_cast<Pos>(i);
    } else {
      for (size_t i = 0; i < nid.size(); ++i) sparse_.emplace(nid[i], static_cast<Pos>(i));
    }
  }

  Pos find(uint64_t id) const {
    if (!sparse_.empty()) {
      auto it = sparse_.find(id);
      return it == sparse_.end() ? kNoNode : it->second;
    }
    return id < dense_.size() ? dense_[id] : kNoNode;
  }

 private:
  std::vector<Pos> dense_;
  std::unordered_map<uint64_t, Pos> sparse_;
};

// Flat out-neighbour lists: the targets of node i are to[start[i] .. start[i+1]).
struct Adjacency {
  NodeIndex index;
  std::vector<Pos> start;
  std::vector<Pos> to;

  size_t size() const { return start.size() - 1; }
  std::span<const Pos> out(size_t i) const {
    return {to.data() + start[i], start[i + 1] - start[i]};
  }
};

Adjacency adjacency(std::span<const uint64_t> nid, const EdgeViews& views) {
  Adjacency g{NodeIndex(nid), std::vector<Pos>(nid.size() + 1, 0), {}};
  // Two passes over the views: count out-degrees, then place the targets.
  auto each_arc = [&](auto&& fn) {
    for (const auto& [a, b] : views) {
      for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        const Pos ia = g.index.find(a[i]);
        const Pos ib = g.index.find(b[i]);
        if (ia != kNoNode && ib != kNoNode) fn(ia, ib);
      }
    }
  };
  each_arc([&](Pos u, Pos) { ++g.start[u + 1]; });
  for (size_t i = 0; i < nid.size(); ++i) g.start[i + 1] += g.start[i];
  g.to.resize(g.start.back());
  std::vector<Pos> fill(g.start.begin(), g.start.end() - 1);
  each_arc([&](Pos u, Pos v) { g.to[fill[u]++] = v; });
  return g;
}

size_t require_node(const Adjacency& g, uint64_t id) {
  const Pos i = g.index.find(id);
  if (i == kNoNode) throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id));
  return i;
}

// BFS distances and parents (node positions).
std::pair<std::vector<Pos>, std::vector<Pos>> bfs(const Adjacency& g, size_t s) {
  std::vector<Pos> dist(g.size(), kFar);
  std::vector<Pos> parent(g.size(), kNoNode);
  std::vector<Pos> queue{static_cast<Pos>(s)};
  queue.reserve(g.size());
  dist[s] = 0;
  for (size_t head = 0; head < queue.size(); ++head) {
    const Pos u = queue[head];
    for (Pos v : g.out(u)) {
      if (dist[v] != kFar) continue;
      dist[v] = dist[u] + 1;
      parent[v] = u;
      queue.push_back(v);
    }
  }
  return {std::move(dist), std::move(parent)};
}

EdgeViews db_views(const GraphDb& db) {
  EdgeViews v;
  v.emplace_back(db.edges.src, db.edges.dst);
  if (!db.directed()) v.emplace_back(db.edges.dst, db.edges.src);
  return v;
}

std::vector<uint64_t> values(std::span<const Fe> v) {
  std::vector<uint64_t> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i].value();
  return out;
}

size_t max_extent(const Relation& r) {
  size_t m = 0;
  for (const auto& s : r.segments) m = std::max(m, s.extent);
  return m;
}

void require_edges(const Relation& r, const char* op) {
  if (r.kind != RelKind::Edges || r.segments.empty()) {
    throw Error(ErrorCode::TypeMismatch, std::string(op) + " expects an edge relation");
  }
}

EdgeViews live_views(const Relation& in) {
  EdgeViews views;
  for (const auto& seg : in.segments) {
    const size_t live = std::min(in.native_rows, seg.extent);
    views.emplace_back(values(std::span(seg.data[0]).first(live)),
                       values(std::span(seg.data[1]).first(live)));
  }
  return views;
}

std::vector<TableSource> view_tables(const Relation& in) {
  std::vector<TableSource> t;
  for (const auto& seg : in.segments) t.push_back({{seg.cols[0], seg.cols[1]}, {}, {}});
  return t;
}

// Columns of the shortest-distance region shared by sssp and allsp.
struct SsspColumns {
  ColumnId qn;
  ColumnId dist;
  std::vector<ColumnId> da;
  std::vector<ColumnId> db;
};

SsspColumns sssp_layout(OpContext& ctx, const Relation& in, uint64_t src, uint64_t dmax,
                        const SsspWitness* w) {
  auto& b = ctx.b;
  const DbLayout& l = ctx.layout;
  const size_t nb = l.node_budget;
  const Expr one = k(1);

  SsspColumns c;
  c.qn = b.selector(0, nb);
  const ColumnId q0 = b.selector(0, 1);
  const ColumnId is = b.advice("is", nb);
  const ColumnId is_inv = b.advice("is.inv", nb);
  c.dist = b.advice("dist", nb);
  const ColumnId un = b.advice("un", nb);
  const ColumnId un_inv = b.advice("un.inv", nb);
  const ColumnId pre = b.advice("pre", nb);
  const ColumnId pd = b.advice("pd", nb);
  const Expr nid = cell(l.nid);
  const Expr dist = cell(c.dist);

  is_zero_gadget(b, "is", c.qn, nid - k(src), is, is_inv);
  b.lookup({"src", {k(src)}, {{{l.nid}, {}, {}}}, cell(q0)});
  b.gate("src.dist", c.qn, cell(is) * dist);
  b.gate("step", c.qn, (one - cell(is)) * (dist - cell(pd) - one) * (dist - k(dmax)));
  is_zero_gadget(b, "un", c.qn, dist - k(dmax), un, un_inv);
  const Expr inactive = cell(is) + cell(un) - cell(is) * cell(un);
  b.gate("pre.self", c.qn, inactive * (cell(pre) - nid));
  b.gate("pd.self", c.qn, inactive * (cell(pd) - dist));
  const size_t dist_table = b.range_table(dmax + 1);
  b.lookup({"dist.range", {dist}, {{{}, {}, dist_table}}, cell(c.qn)});
  b.lookup({"pre.dist", {cell(pre), cell(pd)}, {{{l.nid, c.dist}, {}, {}}}, cell(c.qn)});
  b.lookup({"pre.edge",
            {cell(pre), nid},
            view_tables(in),
            cell(c.qn) * (one - cell(is)) * (one - cell(un))});

  const size_t tri_table = b.range_table(dmax + 2);
  for (size_t v = 0; v < in.segments.size(); ++v) {
    const Segment& seg = in.segments[v];
    const std::string tag = "v" + std::to_string(v);
    const ColumnId q = b.selector(0, seg.extent);
    const ColumnId da = b.advice(tag + ".da", seg.extent);
    const ColumnId db = b.advice(tag + ".db", seg.extent);
    b.lookup({tag + ".da", {cell(seg.cols[0]), cell(da)}, {{{l.nid, c.dist}, {}, {}}}, cell(q)});
    b.lookup({tag + ".db", {cell(seg.cols[1]), cell(db)}, {{{l.nid, c.dist}, {}, {}}}, cell(q)});
    b.lookup({tag + ".relax", {cell(da) + one - cell(db)}, {{{}, {}, tri_table}}, cell(q)});
    c.da.push_back(da);
    c.db.push_back(db);
    if (w) {
      std::vector<Fe> dav(seg.extent, Fe(dmax)), dbv(seg.extent, Fe(dmax));
      for (size_t i = 0; i < w->da[v].size(); ++i) {
        dav[i] = Fe(w->da[v][i]);
        dbv[i] = Fe(w->db[v][i]);
      }
      b.assign(da, dav);
      b.assign(db, dbv);
    }
  }

  if (w) {
    const size_t n = w->nid.size();
    const Fe pad_is_inv = (-Fe(src)).inverse();
    std::vector<Fe> isv(nb), isinv(nb, pad_is_inv), distv(nb, Fe(dmax)), unv(nb, Fe::one()),
        uninv(nb), prev(nb), pdv(nb, Fe(dmax));
    for (size_t i = 0; i < n; ++i) {
      isv[i] = w->is[i];
      isinv[i] = w->is_inv[i];
      distv[i] = Fe(w->dist[i]);
      unv[i] = w->un[i];
      uninv[i] = w->un_inv[i];
      prev[i] = Fe(w->pre[i]);
      pdv[i] = Fe(w->pd[i]);
    }
    b.assign(is, isv);
    b.assign(is_inv, isinv);
    b.assign(c.dist, distv);
    b.assign(un, unv);
    b.assign(un_inv, uninv);
    b.assign(pre, prev);
    b.assign(pd, pdv);
  }
  return c;
}

uint64_t default_dmax(const OpContext& ctx) { return ctx.layout.node_budget; }

}  // namespace

SsspWitness sssp_witness(std::span<const uint64_t> nid, const EdgeViews& views, uint64_t src,
                         uint64_t dmax) {
  const Adjacency g = adjacency(nid, views);
  const size_t s = require_node(g, src);
  auto [dist, parent] = bfs(g, s);

  SsspWitness w;
  w.src = src;
  w.dmax = dmax;
  w.nid.assign(nid.begin(), nid.end());
  const size_t n = nid.size();
  w.dist.resize(n);
  w.pre.resize(n);
  w.pd.resize(n);
  for (size_t i = 0; i < n; ++i) {
    if (dist[i] == kFar) {
      w.dist[i] = dmax;
    } else if (dist[i] >= dmax) {
      throw Error(ErrorCode::DmaxTooSmall, "distance " + std::to_string(dist[i]) +
                                               " reaches dmax " + std::to_string(dmax));
    } else {
      w.dist[i] = dist[i];
    }
  }
  for (size_t i = 0; i < n; ++i) {
    if (parent[i] == kNoNode) {
      w.pre[i] = nid[i];
      w.pd[i] = w.dist[i];
    } else {
      w.pre[i] = nid[parent[i]];
      w.pd[i] = w.dist[parent[i]];
    }
  }
  std::vector<Fe> x(n), y(n);
  for (size_t i = 0; i < n; ++i) {
    x[i] = Fe(nid[i]) - Fe(src);
    y[i] = Fe(w.dist[i]) - Fe(dmax);
  }
  is_zero_witness(x, w.is, w.is_inv);
  is_zero_witness(y, w.un, w.un_inv);

  for (const auto& [a, b] : views) {
    std::vector<uint64_t> da(a.size()), db(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
      const Pos ia = g.index.find(a[i]);
      const Pos ib = g.index.find(b[i]);
      da[i] = ia == kNoNode ? dmax : w.dist[ia];
      db[i] = ib == kNoNode ? dmax : w.dist[ib];
    }
    w.da.push_back(std::move(da));
    w.db.push_back(std::move(db));
  }
  return w;
}

SsspWitness sssp_witness(const GraphDb& db, uint64_t src, uint64_t dmax) {
  return sssp_witness(db.nodes.ids, db_views(db), src, dmax);
}

PathWitness reach_witness(std::span<const uint64_t> nid, const EdgeViews& views, uint64_t s,
                          uint64_t t) {
  const Adjacency g = adjacency(nid, views);
  const size_t si = require_node(g, s);
  const size_t ti = require_node(g, t);
  const auto [dist, parent] = bfs(g, si);
  if (dist[ti] == kFar) {
    throw Error(ErrorCode::NotReachable,
                std::to_string(t) + " is not reachable from " + std::to_string(s));
  }
  PathWitness w;
  w.s = s;
  w.t = t;
  for (Pos v = static_cast<Pos>(ti); v != kNoNode; v = parent[v]) w.path.push_back(nid[v]);
  std::reverse(w.path.begin(), w.path.end());
  return w;
}

AllSpWitness allsp_witness(std::span<const uint64_t> nid, const EdgeViews& views, uint64_t s,
                           uint64_t t, uint64_t dmax) {
  AllSpWitness w;
  w.sssp = sssp_witness(nid, views, s, dmax);
  w.t = t;
  const Adjacency g = adjacency(nid, views);
  const size_t ti = require_node(g, t);
  const uint64_t d = w.sssp.dist[ti];
  if (d == dmax || d == 0) {
    throw Error(ErrorCode::NotReachable,
                std::to_string(t) + " is not reachable from " + std::to_string(s));
  }
  w.d = d;
  for (size_t i = 0; i < nid.size(); ++i) {
    if (w.sssp.dist[i] != d - 1) continue;
    w.level.push_back(nid[i]);
    const auto out = g.out(i);
    if (std::find(out.begin(), out.end(), ti) != out.end()) w.preds.push_back(nid[i]);
  }
  return w;
}

Relation sssp(OpContext& ctx, const std::string& name, const Relation& edges, uint64_t src,
              std::optional<uint64_t> dmax_opt) {
  require_edges(edges, "sssp");
  auto& b = ctx.b;
  const uint64_t dmax = dmax_opt.value_or(default_dmax(ctx));
  const size_t nb = ctx.layout.node_budget;
  b.begin_region(name, "sssp", std::max(nb, max_extent(edges)),
                 std::max(ctx.N(), edges.native_rows));
  const Relation in = import_relation(ctx, edges);

  std::optional<SsspWitness> w;
  if (ctx.proving() && ctx.db && in.has_data()) {
    const EdgeViews views = live_views(in);
    WitnessTimer t(ctx);
    w = sssp_witness(ctx.db->nodes.ids, views, src, dmax);
  }
  const SsspColumns c = sssp_layout(ctx, in, src, dmax, w ? &*w : nullptr);

  Relation out;
  out.kind = RelKind::Nodes;
  out.names = {"id", "dist"};
  out.native_rows = ctx.N();
  Segment seg;
  seg.cols = {ctx.layout.nid, c.dist};
  seg.extent = nb;
  if (w) {
    std::vector<Fe> distv(nb, Fe(dmax));
    for (size_t i = 0; i < w->dist.size(); ++i) distv[i] = Fe(w->dist[i]);
    seg.data = {padded(to_fe(ctx.db->nodes.ids), nb), std::move(distv)};
  }
  out.segments.push_back(std::move(seg));
  return out;
}

Relation reach(OpContext& ctx, const std::string& name, const Relation& edges, uint64_t s,
               uint64_t t) {
  require_edges(edges, "reach");
  auto& b = ctx.b;
  const DbLayout& l = ctx.layout;
  const size_t nb = l.node_budget;
  b.begin_region(name, "reach", nb, ctx.N());
  const Relation in = import_relation(ctx, edges);

  const ColumnId q0 = b.selector(0, 1);
  const ColumnId qlast = b.selector(nb - 1, nb);
  const ColumnId qstep = b.selector(0, nb - 1);
  const ColumnId node = b.advice("path", nb);
  const ColumnId stay = b.advice("stay", nb);
  const ColumnId stay_inv = b.advice("stay.inv", nb);
  b.gate("start", q0, cell(node) - k(s));
  b.gate("end", qlast, cell(node) - k(t));
  is_zero_gadget(b, "stay", qstep, cell(node, 1) - cell(node), stay, stay_inv);
  b.lookup({"start.node", {cell(node)}, {{{l.nid}, {}, {}}}, cell(q0)});
  b.lookup({"step",
            {cell(node), cell(node, 1)},
            view_tables(in),
            cell(qstep) * (k(1) - cell(stay))});

  if (ctx.proving() && ctx.db && in.has_data()) {
    const EdgeViews views = live_views(in);
    PathWitness w;
    {
      WitnessTimer timer(ctx);
      w = reach_witness(ctx.db->nodes.ids, views, s, t);
    }
    std::vector<Fe> nv(nb, Fe(t));
    for (size_t i = 0; i < w.path.size(); ++i) nv[i] = Fe(w.path[i]);
    std::vector<Fe> diff(nb - 1);
    for (size_t i = 0; i + 1 < nb; ++i) diff[i] = nv[i + 1] - nv[i];
    std::vector<Fe> sv, si;
    is_zero_witness(diff, sv, si);
    b.assign(node, nv);
    b.assign(stay, padded(std::move(sv), nb));
    b.assign(stay_inv, padded(std::move(si), nb));
  }

  Relation out;
  out.kind = RelKind::Nodes;
  out.names = {"id"};
  out.native_rows = 0;
  return out;
}

Relation allsp(OpContext& ctx, const std::string& name, const Relation& edges, uint64_t s,
               uint64_t t, std::optional<uint64_t> dmax_opt) {
  require_edges(edges, "allsp");
  auto& b = ctx.b;
  const DbLayout& l = ctx.layout;
  const uint64_t dmax = dmax_opt.value_or(default_dmax(ctx));
  const size_t nb = l.node_budget;
  const size_t rows = std::max(nb, max_extent(edges));
  b.begin_region(name, "allsp", rows, std::max(ctx.N(), edges.native_rows));
  const Relation in = import_relation(ctx, edges);

  std::optional<AllSpWitness> w;
  if (ctx.proving() && ctx.db && in.has_data()) {
    const EdgeViews views = live_views(in);
    WitnessTimer timer(ctx);
    w = allsp_witness(ctx.db->nodes.ids, views, s, t, dmax);
  }
  const SsspColumns c = sssp_layout(ctx, in, s, dmax, w ? &w->sssp : nullptr);
  const Expr one = k(1);

  const ColumnId q0 = b.selector(0, 1);
  const ColumnId qc = b.selector(0, rows - 1);
  const ColumnId dcol = b.advice("d", rows);
  const ColumnId dpub = b.instance("d.public", 1);
  b.gate("d.const", qc, cell(dcol, 1) - cell(dcol));
  b.bind_instance({dcol, 0}, {dpub, 0});
  b.lookup({"d.target", {k(t), cell(dcol)}, {{{l.nid, c.dist}, {}, {}}}, cell(q0)});
  const size_t dtable = b.range_table(dmax);
  b.lookup({"d.low", {cell(dcol) - one}, {{{}, {}, dtable}}, cell(q0)});
  b.lookup({"d.high", {k(dmax) - one - cell(dcol)}, {{{}, {}, dtable}}, cell(q0)});

  const ColumnId f1 = b.advice("level", nb);
  const ColumnId f1_inv = b.advice("level.inv", nb);
  const ColumnId f2 = b.advice("pred", nb);
  const ColumnId pf = b.advice("pred.id", nb);
  const ColumnId outp = b.advice("out_id", nb);
  is_zero_gadget(b, "level", c.qn, cell(c.dist) - cell(dcol) + one, f1, f1_inv);
  b.gate("pred.bool", c.qn, cell(f2) * (one - cell(f2)));
  b.gate("pred.level", c.qn, cell(f2) * (one - cell(f1)));
  b.gate("pred.id", c.qn, cell(pf) - cell(f2) * cell(l.nid));
  b.lookup({"pred.edge", {cell(l.nid), k(t)}, view_tables(in), cell(c.qn) * cell(f2)});

  std::vector<ColumnId> et, et_inv, ed, ed_inv, g;
  for (size_t v = 0; v < in.segments.size(); ++v) {
    const Segment& seg = in.segments[v];
    const std::string tag = "v" + std::to_string(v);
    const ColumnId q = b.selector(0, seg.extent);
    et.push_back(b.advice(tag + ".to_t", seg.extent));
    et_inv.push_back(b.advice(tag + ".to_t.inv", seg.extent));
    ed.push_back(b.advice(tag + ".from_level", seg.extent));
    ed_inv.push_back(b.advice(tag + ".from_level.inv", seg.extent));
    g.push_back(b.advice(tag + ".last_hop", seg.extent));
    is_zero_gadget(b, tag + ".to_t", q, cell(seg.cols[1]) - k(t), et[v], et_inv[v]);
    is_zero_gadget(b, tag + ".from_level", q, cell(c.da[v]) - cell(dcol) + one, ed[v],
                   ed_inv[v]);
    b.gate(tag + ".last_hop", q, cell(g[v]) - cell(et[v]) * cell(ed[v]));
    b.lookup({tag + ".complete", {cell(seg.cols[0])}, {{{pf}, {}, {}}}, cell(g[v])});
  }
  b.permutation("out", {outp}, {pf});

  Relation out;
  out.kind = RelKind::Nodes;
  out.names = {"id"};
  out.native_rows = ctx.N();
  Segment seg;
  seg.cols = {outp};
  seg.extent = nb;

  if (w) {
    const Fe d(w->d);
    b.assign(dcol, std::vector<Fe>(rows, d));
    b.set_instance(dpub, {d});
    const auto& ids = ctx.db->nodes.ids;
    std::vector<Fe> x(nb), f2v(nb), pfv(nb), outv(nb);
    for (size_t i = 0; i < nb; ++i) {
      const uint64_t dist = i < ids.size() ? w->sssp.dist[i] : dmax;
      x[i] = Fe(dist) - d + Fe::one();
    }
    std::vector<Fe> f1v, f1i;
    is_zero_witness(x, f1v, f1i);
    for (size_t i = 0; i < ids.size(); ++i) {
      if (std::binary_search(w->preds.begin(), w->preds.end(), ids[i])) {
        f2v[i] = Fe::one();
        pfv[i] = Fe(ids[i]);
      }
    }
    for (size_t i = 0; i < w->preds.size(); ++i) outv[i] = Fe(w->preds[i]);
    b.assign(f1, f1v);
    b.assign(f1_inv, f1i);
    b.assign(f2, f2v);
    b.assign(pf, pfv);
    b.assign(outp, outv);
    seg.data = {outv};

    for (size_t v = 0; v < in.segments.size(); ++v) {
      const Segment& s_in = in.segments[v];
      const size_t ext = s_in.extent;
      std::vector<Fe> xt(ext), xd(ext);
      for (size_t i = 0; i < ext; ++i) {
        xt[i] = s_in.data[1][i] - Fe(t);
        const uint64_t da = i < w->sssp.da[v].size() ? w->sssp.da[v][i] : dmax;
        xd[i] = Fe(da) - d + Fe::one();
      }
      std::vector<Fe> etv, eti, edv, edi;
      is_zero_witness(xt, etv, eti);
      is_zero_witness(xd, edv, edi);
      std::vector<Fe> gv(ext);
      for (size_t i = 0; i < ext; ++i) gv[i] = etv[i] * edv[i];
      b.assign(et[v], etv);
      b.assign(et_inv[v], eti);
      b.assign(ed[v], edv);
      b.assign(ed_inv[v], edi);
      b.assign(g[v], gv);
    }
  }
  out.segments.push_back(std::move(seg));
  return out;
}

}  // namespace zkgraph::ops
