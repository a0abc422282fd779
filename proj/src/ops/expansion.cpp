#include <algorithm>
#include <numeric>

#include "zkgraph/error.hpp"
#include "zkgraph/ops/ops.hpp"

namespace zkgraph::ops {

namespace {

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

void assign_output(CircuitBuilder& b, ColumnId os, ColumnId ot, const std::vector<Pair>& out,
                   size_t extent, Segment& seg) {
  if (out.size() > extent) {
    throw Error(ErrorCode::RowBudgetExceeded,
                std::to_string(out.size()) + " output rows exceed the budget of " +
                    std::to_string(extent));
  }
  std::vector<Fe> s(extent), t(extent);
  for (size_t i = 0; i < out.size(); ++i) {
    s[i] = Fe(out[i].first);
    t[i] = Fe(out[i].second);
  }
  b.assign(os, s);
  b.assign(ot, t);
  seg.data = {std::move(s), std::move(t)};
}

Relation output_relation(size_t native_rows) {
  Relation r;
  r.kind = RelKind::Edges;
  r.names = {"src", "dst"};
  r.native_rows = native_rows;
  return r;
}

}  // namespace

SingleExpansionWitness expand_single_witness(std::span<const uint64_t> a,
                                             std::span<const uint64_t> b, uint64_t id_s) {
  SingleExpansionWitness w;
  w.id_s = id_s;
  std::vector<Fe> diff(a.size());
  for (size_t i = 0; i < a.size(); ++i) diff[i] = Fe(a[i]) - Fe(id_s);
  is_zero_witness(diff, w.flags, w.nonmatch_inv);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == id_s) w.out.emplace_back(a[i], b[i]);
  }
  return w;
}

SingleExpansionWitness expand_single_witness(const GraphDb& db, uint64_t id_s) {
  if (!db.has_node(id_s)) {
    throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id_s));
  }
  return expand_single_witness(db.edges.src, db.edges.dst, id_s);
}

CsrExpansionWitness expand_single_csr_witness(const GraphDb& db, const CsrTables& csr,
                                              uint64_t id_s) {
  const auto idx = db.node_index(id_s);
  if (!idx) throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id_s));
  CsrExpansionWitness w;
  w.id_s = id_s;
  w.idx_s = *idx;
  w.l_s = csr.row[*idx];
  w.r_s = csr.row[*idx + 1];
  w.in_range.resize(csr.col.size());
  for (size_t k = 0; k < csr.col.size(); ++k) {
    w.in_range[k] = (k >= w.l_s && k < w.r_s) ? 1 : 0;
    if (w.in_range[k]) w.out.emplace_back(id_s, csr.col[k]);
  }
  return w;
}

SetExpansionWitness expand_set_witness(
    std::span<const std::pair<std::vector<uint64_t>, std::vector<uint64_t>>> views,
    std::span<const uint64_t> ids, uint64_t max_id) {
  SetExpansionWitness w;
  w.sorted.push_back(0);
  for (uint64_t x : ids) {
    if (x == max_id) throw Error(ErrorCode::SentinelCollision, std::to_string(x));
    if (x != 0) w.sorted.push_back(x);
  }
  std::sort(w.sorted.begin() + 1, w.sorted.end());
  w.sorted.erase(std::unique(w.sorted.begin(), w.sorted.end()), w.sorted.end());
  w.sorted.push_back(max_id);

  for (const auto& [a, b] : views) {
    SetViewWitness v;
    std::vector<size_t> order(a.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) {
      return std::tie(a[x], b[x]) < std::tie(a[y], b[y]);
    });
    std::vector<Fe> diff(a.size());
    for (size_t i = 0; i < order.size(); ++i) {
      const uint64_t sa = a[order[i]];
      v.sa.push_back(sa);
      v.sb.push_back(b[order[i]]);
      auto it = std::upper_bound(w.sorted.begin(), w.sorted.end(), sa);
      v.aux.push_back(*(it - 1));
      v.auxn.push_back(*it);
      diff[i] = Fe(sa) - Fe(v.aux.back());
      if (sa != 0 && sa == v.aux.back()) w.out.emplace_back(sa, v.sb.back());
    }
    is_zero_witness(diff, v.flags, v.inv);
    w.views.push_back(std::move(v));
  }
  return w;
}

SetExpansionWitness expand_set_witness(const GraphDb& db, std::span<const uint64_t> ids) {
  if (ids.empty()) throw Error(ErrorCode::BadParameter, "empty id set");
  const uint64_t max_id = db.schema.max_id();
  for (uint64_t x : ids) {
    if (x == max_id) throw Error(ErrorCode::SentinelCollision, std::to_string(x));
    if (!db.has_node(x)) throw Error(ErrorCode::UnknownNode, "node " + std::to_string(x));
  }
  std::vector<std::pair<std::vector<uint64_t>, std::vector<uint64_t>>> views;
  views.emplace_back(db.edges.src, db.edges.dst);
  if (!db.directed()) views.emplace_back(db.edges.dst, db.edges.src);
  return expand_set_witness(views, ids, max_id);
}

Relation expand_single(OpContext& ctx, const std::string& name, const Relation& edges,
                       uint64_t id_s, std::optional<size_t> out_rows) {
  require_edges(edges, "expand_single");
  auto& b = ctx.b;
  if (ctx.proving() && ctx.db && !ctx.db->has_node(id_s)) {
    throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id_s));
  }
  const size_t out_ext = out_rows.value_or(max_extent(edges));
  b.begin_region(name, "expand_single", std::max(max_extent(edges), out_ext),
                 edges.native_rows);
  const Relation in = import_relation(ctx, edges);
  Relation out = output_relation(edges.native_rows);

  for (size_t v = 0; v < in.segments.size(); ++v) {
    const Segment& seg = in.segments[v];
    const std::string tag = "v" + std::to_string(v);
    const size_t ext = seg.extent;
    const ColumnId q = b.selector(0, ext);
    const ColumnId fl = b.advice(tag + ".fl", ext);
    const ColumnId inv = b.advice(tag + ".inv", ext);
    const ColumnId ca = b.advice(tag + ".ca", ext);
    const ColumnId cb = b.advice(tag + ".cb", ext);
    const ColumnId os = b.advice(tag + ".out_src", out_ext);
    const ColumnId ot = b.advice(tag + ".out_dst", out_ext);
    const Expr a = cell(seg.cols[0]);
    const Expr bb = cell(seg.cols[1]);
    is_zero_gadget(b, tag + ".match", q, a - k(id_s), fl, inv);
    b.gate(tag + ".ca", q, cell(ca) - cell(fl) * a);
    b.gate(tag + ".cb", q, cell(cb) - cell(fl) * bb);
    b.permutation(tag + ".out", {os, ot}, {ca, cb});

    Segment o;
    o.cols = {os, ot};
    o.extent = out_ext;
    if (ctx.proving() && in.has_data()) {
      SingleExpansionWitness w;
      const size_t live = std::min(in.native_rows, ext);
      const auto av = values(std::span(seg.data[0]).first(live));
      const auto bv = values(std::span(seg.data[1]).first(live));
      {
        WitnessTimer t(ctx);
        w = expand_single_witness(av, bv, id_s);
      }
      w.flags.resize(ext, Fe::zero());
      w.nonmatch_inv.resize(ext, (-Fe(id_s)).inverse());
      std::vector<Fe> cav(ext), cbv(ext);
      for (size_t i = 0; i < ext; ++i) {
        cav[i] = w.flags[i] * seg.data[0][i];
        cbv[i] = w.flags[i] * seg.data[1][i];
      }
      b.assign(fl, w.flags);
      b.assign(inv, w.nonmatch_inv);
      b.assign(ca, cav);
      b.assign(cb, cbv);
      assign_output(b, os, ot, w.out, out_ext, o);
    }
    out.segments.push_back(std::move(o));
  }
  return out;
}

Relation expand_single_csr(OpContext& ctx, const std::string& name, uint64_t id_s,
                           std::optional<size_t> out_rows) {
  auto& b = ctx.b;
  const DbLayout& l = ctx.layout;
  if (!l.has_csr) throw Error(ErrorCode::BadDeclaration, "csr region missing");
  if (!ctx.schema.directed) {
    throw Error(ErrorCode::BadParameter, "expand_single_csr needs a directed edge kind");
  }
  const size_t nb = l.node_budget;
  const size_t eb = l.edge_budget;
  const unsigned bits = ctx.bits();
  if (eb > (size_t{1} << bits)) {
    throw Error(ErrorCode::BadParameter, "edge budget exceeds the id range");
  }
  if (ctx.proving() && ctx.db && !ctx.db->has_node(id_s)) {
    throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id_s));
  }
  const size_t out_ext = out_rows.value_or(eb);
  b.begin_region(name, "expand_single_csr", std::max(eb, out_ext), ctx.E());

  const ColumnId q0 = b.selector(0, 1);
  const ColumnId qc = b.selector(0, eb - 1);
  const ColumnId qe = b.selector(0, eb);
  const ColumnId kpos = b.positions(eb);
  const ColumnId npos = b.positions(nb);
  const ColumnId idx = b.advice("idx", eb);
  const ColumnId lo = b.advice("l", eb);
  const ColumnId hi = b.advice("r", eb);
  const ColumnId ge = b.advice("ge", eb);
  const ColumnId lt = b.advice("lt", eb);
  const ColumnId sel = b.advice("sel", eb);
  const ColumnId ca = b.advice("ca", eb);
  const ColumnId cb = b.advice("cb", eb);
  const ColumnId os = b.advice("out_src", out_ext);
  const ColumnId ot = b.advice("out_dst", out_ext);
  const Expr one = k(1);

  b.gate("idx.const", qc, cell(idx, 1) - cell(idx));
  b.gate("l.const", qc, cell(lo, 1) - cell(lo));
  b.gate("r.const", qc, cell(hi, 1) - cell(hi));
  b.gate("ge.bool", qe, cell(ge) * (one - cell(ge)));
  b.gate("lt.bool", qe, cell(lt) * (one - cell(lt)));
  b.gate("sel", qe, cell(sel) - cell(ge) * cell(lt));
  b.gate("ca", qe, cell(ca) - cell(sel) * k(id_s));
  b.gate("cb", qe, cell(cb) - cell(sel) * cell(l.col));

  const Expr kk = cell(kpos);
  range_check(b, "ge.range",
              cell(ge) * (kk - cell(lo)) + (one - cell(ge)) * (cell(lo) - one - kk),
              cell(qe), bits);
  range_check(b, "lt.range",
              cell(lt) * (cell(hi) - one - kk) + (one - cell(lt)) * (kk - cell(hi)),
              cell(qe), bits);
  b.lookup({"node", {cell(idx), k(id_s)}, {{{npos, l.nid}, {}, {}}}, cell(q0)});
  b.lookup({"row.l", {cell(idx), cell(lo)}, {{{npos, l.rowp}, {}, {}}}, cell(q0)});
  b.lookup({"row.r", {cell(idx) + one, cell(hi)}, {{{npos, l.rowp}, {}, {}}}, cell(q0)});
  b.permutation("out", {os, ot}, {ca, cb});

  Relation out = output_relation(ctx.E());
  Segment o;
  o.cols = {os, ot};
  o.extent = out_ext;
  if (ctx.proving() && ctx.db) {
    CsrTables csr;
    CsrExpansionWitness w;
    {
      WitnessTimer t(ctx);
      csr = to_csr(*ctx.db);
      w = expand_single_csr_witness(*ctx.db, csr, id_s);
    }
    std::vector<Fe> gev(eb), ltv(eb), selv(eb), cav(eb), cbv(eb);
    for (size_t i = 0; i < eb; ++i) {
      gev[i] = Fe(i >= w.l_s ? 1 : 0);
      ltv[i] = Fe(i < w.r_s ? 1 : 0);
      selv[i] = gev[i] * ltv[i];
      cav[i] = selv[i] * Fe(id_s);
      cbv[i] = selv[i] * Fe(i < csr.col.size() ? csr.col[i] : 0);
    }
    b.assign(idx, std::vector<Fe>(eb, Fe(w.idx_s)));
    b.assign(lo, std::vector<Fe>(eb, Fe(w.l_s)));
    b.assign(hi, std::vector<Fe>(eb, Fe(w.r_s)));
    b.assign(ge, gev);
    b.assign(lt, ltv);
    b.assign(sel, selv);
    b.assign(ca, cav);
    b.assign(cb, cbv);
    assign_output(b, os, ot, w.out, out_ext, o);
  }
  out.segments.push_back(std::move(o));
  return out;
}

Relation expand_set(OpContext& ctx, const std::string& name, const Relation& edges,
                    const SetInput& set, std::optional<size_t> out_rows) {
  require_edges(edges, "expand_set");
  auto& b = ctx.b;
  const uint64_t max_id = ctx.max_id();
  const unsigned bits = ctx.bits();

  size_t set_ext = 0;
  size_t set_native = 0;
  if (const auto* ids = std::get_if<std::vector<uint64_t>>(&set)) {
    if (ids->empty()) throw Error(ErrorCode::BadParameter, "empty id set");
    for (uint64_t x : *ids) {
      if (x == max_id) throw Error(ErrorCode::SentinelCollision, std::to_string(x));
      if (ctx.proving() && ctx.db && !ctx.db->has_node(x)) {
        throw Error(ErrorCode::UnknownNode, "node " + std::to_string(x));
      }
    }
    set_ext = ids->size();
    set_native = ids->size();
  } else {
    const auto& rel = std::get<Relation>(set);
    for (const auto& s : rel.segments) set_ext += s.extent;
    set_native = rel.native_rows * rel.segments.size();
  }

  const size_t view_ext = max_extent(edges);
  const size_t r = std::max(view_ext, set_ext + 2);
  const size_t out_ext = out_rows.value_or(view_ext);
  b.begin_region(name, "expand_set", std::max(r, out_ext),
                 std::max(edges.native_rows, set_native + 2));
  const Relation in = import_relation(ctx, edges);

  // Set columns.
  std::vector<ColumnId> sin;
  std::vector<size_t> sin_ext;
  std::vector<uint64_t> members;
  if (const auto* ids = std::get_if<std::vector<uint64_t>>(&set)) {
    std::vector<Fe> v;
    for (uint64_t x : *ids) v.push_back(Fe(x));
    sin.push_back(b.fixed("set", std::move(v)));
    sin_ext.push_back(ids->size());
    members = *ids;
  } else {
    const auto& rel = std::get<Relation>(set);
    const size_t idc = rel.id_column();
    for (size_t s = 0; s < rel.segments.size(); ++s) {
      const auto& seg = rel.segments[s];
      ColumnId c = seg.cols[idc];
      if (!rel.from_db) {
        const ColumnId nc = b.advice("set" + std::to_string(s), seg.extent);
        b.copy_rows(c, nc, seg.extent);
        if (!seg.data.empty()) b.assign(nc, seg.data[idc]);
        c = nc;
      }
      sin.push_back(c);
      sin_ext.push_back(seg.extent);
      if (!seg.data.empty()) {
        for (const Fe& x : seg.data[idc]) members.push_back(x.value());
      }
    }
  }

  // Sorted set with sentinels, and its consecutive pairs.
  const ColumnId idp = b.advice("sorted", r);
  const ColumnId t1 = b.advice("pair.lo", r - 1);
  const ColumnId t2 = b.advice("pair.hi", r - 1);
  const ColumnId qf = b.selector(0, 1);
  const ColumnId ql = b.selector(r - 1, r);
  const ColumnId qn = b.selector(0, r - 1);
  const ColumnId qr = b.selector(0, r);
  b.gate("sorted.first", qf, cell(idp));
  b.gate("sorted.last", ql, cell(idp) - k(max_id));
  b.gate("pair.lo", qn, cell(t1) - cell(idp));
  b.gate("pair.hi", qn, cell(t2) - cell(idp, 1));
  range_check(b, "sorted.order", cell(idp, 1) - cell(idp), cell(qn), bits);
  for (size_t s = 0; s < sin.size(); ++s) {
    b.lookup({"member" + std::to_string(s),
              {cell(sin[s])},
              {{{idp}, {}, {}}},
              cell(b.selector(0, sin_ext[s]))});
  }
  {
    std::vector<TableSource> tables;
    for (ColumnId c : sin) tables.push_back({{c}, {}, {}});
    tables.push_back({{}, {}, b.tuple_table("sentinels" + std::to_string(bits),
                                            {{Fe::zero()}, {Fe(max_id)}})});
    b.lookup({"sorted.member", {cell(idp)}, std::move(tables), cell(qr)});
  }

  const bool have_data = ctx.proving() && in.has_data() &&
                         (std::holds_alternative<std::vector<uint64_t>>(set) ||
                          std::get<Relation>(set).has_data());
  SetExpansionWitness w;
  if (have_data) {
    std::vector<std::pair<std::vector<uint64_t>, std::vector<uint64_t>>> views;
    for (const auto& seg : in.segments) {
      const size_t live = std::min(in.native_rows, seg.extent);
      views.emplace_back(values(std::span(seg.data[0]).first(live)),
                         values(std::span(seg.data[1]).first(live)));
    }
    std::erase(members, uint64_t{0});
    {
      WitnessTimer t(ctx);
      w = expand_set_witness(views, members, max_id);
    }
    // Padding rows are (0, 0) dummies and sort in front of the live rows.
    for (size_t v = 0; v < w.views.size(); ++v) {
      auto& vw = w.views[v];
      const size_t pad = in.segments[v].extent - vw.sa.size();
      vw.sa.insert(vw.sa.begin(), pad, 0);
      vw.sb.insert(vw.sb.begin(), pad, 0);
      vw.aux.insert(vw.aux.begin(), pad, 0);
      vw.auxn.insert(vw.auxn.begin(), pad, w.sorted[1]);
      vw.flags.insert(vw.flags.begin(), pad, Fe::one());
      vw.inv.insert(vw.inv.begin(), pad, Fe::zero());
    }
  }
  if (have_data) {
    std::vector<Fe> iv(r, Fe(max_id)), t1v(r - 1), t2v(r - 1);
    for (size_t i = 0; i + 1 < w.sorted.size(); ++i) iv[i] = Fe(w.sorted[i]);
    for (size_t i = 0; i + 1 < r; ++i) {
      t1v[i] = iv[i];
      t2v[i] = iv[i + 1];
    }
    b.assign(idp, iv);
    b.assign(t1, t1v);
    b.assign(t2, t2v);
  }

  Relation out = output_relation(edges.native_rows);
  for (size_t v = 0; v < in.segments.size(); ++v) {
    const Segment& seg = in.segments[v];
    const std::string tag = "v" + std::to_string(v);
    const size_t ext = seg.extent;
    const ColumnId q = b.selector(0, ext);
    const ColumnId q1 = b.selector(0, ext - 1);
    const ColumnId sa = b.advice(tag + ".sa", ext);
    const ColumnId sb = b.advice(tag + ".sb", ext);
    const ColumnId aux = b.advice(tag + ".aux", ext);
    const ColumnId auxn = b.advice(tag + ".auxn", ext);
    const ColumnId fl = b.advice(tag + ".fl", ext);
    const ColumnId inv = b.advice(tag + ".inv", ext);
    const ColumnId ca = b.advice(tag + ".ca", ext);
    const ColumnId cb = b.advice(tag + ".cb", ext);
    const ColumnId os = b.advice(tag + ".out_src", out_ext);
    const ColumnId ot = b.advice(tag + ".out_dst", out_ext);

    b.permutation(tag + ".sort", {sa, sb}, {seg.cols[0], seg.cols[1]});
    range_check(b, tag + ".order", cell(sa, 1) - cell(sa), cell(q1), bits);
    b.lookup({tag + ".bracket", {cell(aux), cell(auxn)}, {{{t1, t2}, {}, {}}}, cell(q)});
    range_check(b, tag + ".above", cell(sa) - cell(aux), cell(q), bits);
    range_check(b, tag + ".below", cell(auxn) - k(1) - cell(sa), cell(q), bits);
    is_zero_gadget(b, tag + ".match", q, cell(sa) - cell(aux), fl, inv);
    b.gate(tag + ".ca", q, cell(ca) - cell(fl) * cell(sa));
    b.gate(tag + ".cb", q, cell(cb) - cell(fl) * cell(sb));
    b.permutation(tag + ".out", {os, ot}, {ca, cb});

    Segment o;
    o.cols = {os, ot};
    o.extent = out_ext;
    if (have_data) {
      const SetViewWitness& vw = w.views[v];
      std::vector<Fe> sav(ext), sbv(ext), auxv(ext), auxnv(ext), cav(ext), cbv(ext);
      std::vector<Pair> pairs;
      for (size_t i = 0; i < ext; ++i) {
        sav[i] = Fe(vw.sa[i]);
        sbv[i] = Fe(vw.sb[i]);
        auxv[i] = Fe(vw.aux[i]);
        auxnv[i] = Fe(vw.auxn[i]);
        cav[i] = vw.flags[i] * sav[i];
        cbv[i] = vw.flags[i] * sbv[i];
        if (vw.sa[i] != 0 && !vw.flags[i].is_zero()) pairs.emplace_back(vw.sa[i], vw.sb[i]);
      }
      b.assign(sa, sav);
      b.assign(sb, sbv);
      b.assign(aux, auxv);
      b.assign(auxn, auxnv);
      b.assign(fl, vw.flags);
      b.assign(inv, vw.inv);
      b.assign(ca, cav);
      b.assign(cb, cbv);
      assign_output(b, os, ot, pairs, out_ext, o);
    }
    out.segments.push_back(std::move(o));
  }
  return out;
}

OpCount count_rows(OpKind kind, const CountInput& in) {
  OpCount c;
  switch (kind) {
    case OpKind::ExpandSingle:
      c.rows = in.view_rows;
      c.gates = 6 * in.views;
      c.perms = in.views;
      break;
    case OpKind::ExpandSingleCsr:
      c.rows = in.view_rows;
      c.gates = 8;
      c.lookups = 5;
      c.perms = 1;
      break;
    case OpKind::ExpandSet:
      c.rows = std::max(in.view_rows, in.set_size + 2);
      c.gates = 4 + 6 * in.views;
      c.lookups = 2 + in.set_columns + 4 * in.views;
      c.perms = 2 * in.views;
      break;
    default:
      throw Error(ErrorCode::BadParameter, "no closed form for this operator");
  }
  return c;
}

}  // namespace zkgraph::ops
