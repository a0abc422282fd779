#include <algorithm>
#include <numeric>

#include "zkgraph/error.hpp"
#include "zkgraph/ops/ops.hpp"

namespace zkgraph::ops {

namespace {

constexpr unsigned kLimbBits = 16;
constexpr uint64_t kWideBound = uint64_t{1} << (2 * kLimbBits);
// Largest packed sort key; effective keys then stay below 2^32.
constexpr uint64_t kKeyLimit = kWideBound - 2;

size_t max_extent(const Relation& r) {
  size_t m = 0;
  for (const auto& s : r.segments) m = std::max(m, s.extent);
  return m;
}

// A property value per row of every segment.
struct PropColumn {
  std::vector<ColumnId> cols;
  std::vector<std::vector<Fe>> data;
  bool is_string = false;
};

bool prop_is_string(const Schema& schema, const std::string& prop) {
  if (auto i = schema.node_prop(prop)) return schema.node_props[*i].type == PropType::String;
  if (auto i = schema.edge_prop(prop)) return schema.edge_props[*i].type == PropType::String;
  return false;
}

PropColumn resolve_prop(OpContext& ctx, const Relation& in, const std::string& prop) {
  auto& b = ctx.b;
  PropColumn p;
  p.is_string = prop_is_string(ctx.schema, prop);
  if (auto c = in.column(prop)) {
    for (const auto& seg : in.segments) {
      p.cols.push_back(seg.cols[*c]);
      if (!seg.data.empty()) p.data.push_back(seg.data[*c]);
    }
    return p;
  }
  const auto np = ctx.schema.node_prop(prop);
  if (!np) throw Error(ErrorCode::BadParameter, "unknown property " + prop);
  const size_t idc = in.id_column();
  const ColumnId table_col = ctx.layout.node_props[*np];
  for (size_t s = 0; s < in.segments.size(); ++s) {
    const auto& seg = in.segments[s];
    const ColumnId pv = b.advice(prop + std::to_string(s), seg.extent);
    b.lookup({prop + std::to_string(s) + ".lookup",
              {cell(seg.cols[idc]), cell(pv)},
              {{{ctx.layout.nid, table_col}, {}, {}}},
              cell(b.selector(0, seg.extent))});
    p.cols.push_back(pv);
    if (!seg.data.empty() && ctx.db) {
      std::vector<Fe> v(seg.extent);
      for (size_t i = 0; i < seg.extent; ++i) {
        const uint64_t id = seg.data[idc][i].value();
        if (id == 0) continue;
        const auto idx = ctx.db->node_index(id);
        if (!idx) throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id));
        v[i] = ctx.db->nodes.props[*np][*idx];
      }
      b.assign(pv, v);
      p.data.push_back(std::move(v));
    }
  }
  return p;
}

// Selected copies sc_j = flag * col_j and the compacted output columns.
Segment select_rows(CircuitBuilder& b, const std::string& tag, const Segment& seg,
                    const std::vector<std::string>& names, ColumnId q, ColumnId flag,
                    size_t out_ext, const std::vector<Fe>* flags) {
  std::vector<ColumnId> sc, out;
  for (size_t j = 0; j < seg.cols.size(); ++j) {
    sc.push_back(b.advice(tag + ".sel." + names[j], seg.extent));
    out.push_back(b.advice(tag + ".out." + names[j], out_ext));
    b.gate(tag + ".sel." + names[j], q, cell(sc[j]) - cell(flag) * cell(seg.cols[j]));
  }
  b.permutation(tag + ".out", out, sc);

  Segment o;
  o.cols = out;
  o.extent = out_ext;
  if (flags) {
    std::vector<size_t> rows;
    for (size_t i = 0; i < seg.extent; ++i) {
      if ((*flags)[i].is_zero()) continue;
      bool live = false;
      for (const auto& col : seg.data) live |= !col[i].is_zero();
      if (live) rows.push_back(i);
    }
    if (rows.size() > out_ext) {
      throw Error(ErrorCode::RowBudgetExceeded,
                  std::to_string(rows.size()) + " output rows exceed the budget of " +
                      std::to_string(out_ext));
    }
    for (size_t j = 0; j < seg.cols.size(); ++j) {
      std::vector<Fe> s(seg.extent), ov(out_ext);
      for (size_t i = 0; i < seg.extent; ++i) s[i] = (*flags)[i] * seg.data[j][i];
      for (size_t r = 0; r < rows.size(); ++r) ov[r] = seg.data[j][rows[r]];
      b.assign(sc[j], std::move(s));
      b.assign(out[j], ov);
      o.data.push_back(std::move(ov));
    }
  }
  return o;
}

void assign_limbs(CircuitBuilder& b, std::pair<ColumnId, ColumnId> limbs,
                  const std::vector<uint64_t>& values) {
  std::vector<Fe> hi(values.size()), lo(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    hi[i] = Fe(values[i] >> kLimbBits);
    lo[i] = Fe(values[i] & ((uint64_t{1} << kLimbBits) - 1));
  }
  b.assign(limbs.first, std::move(hi));
  b.assign(limbs.second, std::move(lo));
}

uint64_t narrow(const Fe& v, const std::string& what) {
  if (v.value() >= kWideBound) {
    throw Error(ErrorCode::BadParameter, what + " value " + v.to_string() + " exceeds 2^32");
  }
  return v.value();
}

}  // namespace

CanonWitness canonicalize_witness(std::span<const uint64_t> a, std::span<const uint64_t> b,
                                  unsigned bits) {
  CanonWitness w;
  const uint64_t bound = uint64_t{1} << bits;
  w.ea.assign(a.begin(), a.end());
  w.eb.assign(b.begin(), b.end());
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] >= bound || b[i] >= bound) {
      throw Error(ErrorCode::IdOutOfRange, "edge row " + std::to_string(i));
    }
    w.l.push_back(std::min(a[i], b[i]));
    w.h.push_back(std::max(a[i], b[i]));
  }
  return w;
}

TopKWitness topk_witness(std::span<const uint64_t> keys, std::span<const uint8_t> dummy,
                         size_t k, Order order, uint64_t key_limit) {
  if (k == 0 || k > keys.size()) {
    throw Error(ErrorCode::BadParameter, "k = " + std::to_string(k) + " over " +
                                             std::to_string(keys.size()) + " rows");
  }
  TopKWitness w;
  w.eff.resize(keys.size());
  for (size_t i = 0; i < keys.size(); ++i) {
    if (dummy[i]) continue;
    if (keys[i] > key_limit) {
      throw Error(ErrorCode::BadParameter, "sort key " + std::to_string(keys[i]) +
                                               " exceeds " + std::to_string(key_limit));
    }
    w.eff[i] = order == Order::Desc ? keys[i] + 1 : key_limit - keys[i] + 1;
  }
  std::vector<size_t> idx(keys.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return w.eff[a] > w.eff[b]; });
  w.is_k.assign(keys.size(), 0);
  for (size_t i = 0; i < k; ++i) w.is_k[idx[i]] = 1;
  w.val_k = w.eff[idx[k - 1]];
  return w;
}

Relation canon(OpContext& ctx, const std::string& name, const Relation& edges) {
  if (edges.kind != RelKind::Edges || edges.segments.size() != 1) {
    throw Error(ErrorCode::TypeMismatch, "canon expects a single-view edge relation");
  }
  auto& b = ctx.b;
  const size_t ext = edges.segments[0].extent;
  b.begin_region(name, "canon", ext, edges.native_rows);
  const Relation in = import_relation(ctx, edges);
  const Segment& seg = in.segments[0];

  const ColumnId q = b.selector(0, ext);
  const ColumnId lo = b.advice("l", ext);
  const ColumnId hi = b.advice("h", ext);
  const Expr a = cell(seg.cols[0]);
  const Expr bb = cell(seg.cols[1]);
  b.gate("sum", q, a + bb - cell(lo) - cell(hi));
  b.gate("product", q, a * bb - cell(lo) * cell(hi));
  range_check(b, "order", cell(hi) - cell(lo), cell(q), ctx.bits());

  Relation out;
  out.kind = RelKind::Edges;
  out.names = in.names;
  out.native_rows = in.native_rows;
  Segment fwd, rev;
  fwd.cols = seg.cols;
  fwd.cols[0] = lo;
  fwd.cols[1] = hi;
  rev.cols = seg.cols;
  rev.cols[0] = hi;
  rev.cols[1] = lo;
  fwd.extent = rev.extent = ext;

  if (ctx.proving() && in.has_data()) {
    const size_t live = std::min(in.native_rows, ext);
    std::vector<uint64_t> av(live), bv(live);
    for (size_t i = 0; i < live; ++i) {
      av[i] = seg.data[0][i].value();
      bv[i] = seg.data[1][i].value();
    }
    CanonWitness w;
    {
      WitnessTimer t(ctx);
      w = canonicalize_witness(av, bv, ctx.bits());
    }
    std::vector<Fe> lv = padded(to_fe(w.l), ext), hv = padded(to_fe(w.h), ext);
    b.assign(lo, lv);
    b.assign(hi, hv);
    fwd.data = seg.data;
    fwd.data[0] = lv;
    fwd.data[1] = hv;
    rev.data = seg.data;
    rev.data[0] = hv;
    rev.data[1] = lv;
  }
  out.segments.push_back(std::move(fwd));
  out.segments.push_back(std::move(rev));
  return out;
}

Relation filter(OpContext& ctx, const std::string& name, const Relation& in_rel,
                const std::string& prop, CmpOp op, const FilterValue& value,
                std::optional<size_t> out_rows) {
  if (in_rel.segments.empty()) throw Error(ErrorCode::TypeMismatch, "filter input is empty");
  auto& b = ctx.b;
  const size_t ext_max = max_extent(in_rel);
  b.begin_region(name, "filter", std::max(ext_max, out_rows.value_or(0)), in_rel.native_rows);
  const Relation in = import_relation(ctx, in_rel);
  const PropColumn p = resolve_prop(ctx, in, prop);

  if (p.is_string != value.is_string) {
    throw Error(ErrorCode::TypeMismatch, "property " + prop + " compared with a " +
                                             (value.is_string ? "string" : "number"));
  }
  if (p.is_string && op != CmpOp::Eq) {
    throw Error(ErrorCode::TypeMismatch, "string property " + prop + " only supports =");
  }
  Fe c;
  if (value.is_string) {
    c = hash_to_field(value.text);
  } else if (op == CmpOp::Eq) {
    c = Fe::from_i64(value.number);
  } else {
    if (value.number < 0 || static_cast<uint64_t>(value.number) >= kWideBound) {
      throw Error(ErrorCode::BadParameter, "comparison bound must lie in [0, 2^32)");
    }
    c = Fe(static_cast<uint64_t>(value.number));
  }
  const Expr one = k(1);
  const Expr ce(c);

  Relation out;
  out.kind = in.kind;
  out.names = in.names;
  out.native_rows = in.native_rows;
  for (size_t s = 0; s < in.segments.size(); ++s) {
    const Segment& seg = in.segments[s];
    const std::string tag = "v" + std::to_string(s);
    const size_t ext = seg.extent;
    const size_t out_ext = out_rows.value_or(ext);
    const ColumnId q = b.selector(0, ext);
    const ColumnId fl = b.advice(tag + ".keep", ext);
    const Expr pv = cell(p.cols[s]);
    const Expr f = cell(fl);
    std::optional<ColumnId> inv;
    std::optional<std::pair<ColumnId, ColumnId>> limbs;
    if (op == CmpOp::Eq) {
      inv = b.advice(tag + ".keep.inv", ext);
      is_zero_gadget(b, tag + ".keep", q, pv - ce, fl, *inv);
    } else {
      b.gate(tag + ".keep.bool", q, f * (one - f));
      const Expr d = op == CmpOp::Ge ? f * (pv - ce) + (one - f) * (ce - one - pv)
                                     : f * (ce - pv) + (one - f) * (pv - ce - one);
      limbs = range_check_wide(b, tag + ".cmp", d, q, ext, kLimbBits);
    }

    std::vector<Fe> flags;
    const bool witness = ctx.proving() && !p.data.empty();
    if (witness) {
      WitnessTimer t(ctx);
      const auto& pvals = p.data[s];
      if (op == CmpOp::Eq) {
        std::vector<Fe> x(ext), iv;
        for (size_t i = 0; i < ext; ++i) x[i] = pvals[i] - c;
        is_zero_witness(x, flags, iv);
        b.assign(*inv, iv);
      } else {
        flags.resize(ext);
        std::vector<uint64_t> d(ext);
        const uint64_t cv = c.value();
        for (size_t i = 0; i < ext; ++i) {
          const uint64_t v = narrow(pvals[i], prop);
          const bool keep = op == CmpOp::Ge ? v >= cv : v <= cv;
          flags[i] = Fe(keep ? 1 : 0);
          if (op == CmpOp::Ge) {
            d[i] = keep ? v - cv : cv - 1 - v;
          } else {
            d[i] = keep ? cv - v : v - cv - 1;
          }
        }
        assign_limbs(b, *limbs, d);
      }
      b.assign(fl, flags);
    }
    out.segments.push_back(
        select_rows(b, tag, seg, in.names, q, fl, out_ext, witness ? &flags : nullptr));
  }
  return out;
}

Relation topk(OpContext& ctx, const std::string& name, const Relation& in_rel,
              const std::string& key, size_t kk, Order order,
              const std::optional<std::string>& key2, std::optional<size_t> out_rows) {
  if (in_rel.segments.empty()) throw Error(ErrorCode::TypeMismatch, "topk input is empty");
  size_t total = 0;
  for (const auto& s : in_rel.segments) total += s.extent;
  if (kk == 0 || kk > total) {
    throw Error(ErrorCode::BadParameter, "k = " + std::to_string(kk) + " over " +
                                             std::to_string(total) + " rows");
  }
  auto& b = ctx.b;
  const size_t out_ext = out_rows.value_or(kk);
  const size_t rows = std::max(max_extent(in_rel), out_ext);
  b.begin_region(name, "topk", rows, in_rel.native_rows);
  const Relation in = import_relation(ctx, in_rel);
  const PropColumn p1 = resolve_prop(ctx, in, key);
  std::optional<PropColumn> p2;
  if (key2) p2 = resolve_prop(ctx, in, *key2);
  if (p1.is_string || (p2 && p2->is_string)) {
    throw Error(ErrorCode::TypeMismatch, "topk keys must be integers");
  }
  const Expr one = k(1);

  const ColumnId valk = b.advice("kth", rows);
  b.gate("kth.const", b.selector(0, rows - 1), cell(valk, 1) - cell(valk));

  const bool witness = ctx.proving() && in.has_data() && !p1.data.empty();
  TopKWitness w;
  if (witness) {
    std::vector<uint64_t> keys;
    std::vector<uint8_t> dummy;
    for (size_t s = 0; s < in.segments.size(); ++s) {
      const auto& seg = in.segments[s];
      for (size_t i = 0; i < seg.extent; ++i) {
        const bool dum = seg.data[0][i].is_zero();
        dummy.push_back(dum ? 1 : 0);
        uint64_t kv = 0;
        if (!dum) {
          kv = key2 ? (narrow(p1.data[s][i], key) << kLimbBits)
                    : narrow(p1.data[s][i], key);
          if (key2) {
            const uint64_t k2 = narrow(p2->data[s][i], *key2);
            if (k2 >> kLimbBits) {
              throw Error(ErrorCode::BadParameter, "secondary key exceeds 2^16");
            }
            kv |= k2;
          }
        }
        keys.push_back(kv);
      }
    }
    WitnessTimer t(ctx);
    w = topk_witness(keys, dummy, kk, order, kKeyLimit);
    b.assign(valk, std::vector<Fe>(rows, Fe(w.val_k)));
  }

  Relation out;
  out.kind = in.kind;
  out.names = in.names;
  out.native_rows = std::min(kk, in.native_rows);
  std::vector<TableSource> chosen;
  std::optional<ColumnId> prev_run;
  size_t prev_ext = 0;
  size_t offset = 0;
  for (size_t s = 0; s < in.segments.size(); ++s) {
    const Segment& seg = in.segments[s];
    const std::string tag = "v" + std::to_string(s);
    const size_t ext = seg.extent;
    const ColumnId q = b.selector(0, ext);
    const ColumnId qf = b.selector(0, 1);
    const ColumnId dum = b.advice(tag + ".dummy", ext);
    const ColumnId dum_inv = b.advice(tag + ".dummy.inv", ext);
    const ColumnId ek = b.advice(tag + ".key", ext);
    const ColumnId isk = b.advice(tag + ".top", ext);
    const ColumnId run = b.advice(tag + ".count", ext);

    is_zero_gadget(b, tag + ".dummy", q, cell(seg.cols[0]), dum, dum_inv);
    Expr packed = cell(p1.cols[s]);
    if (p2) packed = packed * k(uint64_t{1} << kLimbBits) + cell(p2->cols[s]);
    const Expr eff = order == Order::Desc ? packed + one : k(kKeyLimit) - packed + one;
    b.gate(tag + ".key", q, cell(ek) - (one - cell(dum)) * eff);
    b.gate(tag + ".top.bool", q, cell(isk) * (one - cell(isk)));
    std::optional<ColumnId> carry;
    if (prev_run) {
      carry = b.advice(tag + ".carry", 1);
      b.copy({*prev_run, prev_ext - 1}, {*carry, 0});
      b.gate(tag + ".count.first", qf, cell(run) - cell(*carry) - cell(isk));
    } else {
      b.gate(tag + ".count.first", qf, cell(run) - cell(isk));
    }
    if (ext > 1) {
      b.gate(tag + ".count.step", b.selector(0, ext - 1),
             cell(run, 1) - cell(run) - cell(isk, 1));
    }
    if (s + 1 == in.segments.size()) {
      b.gate(tag + ".count.last", b.selector(ext - 1, ext), cell(run) - k(kk));
    }
    const Expr cmp = cell(isk) * (cell(ek) - cell(valk)) + (one - cell(isk)) * (cell(valk) - cell(ek));
    const auto limbs = range_check_wide(b, tag + ".cmp", cmp, q, ext, kLimbBits);
    chosen.push_back({{isk, ek}, {}, {}});

    std::vector<Fe> flags;
    if (witness) {
      std::vector<Fe> dv, di, ekv(ext), runv(ext);
      is_zero_witness(seg.data[0], dv, di);
      std::vector<uint64_t> cmpv(ext);
      flags.resize(ext);
      uint64_t acc = 0;
      for (size_t i = 0; i < ext; ++i) {
        const size_t g = offset + i;
        flags[i] = Fe(w.is_k[g]);
        ekv[i] = Fe(w.eff[g]);
        acc += w.is_k[g];
        runv[i] = Fe(acc);
        cmpv[i] = w.is_k[g] ? w.eff[g] - w.val_k : w.val_k - w.eff[g];
      }
      if (carry) {
        const uint64_t before = std::accumulate(w.is_k.begin(), w.is_k.begin() + offset, 0ull);
        b.assign(*carry, {Fe(before)});
        for (auto& r : runv) r = r + Fe(before);
      }
      b.assign(dum, dv);
      b.assign(dum_inv, di);
      b.assign(ek, ekv);
      b.assign(isk, flags);
      b.assign(run, runv);
      assign_limbs(b, limbs, cmpv);
    }
    out.segments.push_back(
        select_rows(b, tag, seg, in.names, q, isk, out_ext, witness ? &flags : nullptr));
    prev_run = run;
    prev_ext = ext;
    offset += ext;
  }
  b.lookup({"kth.member", {one, cell(valk)}, std::move(chosen), cell(b.selector(0, 1))});
  return out;
}

void project(OpContext& ctx, const std::string& name, const Relation& in,
             const std::vector<ProjectItem>& items) {
  if (items.empty()) throw Error(ErrorCode::BadParameter, "project needs at least one item");
  if (in.segments.empty()) throw Error(ErrorCode::TypeMismatch, "project input is empty");
  auto& b = ctx.b;
  const size_t m = items.size();
  b.begin_region(name, "project", m, 0);
  const ColumnId xs = b.instance("key", m);
  const ColumnId vs = b.instance("value", m);
  const size_t idc = in.id_column();

  std::vector<std::string> columns;
  for (const auto& it : items) {
    if (!in.column(it.column)) {
      throw Error(ErrorCode::BadParameter, "unknown column " + it.column);
    }
    if (std::find(columns.begin(), columns.end(), it.column) == columns.end()) {
      columns.push_back(it.column);
    }
  }
  for (const auto& col : columns) {
    const size_t c = *in.column(col);
    std::vector<Fe> sel(m);
    for (size_t i = 0; i < m; ++i) sel[i] = Fe(items[i].column == col ? 1 : 0);
    const ColumnId q = b.fixed("q." + col, std::move(sel));
    std::vector<TableSource> tables;
    for (const auto& seg : in.segments) tables.push_back({{seg.cols[idc], seg.cols[c]}, {}, {}});
    b.lookup({"lookup." + col, {cell(xs), cell(vs)}, std::move(tables), cell(q)});
  }

  if (ctx.proving() && in.has_data()) {
    std::vector<Fe> xv(m), vv(m);
    WitnessTimer t(ctx);
    for (size_t i = 0; i < m; ++i) {
      const size_t c = *in.column(items[i].column);
      const Fe key(items[i].key);
      bool found = false;
      for (const auto& seg : in.segments) {
        for (size_t r = 0; r < seg.extent && !found; ++r) {
          if (seg.data[idc][r] == key && !key.is_zero()) {
            vv[i] = seg.data[c][r];
            found = true;
          }
        }
        if (found) break;
      }
      if (!found) {
        throw Error(ErrorCode::UnknownNode, "node " + std::to_string(items[i].key) +
                                                " is not in the projected relation");
      }
      xv[i] = key;
    }
    b.set_instance(xs, xv);
    b.set_instance(vs, vv);
  }
}

}  // namespace zkgraph::ops
