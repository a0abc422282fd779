#include "zkgraph/constraint_table.hpp"

#include <algorithm>
#include <array>
#include <sstream>
#include <unordered_set>

#include "zkgraph/error.hpp"
#include "zkgraph/field_kernels.hpp"

namespace zkgraph {

namespace {

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

using Tuple = std::array<uint64_t, kMaxLookupArity>;

struct TupleHash {
  size_t operator()(const Tuple& t) const noexcept {
    uint64_t h = 0x9E3779B97F4A7C15ULL;
    for (uint64_t v : t) {
      h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
      h *= 0xBF58476D1CE4E5B9ULL;
    }
    return static_cast<size_t>(h ^ (h >> 31));
  }
};

std::string tuple_string(const Tuple& t, size_t arity) {
  std::string s = "(";
  for (size_t i = 0; i < arity; ++i) {
    if (i) s += ", ";
    s += std::to_string(t[i]);
  }
  return s + ")";
}

}  // namespace

bool ConstraintTable::has_column(ColumnId id) const { return index_.contains(id); }

size_t ConstraintTable::position(ColumnId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorCode::UnknownColumn, to_string(id));
  return it->second;
}

const ColumnDecl& ConstraintTable::decl(ColumnId id) const {
  return spec_.columns[position(id)];
}

size_t ConstraintTable::extent(ColumnId id) const {
  return std::min(decl(id).extent, n_rows_);
}

std::span<const Fe> ConstraintTable::column(ColumnId id) const {
  return values_[position(id)];
}

void ConstraintTable::assign_column(ColumnId id, std::span<const Fe> values) {
  const size_t pos = position(id);
  if (values.size() > extent(id)) {
    throw Error(ErrorCode::TooManyRows,
                to_string(id) + ": " + std::to_string(values.size()) +
                    " values for " + std::to_string(extent(id)) + " rows");
  }
  std::copy(values.begin(), values.end(), values_[pos].begin());
}

void ConstraintTable::set_cell(ColumnId id, size_t row, Fe value) {
  const size_t pos = position(id);
  if (row >= extent(id)) {
    throw Error(ErrorCode::TooManyRows, to_string(id) + " row " + std::to_string(row));
  }
  values_[pos][row] = value;
}

ConstraintTable build_table(CircuitSpec spec, size_t n_rows) {
  if (!is_pow2(n_rows)) {
    throw Error(ErrorCode::RowsNotPowerOfTwo, std::to_string(n_rows));
  }
  ConstraintTable t;
  t.n_rows_ = n_rows;
  for (size_t i = 0; i < spec.columns.size(); ++i) {
    if (!t.index_.emplace(spec.columns[i].id, i).second) {
      throw Error(ErrorCode::BadDeclaration,
                  "duplicate column " + to_string(spec.columns[i].id));
    }
  }
  auto require = [&](ColumnId id) {
    if (!t.index_.contains(id)) throw Error(ErrorCode::UnknownColumn, to_string(id));
  };
  auto require_expr = [&](const Expr& e, const std::string& where) {
    e.for_each_cell([&](ColumnId id, int rot) {
      require(id);
      if (rot > kMaxRotation || rot < -kMaxRotation) {
        throw Error(ErrorCode::BadDeclaration, where + ": rotation out of range");
      }
    });
  };

  for (const auto& g : spec.gates) {
    require(g.selector);
    if (g.selector.kind != ColumnKind::Fixed) {
      throw Error(ErrorCode::BadDeclaration, g.name + ": selector must be fixed");
    }
    require_expr(g.poly, g.name);
    if (g.poly.degree() + 1 > kMaxGateDegree) {
      throw Error(ErrorCode::BadDeclaration,
                  g.name + ": degree " + std::to_string(g.poly.degree() + 1));
    }
  }

  for (const auto& l : spec.lookups) {
    const size_t arity = l.inputs.size();
    if (arity == 0 || arity > kMaxLookupArity) {
      throw Error(ErrorCode::BadArity, l.name + ": arity " + std::to_string(arity));
    }
    for (const auto& e : l.inputs) require_expr(e, l.name);
    if (l.selector) require_expr(*l.selector, l.name);
    if (l.tables.empty()) throw Error(ErrorCode::BadDeclaration, l.name + ": no table");
    for (const auto& src : l.tables) {
      if (src.fixed_table) {
        if (*src.fixed_table >= spec.fixed_tables.size()) {
          throw Error(ErrorCode::BadDeclaration, l.name + ": unknown fixed table");
        }
        const auto& ft = spec.fixed_tables[*src.fixed_table];
        if (ft.arity != arity) {
          throw Error(ErrorCode::BadArity, l.name + " vs table " + ft.name);
        }
        if (ft.is_range() && ft.arity != 1) {
          throw Error(ErrorCode::BadDeclaration, ft.name + ": range table arity");
        }
        for (const auto& row : ft.rows) {
          if (row.size() != ft.arity) throw Error(ErrorCode::BadArity, ft.name);
        }
      } else {
        if (src.columns.size() != arity) {
          throw Error(ErrorCode::BadArity,
                      l.name + ": " + std::to_string(arity) + "-tuple input vs " +
                          std::to_string(src.columns.size()) + "-column table");
        }
        for (auto c : src.columns) require(c);
        if (src.selector) {
          require(*src.selector);
          if (src.selector->kind != ColumnKind::Fixed) {
            throw Error(ErrorCode::BadDeclaration, l.name + ": table selector must be fixed");
          }
        }
      }
    }
  }

  for (const auto& p : spec.perms) {
    if (p.left.empty() || p.left.size() != p.right.size()) {
      throw Error(ErrorCode::BadArity, p.name);
    }
    for (auto c : p.left) require(c);
    for (auto c : p.right) require(c);
    for (const auto& sel : {p.left_selector, p.right_selector}) {
      if (!sel) continue;
      require(*sel);
      if (sel->kind != ColumnKind::Fixed) {
        throw Error(ErrorCode::BadDeclaration, p.name + ": selector must be fixed");
      }
    }
    require(p.z);
    const auto& zd = spec.columns[t.index_.at(p.z)];
    if (p.z.kind != ColumnKind::Advice || zd.phase != 2) {
      throw Error(ErrorCode::BadDeclaration, p.name + ": z must be phase-2 advice");
    }
  }

  auto require_cell = [&](const CellRef& c) {
    require(c.column);
    if (c.row >= n_rows) throw Error(ErrorCode::BadDeclaration, "cell row out of range");
  };
  for (const auto& c : spec.copies) {
    require_cell(c.a);
    require_cell(c.b);
  }
  for (const auto& b : spec.instance_bindings) {
    require_cell(b.cell);
    require_cell(b.instance);
    if (b.instance.column.kind != ColumnKind::Instance) {
      throw Error(ErrorCode::BadDeclaration, "binding target must be an instance column");
    }
  }

  t.values_.assign(spec.columns.size(), std::vector<Fe>(n_rows));
  t.spec_ = std::move(spec);
  return t;
}

std::string_view to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::Gate:
      return "gate";
    case FailureKind::Lookup:
      return "lookup";
    case FailureKind::Permutation:
      return "permutation";
    case FailureKind::Copy:
      return "copy";
    case FailureKind::Instance:
      return "instance";
  }
  return "?";
}

std::string VerdictReport::serialize() const {
  std::ostringstream os;
  os << (satisfied ? "satisfied" : "unsatisfied") << " failures=" << failures.size()
     << "\n";
  for (const auto& f : failures) {
    os << to_string(f.kind) << " " << f.index << " row " << f.row << ": " << f.detail
       << "\n";
  }
  return os.str();
}

std::vector<Fe> compress_columns(const ConstraintTable& table,
                                 std::span<const ColumnId> columns, Fe alpha) {
  const auto& k = kernels::active();
  std::vector<Fe> acc(table.n_rows());
  // Horner: ((c_{m-1}) * alpha + c_{m-2}) * alpha + ... + c_0
  for (size_t j = columns.size(); j-- > 0;) {
    k.mul_scalar(acc, acc, alpha);
    k.add(acc, acc, table.column(columns[j]));
  }
  return acc;
}

namespace {

// Numerator/denominator factor per row: sel * (c + beta) + (1 - sel).
std::vector<Fe> perm_factors(const ConstraintTable& table,
                             std::span<const ColumnId> cols,
                             const std::optional<ColumnId>& selector, Fe alpha,
                             Fe beta) {
  const auto& k = kernels::active();
  auto c = compress_columns(table, cols, alpha);
  k.add_scalar(c, c, beta);
  if (selector) {
    auto sel = table.column(*selector);
    for (size_t i = 0; i < c.size(); ++i) {
      if (sel[i].is_zero()) {
        c[i] = Fe::one();
      } else if (sel[i] != Fe::one()) {
        c[i] = sel[i] * c[i] + (Fe::one() - sel[i]);
      }
    }
  }
  return c;
}

void require_challenges(const ConstraintTable& table) {
  if (!table.spec().perms.empty() && table.challenges().size() < 2) {
    throw Error(ErrorCode::ChallengesMissing, "permutation arguments need alpha and beta");
  }
}

void check_gates(const ConstraintTable& table, std::vector<Failure>& out) {
  const auto& gates = table.spec().gates;
  for (size_t gi = 0; gi < gates.size(); ++gi) {
    const auto& g = gates[gi];
    auto sel = table.column(g.selector);
    if (std::all_of(sel.begin(), sel.end(), [](Fe v) { return v.is_zero(); })) continue;
    const auto vals = g.poly.evaluate_all(table);
    for (size_t r = 0; r < vals.size(); ++r) {
      if (!(sel[r] * vals[r]).is_zero()) {
        out.push_back({FailureKind::Gate, gi, r,
                       g.name + " evaluates to " + (sel[r] * vals[r]).to_string()});
      }
    }
  }
}

void check_lookups(const ConstraintTable& table, std::vector<Failure>& out) {
  const auto& spec = table.spec();
  const size_t n = table.n_rows();
  for (size_t li = 0; li < spec.lookups.size(); ++li) {
    const auto& l = spec.lookups[li];
    const size_t arity = l.inputs.size();

    std::vector<uint8_t> active(n, 1);
    if (l.selector) {
      const auto s = l.selector->evaluate_all(table);
      for (size_t r = 0; r < n; ++r) active[r] = !s[r].is_zero();
    }
    if (std::none_of(active.begin(), active.end(), [](uint8_t a) { return a != 0; })) {
      continue;
    }

    std::unordered_set<Tuple, TupleHash> set;
    std::optional<uint64_t> range_bound;
    for (const auto& src : l.tables) {
      if (src.fixed_table) {
        const auto& ft = spec.fixed_tables[*src.fixed_table];
        if (ft.is_range()) {
          range_bound = std::max(range_bound.value_or(0), ft.range_bound);
          continue;
        }
        for (const auto& row : ft.rows) {
          Tuple t{};
          for (size_t j = 0; j < arity; ++j) t[j] = row[j].value();
          set.insert(t);
        }
        continue;
      }
      size_t rows = n;
      for (auto c : src.columns) rows = std::min(rows, table.extent(c));
      std::vector<std::span<const Fe>> cols;
      for (auto c : src.columns) cols.push_back(table.column(c));
      std::span<const Fe> sel;
      if (src.selector) sel = table.column(*src.selector);
      for (size_t r = 0; r < rows; ++r) {
        if (src.selector && sel[r].is_zero()) continue;
        Tuple t{};
        for (size_t j = 0; j < arity; ++j) t[j] = cols[j][r].value();
        set.insert(t);
      }
    }

    std::vector<std::vector<Fe>> inputs;
    inputs.reserve(arity);
    for (const auto& e : l.inputs) inputs.push_back(e.evaluate_all(table));
    for (size_t r = 0; r < n; ++r) {
      if (!active[r]) continue;
      Tuple t{};
      for (size_t j = 0; j < arity; ++j) t[j] = inputs[j][r].value();
      if (range_bound && arity == 1 && t[0] < *range_bound) continue;
      if (set.contains(t)) continue;
      out.push_back({FailureKind::Lookup, li, r,
                     l.name + ": " + tuple_string(t, arity) + " not in table"});
    }
  }
}

void check_perms(const ConstraintTable& table, std::vector<Failure>& out) {
  const auto& perms = table.spec().perms;
  if (perms.empty()) return;
  const Fe alpha = table.challenges()[0];
  const Fe beta = table.challenges()[1];
  const size_t n = table.n_rows();
  for (size_t pi = 0; pi < perms.size(); ++pi) {
    const auto& p = perms[pi];
    const auto num = perm_factors(table, p.left, p.left_selector, alpha, beta);
    const auto den = perm_factors(table, p.right, p.right_selector, alpha, beta);
    auto z = table.column(p.z);
    if (z[0] != Fe::one()) {
      out.push_back({FailureKind::Permutation, pi, 0, p.name + ": z[0] != 1"});
    }
    for (size_t i = 0; i < n; ++i) {
      const Fe lhs = z[(i + 1) % n] * den[i];
      const Fe rhs = z[i] * num[i];
      if (lhs != rhs) {
        out.push_back({FailureKind::Permutation, pi, i,
                       p.name + ": running product step fails"});
      }
    }
  }
}

void check_copies(const ConstraintTable& table, std::vector<Failure>& out) {
  const auto& copies = table.spec().copies;
  for (size_t ci = 0; ci < copies.size(); ++ci) {
    const auto& c = copies[ci];
    const Fe a = table.cell(c.a.column, c.a.row);
    const Fe b = table.cell(c.b.column, c.b.row);
    if (a != b) {
      out.push_back({FailureKind::Copy, ci, c.a.row,
                     to_string(c.a.column) + "[" + std::to_string(c.a.row) + "]=" +
                         a.to_string() + " != " + to_string(c.b.column) + "[" +
                         std::to_string(c.b.row) + "]=" + b.to_string()});
    }
  }
}

void check_instances(const ConstraintTable& table, std::vector<Failure>& out) {
  const auto& bindings = table.spec().instance_bindings;
  for (size_t bi = 0; bi < bindings.size(); ++bi) {
    const auto& b = bindings[bi];
    const Fe a = table.cell(b.cell.column, b.cell.row);
    const Fe v = table.cell(b.instance.column, b.instance.row);
    if (a != v) {
      out.push_back({FailureKind::Instance, bi, b.cell.row,
                     to_string(b.cell.column) + " holds " + a.to_string() +
                         ", public value is " + v.to_string()});
    }
  }
}

}  // namespace

VerdictReport check_satisfied(const ConstraintTable& table) {
  require_challenges(table);
  VerdictReport report;
  check_gates(table, report.failures);
  check_lookups(table, report.failures);
  check_perms(table, report.failures);
  check_copies(table, report.failures);
  check_instances(table, report.failures);
  report.satisfied = report.failures.empty();
  return report;
}

Digest commit_column(const ConstraintTable& table, ColumnId id) {
  Sha256 h;
  h.update_u8(0x01);
  h.update_u8(static_cast<uint8_t>(id.kind));
  h.update_u16_le(id.index);
  auto col = table.column(id).first(table.extent(id));
  std::vector<uint8_t> buf;
  buf.reserve(col.size() * 8);
  for (Fe v : col) {
    auto b = v.to_le_bytes();
    buf.insert(buf.end(), b.begin(), b.end());
  }
  h.update(buf);
  return h.finish();
}

std::vector<Digest> commit_columns(const ConstraintTable& table) {
  std::vector<Digest> out;
  for (const auto& c : table.spec().columns) out.push_back(commit_column(table, c.id));
  return out;
}

std::vector<Digest> commit_phase(const ConstraintTable& table, uint8_t phase) {
  std::vector<Digest> out;
  for (const auto& c : table.spec().columns) {
    if (c.id.kind == ColumnKind::Advice && c.phase == phase) {
      out.push_back(commit_column(table, c.id));
    }
  }
  return out;
}

std::vector<Fe> build_running_product(std::span<const Fe> c1,
                                      std::span<const Fe> c2, Fe beta) {
  if (c1.size() != c2.size()) {
    throw Error(ErrorCode::BadArity, "running product inputs differ in length");
  }
  std::vector<Fe> den(c2.size());
  for (size_t i = 0; i < c2.size(); ++i) {
    den[i] = c2[i] + beta;
    if (den[i].is_zero()) {
      throw Error(ErrorCode::DivisionByZeroDenominator, "row " + std::to_string(i));
    }
  }
  const auto inv = batch_inverse(den);
  std::vector<Fe> z(c1.size() + 1);
  z[0] = Fe::one();
  for (size_t i = 0; i < c1.size(); ++i) z[i + 1] = z[i] * (c1[i] + beta) * inv[i];
  return z;
}

void fill_running_products(ConstraintTable& table) {
  require_challenges(table);
  const auto& perms = table.spec().perms;
  if (perms.empty()) return;
  const Fe alpha = table.challenges()[0];
  const Fe beta = table.challenges()[1];
  for (const auto& p : perms) {
    const auto num = perm_factors(table, p.left, p.left_selector, alpha, beta);
    const auto den = perm_factors(table, p.right, p.right_selector, alpha, beta);
    for (size_t i = 0; i < den.size(); ++i) {
      if (den[i].is_zero()) {
        throw Error(ErrorCode::DivisionByZeroDenominator,
                    p.name + " row " + std::to_string(i));
      }
    }
    const auto inv = batch_inverse(den);
    std::vector<Fe> z(table.n_rows());
    z[0] = Fe::one();
    for (size_t i = 0; i + 1 < z.size(); ++i) z[i + 1] = z[i] * num[i] * inv[i];
    table.assign_column(p.z, z);
  }
}

}  // namespace zkgraph
