#include "zkgraph/builder.hpp"

#include <algorithm>

#include "zkgraph/error.hpp"

namespace zkgraph {

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

size_t CostReport::rows() const {
  size_t r = 0;
  for (const auto& g : regions) r += g.native_rows;
  for (const auto& t : fixed_tables) r += t.second;
  return r;
}

size_t CostReport::padded_rows() const {
  size_t r = 0;
  for (const auto& g : regions) r += g.budget_rows;
  return r;
}

#define ZK_SUM(field)                             \
  size_t CostReport::field() const {              \
    size_t r = 0;                                 \
    for (const auto& g : regions) r += g.field;   \
    return r;                                     \
  }
ZK_SUM(gates)
ZK_SUM(lookups)
ZK_SUM(perms)
ZK_SUM(copies)
ZK_SUM(columns)
#undef ZK_SUM

void CircuitBuilder::begin_region(std::string name, std::string op, size_t budget_rows,
                                  size_t native_rows) {
  regions_.push_back({std::move(name), std::move(op), native_rows, budget_rows});
}

RegionCost& CircuitBuilder::current() {
  if (regions_.empty()) begin_region("main", "main", 0, 0);
  return regions_.back();
}

const std::string& CircuitBuilder::region_name() const {
  static const std::string kNone = "main";
  return regions_.empty() ? kNone : regions_.back().name;
}

namespace {

ColumnId make_id(ColumnKind kind, uint16_t (&next)[3]) {
  auto& n = next[static_cast<int>(kind)];
  if (n == UINT16_MAX) throw Error(ErrorCode::BadDeclaration, "too many columns");
  return {kind, n++};
}

}  // namespace

ColumnId CircuitBuilder::advice(const std::string& name, size_t extent) {
  const ColumnId id = make_id(ColumnKind::Advice, next_index_);
  spec_.columns.push_back({id, region_name() + "." + name, 1, extent});
  ++current().columns;
  return id;
}

ColumnId CircuitBuilder::advice_phase2(const std::string& name) {
  const ColumnId id = make_id(ColumnKind::Advice, next_index_);
  spec_.columns.push_back({id, region_name() + "." + name, 2, kFullExtent});
  ++current().columns;
  return id;
}

ColumnId CircuitBuilder::fixed(const std::string& name, std::vector<Fe> values) {
  const ColumnId id = make_id(ColumnKind::Fixed, next_index_);
  spec_.columns.push_back({id, region_name() + "." + name, 1, values.size()});
  ++current().columns;
  staged_[id] = std::move(values);
  return id;
}

ColumnId CircuitBuilder::selector(size_t begin, size_t end) {
  auto key = std::make_pair(begin, end);
  auto it = selectors_.find(key);
  if (it != selectors_.end()) return it->second;
  std::vector<Fe> v(end);
  for (size_t i = begin; i < end; ++i) v[i] = Fe::one();
  const ColumnId id =
      fixed("q[" + std::to_string(begin) + "," + std::to_string(end) + ")", std::move(v));
  selectors_.emplace(key, id);
  return id;
}

ColumnId CircuitBuilder::positions(size_t rows) {
  auto it = positions_.find(rows);
  if (it != positions_.end()) return it->second;
  std::vector<Fe> v(rows);
  for (size_t i = 0; i < rows; ++i) v[i] = Fe(i);
  const ColumnId id = fixed("pos" + std::to_string(rows), std::move(v));
  positions_.emplace(rows, id);
  return id;
}

ColumnId CircuitBuilder::instance(const std::string& name, size_t extent) {
  const ColumnId id = make_id(ColumnKind::Instance, next_index_);
  spec_.columns.push_back({id, region_name() + "." + name, 1, extent});
  ++current().columns;
  return id;
}

void CircuitBuilder::gate(const std::string& name, ColumnId selector, Expr poly) {
  spec_.gates.push_back({region_name() + "." + name, selector, std::move(poly)});
  ++current().gates;
}

void CircuitBuilder::lookup(LookupDecl decl) {
  decl.name = region_name() + "." + decl.name;
  spec_.lookups.push_back(std::move(decl));
  ++current().lookups;
}

void CircuitBuilder::permutation(const std::string& name, std::vector<ColumnId> left,
                                 std::vector<ColumnId> right,
                                 std::optional<ColumnId> left_selector,
                                 std::optional<ColumnId> right_selector) {
  const ColumnId z = advice_phase2(name + ".z");
  spec_.perms.push_back({region_name() + "." + name, std::move(left), std::move(right),
                         left_selector, right_selector, z});
  ++current().perms;
}

void CircuitBuilder::copy(CellRef a, CellRef b) {
  spec_.copies.push_back({a, b});
  ++current().copies;
}

void CircuitBuilder::copy_rows(ColumnId from, ColumnId to, size_t rows) {
  for (size_t r = 0; r < rows; ++r) copy({from, r}, {to, r});
}

void CircuitBuilder::bind_instance(CellRef cell, CellRef instance) {
  spec_.instance_bindings.push_back({cell, instance});
  ++current().copies;
}

size_t CircuitBuilder::range_table(uint64_t bound) {
  auto it = range_tables_.find(bound);
  if (it != range_tables_.end()) return it->second;
  const size_t idx = spec_.fixed_tables.size();
  spec_.fixed_tables.push_back({"range[0," + std::to_string(bound) + ")", 1, bound, {}});
  range_tables_.emplace(bound, idx);
  return idx;
}

size_t CircuitBuilder::tuple_table(const std::string& name,
                                   std::vector<std::vector<Fe>> rows) {
  auto it = tuple_tables_.find(name);
  if (it != tuple_tables_.end()) return it->second;
  const size_t idx = spec_.fixed_tables.size();
  const size_t arity = rows.empty() ? 1 : rows[0].size();
  spec_.fixed_tables.push_back({name, arity, 0, std::move(rows)});
  tuple_tables_.emplace(name, idx);
  return idx;
}

void CircuitBuilder::assign(ColumnId column, std::vector<Fe> values) {
  if (!proving_ && column.kind == ColumnKind::Advice) return;
  staged_[column] = std::move(values);
}

void CircuitBuilder::set_instance(ColumnId column, std::vector<Fe> values) {
  staged_[column] = std::move(values);
}

size_t CircuitBuilder::max_extent() const {
  size_t m = 0;
  for (const auto& c : spec_.columns) {
    if (c.extent != kFullExtent) m = std::max(m, c.extent);
  }
  return m;
}

CostReport CircuitBuilder::cost() const {
  CostReport r;
  r.regions = regions_;
  for (const auto& t : spec_.fixed_tables) r.fixed_tables.emplace_back(t.name, t.size());
  r.n_rows = next_pow2(std::max(kMinTableRows, max_extent()));
  return r;
}

ConstraintTable CircuitBuilder::finish() const {
  const size_t n = next_pow2(std::max(kMinTableRows, max_extent()));
  ConstraintTable t = build_table(spec_, n);
  for (const auto& [id, values] : staged_) t.assign_column(id, values);
  return t;
}

void range_check(CircuitBuilder& b, const std::string& name, const Expr& value,
                 const Expr& selector, unsigned bits) {
  const size_t table = b.range_table(uint64_t{1} << bits);
  b.lookup({name, {value}, {{{}, {}, table}}, selector});
}

std::pair<ColumnId, ColumnId> range_check_wide(CircuitBuilder& b, const std::string& name,
                                               const Expr& value, ColumnId selector,
                                               size_t extent, unsigned bits) {
  const ColumnId hi = b.advice(name + ".hi", extent);
  const ColumnId lo = b.advice(name + ".lo", extent);
  b.gate(name + ".limbs", selector,
         value - Expr::cell(hi) * Expr(Fe(uint64_t{1} << bits)) - Expr::cell(lo));
  range_check(b, name + ".hi", Expr::cell(hi), Expr::cell(selector), bits);
  range_check(b, name + ".lo", Expr::cell(lo), Expr::cell(selector), bits);
  return {hi, lo};
}

void is_zero_gadget(CircuitBuilder& b, const std::string& name, ColumnId selector,
                    const Expr& x, ColumnId flag, ColumnId inv) {
  const Expr f = Expr::cell(flag);
  const Expr one(Fe::one());
  b.gate(name + ".bool", selector, f * (one - f));
  b.gate(name + ".zero", selector, f * x);
  b.gate(name + ".nonzero", selector, (one - f) * (x * Expr::cell(inv) - one));
  b.gate(name + ".inv", selector, f * Expr::cell(inv));
}

void is_zero_witness(std::span<const Fe> x, std::vector<Fe>& flag, std::vector<Fe>& inv) {
  flag.assign(x.size(), Fe::zero());
  std::vector<Fe> nz;
  std::vector<size_t> where;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i].is_zero()) {
      flag[i] = Fe::one();
    } else {
      nz.push_back(x[i]);
      where.push_back(i);
    }
  }
  inv.assign(x.size(), Fe::zero());
  const auto invs = batch_inverse(nz);
  for (size_t j = 0; j < where.size(); ++j) inv[where[j]] = invs[j];
}

}  // namespace zkgraph
