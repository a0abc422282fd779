// Acceptance checks for the whole engine. Prints one PASS/FAIL line per
// criterion and exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <malloc.h>

#include "support/harness.hpp"
#include "support/oracle.hpp"
#include "zkgraph/bundle.hpp"
#include "zkgraph/bytes.hpp"
#include "zkgraph/cli.hpp"
#include "zkgraph/error.hpp"

using namespace zkgraph;
using namespace harness;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && pass) {
      pass = false;
      detail = what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::multiset<oracle::Row> rows_of(const ResultTable& r) {
  std::multiset<oracle::Row> out;
  for (const auto& row : r.rows) {
    oracle::Row v;
    for (const Fe& f : row) v.push_back(f.value());
    out.insert(v);
  }
  return out;
}

// Sum of operator-region rows, leaving out the database regions and the
// shared fixed tables.
size_t operator_rows(const CostReport& c) {
  size_t n = 0;
  for (const auto& r : c.regions) {
    if (r.name.rfind("db.", 0) != 0) n += r.native_rows;
  }
  return n;
}

size_t all_native_rows(const CostReport& c) {
  size_t n = 0;
  for (const auto& r : c.regions) n += r.native_rows;
  return n;
}

// ---------------------------------------------------------------------------
// 1. Fibonacci circuit

constexpr ColumnId FA{ColumnKind::Advice, 0};
constexpr ColumnId FB{ColumnKind::Advice, 1};
constexpr ColumnId FC{ColumnKind::Advice, 2};
constexpr ColumnId FS{ColumnKind::Fixed, 0};
constexpr ColumnId FI{ColumnKind::Instance, 0};

std::vector<Fe> fes(std::initializer_list<uint64_t> v) {
  std::vector<Fe> out;
  for (uint64_t x : v) out.push_back(Fe(x));
  return out;
}

bool fibonacci_accepts(std::vector<Fe> a, std::vector<Fe> b, std::vector<Fe> c, uint64_t claim) {
  CircuitSpec s;
  s.columns = {{FA, "a"}, {FB, "b"}, {FC, "c"}, {FS, "q"}, {FI, "out"}};
  s.gates.push_back({"fib", FS, Expr::cell(FA) + Expr::cell(FB) - Expr::cell(FC)});
  for (size_t i = 0; i + 1 < 8; ++i) {
    s.copies.push_back({{FB, i}, {FA, i + 1}});
    s.copies.push_back({{FC, i}, {FB, i + 1}});
  }
  s.instance_bindings.push_back({{FA, 0}, {FI, 0}});
  s.instance_bindings.push_back({{FB, 0}, {FI, 1}});
  s.instance_bindings.push_back({{FA, 7}, {FI, 2}});
  auto t = build_table(s, 8);
  t.assign_column(FA, a);
  t.assign_column(FB, b);
  t.assign_column(FC, c);
  t.assign_column(FS, std::vector<Fe>(8, Fe::one()));
  t.assign_column(FI, fes({1, 1, claim}));
  return check_satisfied(t).satisfied;
}

Outcome fibonacci() {
  Outcome o;
  const auto a = fes({1, 1, 2, 3, 5, 8, 13, 21});
  const auto b = fes({1, 2, 3, 5, 8, 13, 21, 34});
  const auto c = fes({2, 3, 5, 8, 13, 21, 34, 55});
  o.require(fibonacci_accepts(a, b, c, 21), "honest witness for 21 rejected");
  o.require(!fibonacci_accepts(a, b, c, 22), "claimed 22 accepted");

  // Every row still satisfies A + B = C, but row 3 is not chained to row 2.
  auto a2 = a, b2 = b, c2 = c;
  a2[3] = Fe(3);
  b2[3] = Fe(4);
  c2[3] = Fe(7);
  o.require(!fibonacci_accepts(a2, b2, c2, 21), "unchained row accepted");

  size_t broken = 0, rejected = 0;
  for (int col = 0; col < 3; ++col) {
    for (size_t row = 0; row < 8; ++row) {
      auto x = a, y = b, z = c;
      auto& v = col == 0 ? x : col == 1 ? y : z;
      v[row] += Fe(1);
      ++broken;
      rejected += !fibonacci_accepts(x, y, z, 21);
    }
  }
  o.require(rejected == broken, "a rewired cell was accepted");
  o.detail = o.pass ? "f(8)=21 accepted; 22, unchained rows and " + std::to_string(broken) +
                          " rewired cells rejected"
                    : o.detail;
  return o;
}

// ---------------------------------------------------------------------------
// 2. Permutation argument

constexpr ColumnId L0{ColumnKind::Advice, 0}, L1{ColumnKind::Advice, 1};
constexpr ColumnId R0{ColumnKind::Advice, 2}, R1{ColumnKind::Advice, 3};
constexpr ColumnId PZ{ColumnKind::Advice, 4};
constexpr ColumnId QL{ColumnKind::Fixed, 0}, QR{ColumnKind::Fixed, 1};

using Pairs = std::vector<std::pair<uint64_t, uint64_t>>;

bool permutation_accepts(const Pairs& left, const Pairs& right) {
  CircuitSpec s;
  s.columns = {{L0, "l0"}, {L1, "l1"}, {R0, "r0"}, {R1, "r1"}, {PZ, "z", 2},
               {QL, "ql"}, {QR, "qr"}};
  s.perms.push_back({"p", {L0, L1}, {R0, R1}, QL, QR, PZ});
  auto t = build_table(s, 128);
  auto fill = [&](const Pairs& p, ColumnId c0, ColumnId c1, ColumnId q) {
    std::vector<Fe> x, y;
    for (auto [u, v] : p) {
      x.push_back(Fe(u));
      y.push_back(Fe(v));
    }
    t.assign_column(c0, x);
    t.assign_column(c1, y);
    t.assign_column(q, std::vector<Fe>(p.size(), Fe::one()));
  };
  fill(left, L0, L1, QL);
  fill(right, R0, R1, QR);
  finalize_witness(t);
  return check_satisfied(t).satisfied;
}

Pairs random_pairs(std::mt19937_64& rng, size_t n) {
  Pairs p(n);
  for (auto& [a, b] : p) {
    a = rng() % 1000;
    b = rng() % 1000;
  }
  return p;
}

Outcome permutation() {
  Outcome o;
  std::mt19937_64 rng(77);
  size_t accepted = 0;
  for (int i = 0; i < 1000; ++i) {
    auto left = random_pairs(rng, 1 + rng() % 127);
    if (left.size() > 3) left[2] = left[0];
    auto right = left;
    std::shuffle(right.begin(), right.end(), rng);
    accepted += permutation_accepts(left, right);
  }
  size_t rejected = 0, unequal = 0;
  while (unequal < 1000) {
    const size_t n = 1 + rng() % 127;
    auto left = random_pairs(rng, n);
    auto right = left;
    std::shuffle(right.begin(), right.end(), rng);
    switch (unequal % 4) {
      case 0:
        right[rng() % n].second += 1 + rng() % 50;
        break;
      case 1:
        right[rng() % n] = right[rng() % n];
        break;
      case 2:
        std::swap(right[0].first, right[0].second);
        break;
      default:
        right = random_pairs(rng, n);
    }
    std::multiset<std::pair<uint64_t, uint64_t>> ml(left.begin(), left.end()),
        mr(right.begin(), right.end());
    if (ml == mr) continue;
    ++unequal;
    rejected += !permutation_accepts(left, right);
  }
  o.require(accepted == 1000, std::to_string(accepted) + "/1000 equal multisets accepted");
  o.require(rejected == 1000, std::to_string(rejected) + "/1000 unequal multisets rejected");
  if (o.pass) o.detail = "1000/1000 equal accepted, 1000/1000 unequal rejected";
  return o;
}

// ---------------------------------------------------------------------------
// 3. Operators against brute-force oracles

std::string id_list(const std::set<uint64_t>& ids) {
  std::string s;
  for (uint64_t id : ids) s += (s.empty() ? "" : ",") + std::to_string(id);
  return "[" + s + "]";
}

class OracleRound {
 public:
  OracleRound(uint64_t seed, std::vector<std::string>& errors)
      : rng_(seed), errors_(errors) {
    const size_t n = 2 + rng_() % 99;
    const size_t e = 1 + rng_() % 1000;
    db_ = random_graph(seed, n, e, rng_() % 2 == 0);
    tag_ = "graph " + std::to_string(seed) + " (" + std::to_string(n) + " nodes, " +
           std::to_string(e) + " edges): ";
  }

  void all() {
    expand_single();
    expand_set();
    sssp();
    canon();
    topk();
    filter();
    reach();
    allsp();
  }

 private:
  uint64_t node() { return 1 + rng_() % db_.nodes.size(); }

  bool fail(const std::string& what) {
    errors_.push_back(tag_ + what);
    return false;
  }

  bool satisfied(const CompiledQuery& q, const std::string& what) {
    if (check_satisfied(q.layout.table).satisfied) return true;
    return fail(what + " circuit unsatisfied");
  }

  void expand_single() {
    const uint64_t id = node();
    const auto q = run(db_, "expand_single(edges, id=" + std::to_string(id) + ")");
    if (!satisfied(q, "expand_single")) return;
    if (rows_of(q.result) != oracle::as_multiset(oracle::expand(db_, {id}).rows)) {
      fail("expand_single differs");
    }
  }

  void expand_set() {
    std::set<uint64_t> ids;
    const size_t k = 1 + rng_() % 12;
    for (size_t i = 0; i < k; ++i) ids.insert(node());
    const auto q = run(db_, "expand_set(edges, ids=" + id_list(ids) + ")");
    if (!satisfied(q, "expand_set")) return;
    if (rows_of(q.result) != oracle::as_multiset(oracle::expand(db_, ids).rows)) {
      fail("expand_set differs");
    }
  }

  void sssp() {
    const uint64_t src = node();
    const auto q = run(db_, "sssp(edges, src=" + std::to_string(src) + ")");
    if (!satisfied(q, "sssp")) return;
    if (rows_of(q.result) != oracle::as_multiset(oracle::sssp(db_, src).rows)) {
      fail("sssp differs");
    }
  }

  void canon() {
    const auto q = run(db_, "canon(edges)");
    if (!satisfied(q, "canon")) return;
    if (rows_of(q.result) != oracle::as_multiset(oracle::canon(db_).rows)) fail("canon differs");
  }

  // k stays within the node count, the operator's precondition.
  void topk() {
    const size_t k = 1 + rng_() % std::min<size_t>(10, db_.nodes.size());
    const bool desc = rng_() % 2;
    const auto q = run(db_, "topk(nodes, score, k=" + std::to_string(k) +
                                (desc ? ", order=desc)" : ", order=asc)"));
    if (!satisfied(q, "topk")) return;
    std::multiset<uint64_t> got;
    for (const auto& row : q.result.rows) got.insert(row[1].value());
    if (got != oracle::topk_keys(db_, oracle::nodes(db_), "score", k, desc)) fail("topk differs");
  }

  void filter() {
    const char* syms[] = {"=", ">=", "<="};
    const oracle::Cmp cmps[] = {oracle::Cmp::Eq, oracle::Cmp::Ge, oracle::Cmp::Le};
    const int c = rng_() % 3;
    const uint64_t v = rng_() % 100;
    const std::string pred = std::string("score") + syms[c] + std::to_string(v);
    const bool over_edges = rng_() % 2;
    const uint64_t id = node();
    const std::string plan = over_edges ? "expand_single(edges, id=" + std::to_string(id) +
                                              ") |> filter(" + pred + ")"
                                        : "filter(nodes, " + pred + ")";
    const auto q = run(db_, plan);
    if (!satisfied(q, "filter")) return;
    const auto input = over_edges ? oracle::expand(db_, {id}) : oracle::nodes(db_);
    if (rows_of(q.result) != oracle::as_multiset(oracle::filter(db_, input, "score", cmps[c], v).rows)) {
      fail("filter differs");
    }
  }

  // Reachability publishes only a flag; the walk itself is checked against
  // the oracle's arcs as well.
  void reach() {
    const uint64_t s = node(), t = node();
    const bool want = oracle::distances(db_, s).at(t) != oracle::kInf;
    const std::string plan = "r = reach(edges, src=" + std::to_string(s) + ", dst=" +
                             std::to_string(t) + ")";
    try {
      const auto q = run(db_, plan);
      if (!want) {
        fail("reach accepted an unreachable pair");
        return;
      }
      if (!satisfied(q, "reach")) return;
      auto arcs = oracle::arcs(db_);
      const std::set<std::pair<uint64_t, uint64_t>> arc_set(arcs.begin(), arcs.end());
      const ConstraintTable& tab = q.layout.table;
      const ColumnId path = column_named(tab, "r.path");
      bool ok = tab.cell(path, 0) == Fe(s);
      bool hit = tab.cell(path, 0) == Fe(t);
      for (size_t i = 1; i < tab.extent(path) && !hit; ++i) {
        const uint64_t a = tab.cell(path, i - 1).value(), b = tab.cell(path, i).value();
        ok &= a == b || arc_set.count({a, b}) > 0;
        hit = b == t;
      }
      if (!ok || !hit) fail("reach walk is not a path to the target");
    } catch (const Error& e) {
      if (want || e.code() != ErrorCode::NotReachable) fail(std::string("reach: ") + e.what());
    }
  }

  void allsp() {
    const uint64_t s = node(), t = node();
    const auto d = oracle::distances(db_, s).at(t);
    const bool want = d != oracle::kInf && d != 0;
    try {
      const auto q = run(db_, "allsp(edges, src=" + std::to_string(s) + ", dst=" +
                                  std::to_string(t) + ")");
      if (!want) {
        fail("allsp accepted an unreachable pair");
        return;
      }
      if (!satisfied(q, "allsp")) return;
      std::set<uint64_t> got;
      for (const auto& row : q.result.rows) got.insert(row[0].value());
      if (got != oracle::last_hops(db_, s, t)) fail("allsp last hops differ");
      if (q.result.scalars.empty() || q.result.scalars[0].second != Fe(d)) {
        fail("allsp distance differs");
      }
    } catch (const Error& e) {
      if (want || e.code() != ErrorCode::NotReachable) fail(std::string("allsp: ") + e.what());
    }
  }

  std::mt19937_64 rng_;
  std::vector<std::string>& errors_;
  GraphDb db_;
  std::string tag_;
};

Outcome operators_match_oracles() {
  Outcome o;
  std::vector<std::string> errors;
  for (uint64_t seed = 1; seed <= 500; ++seed) {
    OracleRound round(seed, errors);
    round.all();
  }
  o.require(errors.empty(), errors.empty() ? "" : std::to_string(errors.size()) +
                                                      " mismatches, first: " + errors.front());
  if (o.pass) o.detail = "500 graphs x 8 operators match exactly";
  return o;
}

// ---------------------------------------------------------------------------
// 4. Single-cell tamper fuzz through full prove and verify

const char* const kTamperPlans[] = {
    "a = expand_single(edges, id=$s)\nb = filter(a, score>=$v)",
    "a = expand_single(edges, id=$s)\nexpand_set(edges, from=a) |> topk(score, k=3, order=desc)",
    "d = sssp(edges, src=$s)\nd |> topk(dist, k=4, order=asc)",
    "d = sssp(edges, src=$s)\nd |> filter(dist<=2)",
    "d = sssp(edges, src=$s)\nd |> project(dist[$t])",
    "c = canon(edges)\nexpand_set(c, ids=[1,2,3]) |> filter(score<=$v)",
    "expand_set(edges, ids=[2,4,6]) |> filter(score=$v)",
    "expand_single_csr(edges, id=$s) |> filter(score>=$v)",
    "f = filter(nodes, score>=$v)\nexpand_set(edges, from=f) |> topk(score, k=2, order=asc)",
    "a = expand_single(edges, id=$s)\nb = expand_set(edges, from=a)\nfilter(b, score<=$v)",
};

Outcome tamper_fuzz() {
  Outcome o;
  std::mt19937_64 rng(4242);
  size_t trials = 0, rejected = 0, queries = 0;
  std::string first_accept;
  for (uint64_t qi = 0; qi < 20; ++qi) {
    const GraphDb db = random_graph(900 + qi, 20 + qi % 7, 50 + 3 * qi, qi % 3 != 0);
    std::string text = kTamperPlans[qi % std::size(kTamperPlans)];
    ParamMap params{{"s", std::to_string(1 + qi % 9)}, {"t", std::to_string(2 + qi % 11)},
                    {"v", std::to_string(20 + 7 * qi % 60)}};
    std::set<std::string> used;
    for (const auto& [k, v] : params) {
      if (text.find("$" + k) != std::string::npos) used.insert(k);
    }
    std::erase_if(params, [&](const auto& kv) { return !used.count(kv.first); });
    const QueryPlan plan = parse_plan(text, params, &db.schema);
    const CompiledQuery honest = compile_and_witness(plan, db);
    ++queries;
    const auto clean = verify_bundle(make_bundle(honest, plan), text, db.commitment);
    o.require(clean.ok, "honest query " + std::to_string(qi) + " rejected: " + clean.to_string());

    std::vector<ColumnId> cols;
    for (const auto& c : honest.layout.table.spec().columns) {
      if (c.id.kind == ColumnKind::Advice && c.phase == 1 &&
          honest.layout.table.extent(c.id) > 0) {
        cols.push_back(c.id);
      }
    }
    for (int k = 0; k < 50; ++k) {
      CompiledQuery q = honest;
      ConstraintTable& t = q.layout.table;
      const ColumnId col = cols[rng() % cols.size()];
      const size_t row = rng() % t.extent(col);
      const Fe delta = Fe(1 + rng() % (Fe::kModulus - 1));
      t.set_cell(col, row, t.cell(col, row) + delta);
      ++trials;
      bool rejected_here = true;
      try {
        q.challenges = finalize_witness(t);
        const auto bytes = serialize_bundle(make_bundle(q, plan));
        rejected_here = !verify_bundle(parse_bundle(bytes), text, db.commitment).ok;
      } catch (const Error&) {
        // A witness the prover cannot even finalize is a rejection.
      }
      rejected += rejected_here;
      if (!rejected_here && first_accept.empty()) {
        first_accept = "query " + std::to_string(qi) + " column " +
                       std::to_string(col.index) + " row " + std::to_string(row);
      }
    }
  }
  o.require(trials == 1000 && queries == 20, "wrong trial count");
  o.require(rejected == trials, std::to_string(trials - rejected) +
                                    " perturbations accepted, first at " + first_accept);
  if (o.pass) {
    o.detail = std::to_string(rejected) + "/" + std::to_string(trials) +
               " perturbations rejected across " + std::to_string(queries) + " queries";
  }
  return o;
}

// ---------------------------------------------------------------------------
// 5. CSR versus edge list

GraphDb social_db() {
  Schema s;
  s.node_label = "Person";
  s.edge_kind = "KNOWS";
  s.node_props = {{"label", PropType::String}, {"score", PropType::Int}};
  std::mt19937_64 rng(55);
  std::ostringstream nodes, edges;
  nodes << "id,label,score\n";
  for (int i = 1; i <= 300; ++i) {
    nodes << i << "," << (i % 5 == 0 ? "City" : "Person") << "," << rng() % 100 << "\n";
  }
  edges << "src,dst\n";
  for (int i = 0; i < 1500; ++i) edges << 1 + rng() % 300 << "," << 1 + rng() % 300 << "\n";
  return load_csv_text(nodes.str(), edges.str(), s);
}

Outcome csr_ordering() {
  Outcome o;
  const GraphDb db = social_db();
  const ParamMap params{{"p", "7"}};
  const auto edge_plan = parse_plan("expand_single(edges, id=$p) |> filter(label=\"City\")",
                                    params, &db.schema);
  const auto csr_plan = parse_plan("expand_single_csr(edges, id=$p) |> filter(label=\"City\")",
                                   params, &db.schema);
  const auto edge = compile_and_witness(edge_plan, db);
  const auto csr = compile_and_witness(csr_plan, db);
  o.require(check_satisfied(edge.layout.table).satisfied, "edge-list circuit unsatisfied");
  o.require(check_satisfied(csr.layout.table).satisfied, "CSR circuit unsatisfied");
  o.require(rows_of(edge.result) == rows_of(csr.result), "variants disagree on the result");
  const CostReport& e = edge.layout.cost;
  const CostReport& c = csr.layout.cost;
  o.require(c.rows() > e.rows(), "CSR rows not greater");
  o.require(c.gates() > e.gates(), "CSR gates not greater");
  o.require(c.lookups() > e.lookups(), "CSR lookups not greater");
  std::ostringstream d;
  d << "rows " << c.rows() << " > " << e.rows() << ", gates " << c.gates() << " > " << e.gates()
    << ", lookups " << c.lookups() << " > " << e.lookups();
  if (o.pass) o.detail = d.str();
  return o;
}

// ---------------------------------------------------------------------------
// 6. Shortest path versus hop-by-hop expansion

// Chain 1 -> 2 -> ... -> 7 plus random edges among nodes 8..60 and edges from
// the chain out into them, so node k + 1 sits exactly k hops from node 1.
GraphDb depth_graph() {
  std::mt19937_64 rng(66);
  std::vector<std::pair<uint64_t, uint64_t>> edges;
  for (uint64_t i = 1; i < 7; ++i) edges.emplace_back(i, i + 1);
  for (int i = 0; i < 150; ++i) edges.emplace_back(8 + rng() % 53, 8 + rng() % 53);
  for (uint64_t i = 1; i <= 7; ++i) edges.emplace_back(i, 8 + rng() % 53);
  std::vector<uint64_t> ids;
  for (uint64_t i = 1; i <= 60; ++i) ids.push_back(i);
  return edge_db(edges, ids);
}

Outcome sssp_depth() {
  Outcome o;
  const GraphDb db = depth_graph();
  const auto d = oracle::distances(db, 1);
  std::vector<size_t> sssp_rows, sssp_gates, naive_rows;
  for (uint64_t depth = 2; depth <= 6; ++depth) {
    const uint64_t target = depth + 1;
    o.require(d.at(target) == depth, "fixture depth wrong");
    const auto q = run(db, "d = sssp(edges, src=1)\nd |> project(dist[$t])",
                       {{"t", std::to_string(target)}});
    o.require(check_satisfied(q.layout.table).satisfied, "sssp circuit unsatisfied");
    o.require(!q.result.rows.empty() && q.result.rows[0][1] == Fe(depth), "sssp distance wrong");
    sssp_rows.push_back(q.layout.cost.rows());
    sssp_gates.push_back(q.layout.cost.gates());

    std::string plan = "h1 = expand_single(edges, id=1)\n";
    for (uint64_t h = 2; h <= depth; ++h) {
      plan += "h" + std::to_string(h) + " = expand_set(edges, from=h" + std::to_string(h - 1) +
              ")\n";
    }
    const auto naive = run(db, plan);
    o.require(check_satisfied(naive.layout.table).satisfied, "naive circuit unsatisfied");
    bool reached = false;
    for (const auto& row : naive.result.rows) reached |= row[1] == Fe(target);
    o.require(reached, "naive composition misses the target");
    naive_rows.push_back(naive.layout.cost.rows());
  }
  for (size_t i = 1; i < sssp_rows.size(); ++i) {
    o.require(sssp_rows[i] == sssp_rows[0] && sssp_gates[i] == sssp_gates[0],
              "sssp cost varies with depth");
    o.require(naive_rows[i] > naive_rows[i - 1], "naive rows not strictly increasing");
  }
  std::ostringstream s;
  s << "sssp rows " << sssp_rows[0] << " gates " << sssp_gates[0] << " at depths 2-6; naive rows";
  for (size_t r : naive_rows) s << " " << r;
  if (o.pass) o.detail = s.str();
  return o;
}

// ---------------------------------------------------------------------------
// 7. Set expansion versus repeated single-source expansion

Outcome set_expansion_size() {
  Outcome o;
  const GraphDb db = random_graph(77, 250, 2000);
  std::vector<size_t> set_rows, single_rows;
  const std::vector<size_t> sizes{10, 50, 100, 200};
  for (size_t n : sizes) {
    std::set<uint64_t> ids;
    for (uint64_t i = 1; i <= n; ++i) ids.insert(i);
    const auto q = run(db, "expand_set(edges, ids=" + id_list(ids) + ")");
    if (n == 10) {
      o.require(check_satisfied(q.layout.table).satisfied, "set circuit unsatisfied");
      o.require(rows_of(q.result) == oracle::as_multiset(oracle::expand(db, ids).rows),
                "set expansion result differs");
    }
    set_rows.push_back(q.layout.cost.rows());

    std::string plan;
    for (uint64_t i = 1; i <= n; ++i) {
      plan += "e" + std::to_string(i) + " = expand_single(edges, id=" + std::to_string(i) + ")\n";
    }
    single_rows.push_back(operator_rows(estimate(parse_plan(plan, {}, &db.schema), db)));
  }
  double worst = 0;
  for (size_t i = 0; i < sizes.size(); ++i) {
    o.require(set_rows[i] == set_rows[0], "set expansion rows vary with |ID_s|");
    const double linear = static_cast<double>(single_rows[0]) * sizes[i] / sizes[0];
    worst = std::max(worst, std::abs(single_rows[i] - linear) / linear);
  }
  o.require(worst <= 0.05, "repeated single-source rows deviate from linear");
  std::ostringstream s;
  s << "set rows " << set_rows[0] << " for 10/50/100/200 ids; repeated rows";
  for (size_t r : single_rows) s << " " << r;
  s << " (max deviation from linear " << worst * 100 << "%)";
  if (o.pass) o.detail = s.str();
  return o;
}

// ---------------------------------------------------------------------------
// 8. Canonicalization versus duplicated directed edges

Outcome canon_vs_duplicates() {
  Outcome o;
  const GraphDb undirected = random_graph(88, 200, 1500, false);
  EdgeTable doubled;
  for (size_t i = 0; i < undirected.edges.size(); ++i) {
    doubled.src.push_back(undirected.edges.src[i]);
    doubled.dst.push_back(undirected.edges.dst[i]);
    doubled.src.push_back(undirected.edges.dst[i]);
    doubled.dst.push_back(undirected.edges.src[i]);
  }
  Schema s = undirected.schema;
  s.directed = true;
  const GraphDb directed = make_db(s, undirected.nodes, doubled);

  const std::string plan = "expand_set(edges, ids=[3,9,27,81,100,150])";
  const auto canon = run(undirected, "c = canon(edges)\n" + std::string("expand_set(c, ids=[3,9,27,81,100,150])"));
  const auto base = run(directed, plan);
  o.require(check_satisfied(canon.layout.table).satisfied, "canon circuit unsatisfied");
  o.require(check_satisfied(base.layout.table).satisfied, "baseline circuit unsatisfied");
  o.require(rows_of(canon.result) == rows_of(base.result), "results differ");
  const size_t cr = canon.layout.cost.rows(), br = base.layout.cost.rows();
  const size_t ch = canon.layout.table.n_rows(), bh = base.layout.table.n_rows();
  o.require(cr < br, "canonicalized rows " + std::to_string(cr) + " not below baseline " +
                         std::to_string(br));
  o.require(ch <= bh, "canonicalized table taller than baseline");
  if (o.pass) {
    o.detail = "rows " + std::to_string(cr) + " < " + std::to_string(br) + ", table height " +
               std::to_string(ch) + " vs " + std::to_string(bh);
  }
  return o;
}

// ---------------------------------------------------------------------------
// 9. Scaling

struct Fit {
  double slope = 0;
  double r2 = 0;
};

Fit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double mx = 0, my = 0;
  std::vector<double> lx(n), ly(n);
  for (size_t i = 0; i < n; ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  Fit f;
  f.slope = sxy / sxx;
  f.r2 = syy == 0 ? 1 : sxy * sxy / (sxx * syy);
  return f;
}

Outcome scaling() {
  Outcome o;
  // Keep freed memory in the process. By default glibc hands buffers above
  // its dynamic thresholds back to the kernel, so only the larger sizes pay
  // page faults on every run.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
  const std::string text = "d = sssp(edges, src=$a)\nd |> project(dist[$b])";
  const ParamMap params{{"a", "1"}, {"b", "2"}};
  std::vector<double> edges, rows, times;
  double e2e = 0;
  // Each timing sample uses a fresh graph. Re-running one input lets small
  // graphs stay warm in the branch predictor and caches, which skews the fit.
  // The three sizes are interleaved so drift on the machine hits all alike.
  const std::vector<size_t> sizes{6000, 12000, 18000};
  std::vector<std::vector<double>> samples(sizes.size());
  std::vector<size_t> native(sizes.size(), 0);
  for (uint64_t seed = 1; seed <= 25; ++seed) {
    for (size_t i = 0; i < sizes.size(); ++i) {
      const size_t e = sizes[i];
      const GraphDb db = random_graph(seed, e / 6, e);
      const QueryPlan plan = parse_plan(text, params, &db.schema);
      const auto t0 = Clock::now();
      const CompiledQuery q = compile_and_witness(plan, db);
      if (i == 0 && seed == 1) {
        const auto bytes = serialize_bundle(make_bundle(q, plan));
        const auto rep = verify_bundle(parse_bundle(bytes), text, db.commitment);
        e2e = seconds_since(t0);
        o.require(rep.ok, "6k-edge bundle rejected: " + rep.to_string());
      }
      samples[i].push_back(std::chrono::duration<double>(q.layout.witness_time).count());
      const size_t n = all_native_rows(q.layout.cost);
      o.require(native[i] == 0 || native[i] == n, "row count depends on more than graph size");
      native[i] = n;
    }
  }
  for (size_t i = 0; i < sizes.size(); ++i) {
    std::sort(samples[i].begin(), samples[i].end());
    edges.push_back(static_cast<double>(sizes[i]));
    rows.push_back(static_cast<double>(native[i]));
    times.push_back(samples[i][samples[i].size() / 2]);
  }
  const Fit fr = loglog_fit(edges, rows);
  const Fit ft = loglog_fit(edges, times);
  auto in_band = [](const Fit& f) { return f.slope >= 0.9 && f.slope <= 1.1 && f.r2 >= 0.95; };
  std::ostringstream s;
  s.precision(3);
  s << "rows slope " << fr.slope << " (R2 " << fr.r2 << "), witness slope " << ft.slope
    << " (R2 " << ft.r2 << "), 6k prove+verify " << e2e << " s";
  o.require(in_band(fr), "row growth not linear: " + s.str());
  o.require(in_band(ft), "witness time growth not linear: " + s.str());
  o.require(e2e < 60, "6k prove+verify too slow: " + s.str());
  if (o.pass) o.detail = s.str();
  return o;
}

// ---------------------------------------------------------------------------
// 10. Determinism through the command line

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "zkgraph");
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  if (out) *out = o.str();
  return code;
}

Outcome determinism() {
  Outcome o;
  const fs::path sample = fs::path(ZKGRAPH_SOURCE_DIR) / "data" / "sample";
  const fs::path dir = fs::temp_directory_path() / "zkgraph_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::string commitment;
  o.require(cli({"ingest", "--nodes", (sample / "nodes.csv").string(), "--edges",
                 (sample / "edges.csv").string(), "--schema", (sample / "schema.json").string(),
                 "--out", (dir / "db").string()},
                &commitment) == 0,
            "ingest failed");
  commitment = commitment.substr(0, 64);
  const std::string plan = (sample / "ic13.plan").string();
  for (const char* name : {"a.zkgb", "b.zkgb"}) {
    o.require(cli({"prove", "--db", (dir / "db").string(), "--plan", plan, "--param", "person=1",
                   "--param", "other=8", "--out", (dir / name).string()}) == 0,
              "prove failed");
  }
  const auto a = read_file((dir / "a.zkgb").string());
  const auto b = read_file((dir / "b.zkgb").string());
  o.require(!a.empty() && a == b, "bundles differ between runs");

  // The verifier runs in a separate process that sees only the bundle, the
  // plan and the commitment.
  const fs::path copy = dir / "received.zkgb";
  fs::copy_file(dir / "a.zkgb", copy);
  const std::string cmd = "\"" + std::string(ZKGRAPH_CLI) + "\" verify --bundle \"" +
                          copy.string() + "\" --db-commitment " + commitment + " --plan \"" +
                          plan + "\" > \"" + (dir / "verify.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  o.require(status == 0, "separate-process verify exited with status " + std::to_string(status));
  fs::remove_all(dir);
  if (o.pass) {
    o.detail = "two proves gave identical " + std::to_string(a.size()) +
               "-byte bundles; verify exited 0";
  }
  return o;
}

struct Criterion {
  const char* id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

// With arguments, only the named criteria run (for example `acceptance C3 C9`).
int main(int argc, char** argv) {
  const std::set<std::string> only(argv + 1, argv + argc);
  const std::vector<Criterion> criteria = {
      {"C1", "fibonacci smoke test", 1, fibonacci},
      {"C2", "permutation argument properties", 30, permutation},
      {"C3", "operators match brute-force oracles", 300, operators_match_oracles},
      {"C4", "single-cell tamper fuzz", 300, tamper_fuzz},
      {"C5", "CSR costs more than edge list", 30, csr_ordering},
      {"C6", "shortest path cost is depth independent", 0, sssp_depth},
      {"C7", "set expansion cost is start-set independent", 0, set_expansion_size},
      {"C8", "canonicalization beats duplicated edges", 0, canon_vs_duplicates},
      {"C9", "linear scaling", 0, scaling},
      {"C10", "deterministic bundles", 0, determinism},
  };
  int failed = 0;
  size_t ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    ++ran;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = seconds_since(t0);
    if (c.limit_s > 0 && secs >= c.limit_s && o.pass) {
      o.pass = false;
      o.detail = "over the " + std::to_string(static_cast<int>(c.limit_s)) + " s limit";
    }
    failed += !o.pass;
    std::printf("%s %-4s %-45s %8.2f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(ran) - failed, ran);
  return failed == 0 ? 0 : 1;
}
