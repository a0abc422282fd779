#include <gtest/gtest.h>

#include <random>

#include "support/harness.hpp"
#include "support/oracle.hpp"
#include "zkgraph/error.hpp"
#include "zkgraph/ops/ops.hpp"

using namespace zkgraph;
using namespace harness;

namespace {

std::multiset<oracle::Row> result_rows(const ResultTable& r) {
  std::multiset<oracle::Row> out;
  for (const auto& row : r.rows) {
    oracle::Row v;
    for (const Fe& f : row) v.push_back(f.value());
    out.insert(v);
  }
  return out;
}

TEST(Canon, SumAndProductExample) {
  const std::vector<uint64_t> a{5, 4}, b{2, 4};
  const auto w = ops::canonicalize_witness(a, b, 16);
  EXPECT_EQ(w.l, (std::vector<uint64_t>{2, 4}));
  EXPECT_EQ(w.h, (std::vector<uint64_t>{5, 4}));
  EXPECT_EQ(w.l[0] + w.h[0], 7u);
  EXPECT_EQ(w.l[0] * w.h[0], 10u);
}

TEST(Canon, RandomPairsMatchMinMax) {
  std::mt19937_64 rng(5);
  std::vector<uint64_t> a(10000), b(10000);
  for (size_t i = 0; i < a.size(); ++i) {
    a[i] = rng() % 65535;
    b[i] = rng() % 65535;
  }
  const auto w = ops::canonicalize_witness(a, b, 16);
  for (size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(w.l[i], std::min(a[i], b[i]));
    ASSERT_EQ(w.h[i], std::max(a[i], b[i]));
  }
  const std::vector<uint64_t> big{70000}, small{1};
  EXPECT_THROW(ops::canonicalize_witness(big, small, 16), Error);
}

TEST(Canon, ForgedPairsAreRejected) {
  const GraphDb db = edge_db({{5, 2}}, {2, 5});
  const auto q = run(db, "c = canon(edges)");
  const ConstraintTable& t = q.layout.table;
  ASSERT_TRUE(check_satisfied(t).satisfied);
  EXPECT_EQ(cell_of(t, "c.l", 0), Fe(2));
  EXPECT_EQ(cell_of(t, "c.h", 0), Fe(5));

  const auto wrong = tampered(t, [](ConstraintTable& m) { set(m, "c.h", 0, Fe(6)); });
  EXPECT_TRUE(has_failure(wrong, FailureKind::Gate, "c.sum", 0));
  EXPECT_TRUE(has_failure(wrong, FailureKind::Gate, "c.product", 0));

  const auto unsorted = tampered(t, [](ConstraintTable& m) {
    set(m, "c.l", 0, Fe(5));
    set(m, "c.h", 0, Fe(2));
  });
  EXPECT_FALSE(has_failure(unsorted, FailureKind::Gate, "c.sum"));
  EXPECT_FALSE(has_failure(unsorted, FailureKind::Gate, "c.product"));
  EXPECT_TRUE(has_failure(unsorted, FailureKind::Lookup, "c.order", 0));
}

TEST(Canon, CircuitMatchesOracle) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const GraphDb db = random_graph(seed, 25, 60, seed % 2 == 0);
    const auto q = run(db, "canon(edges)");
    ASSERT_TRUE(check_satisfied(q.layout.table).satisfied) << seed;
    EXPECT_EQ(result_rows(q.result), oracle::as_multiset(oracle::canon(db).rows)) << seed;
  }
}

TEST(TopK, WitnessTies) {
  const std::vector<uint64_t> keys{9, 7, 7, 3};
  const std::vector<uint8_t> dummy(4, 0);
  const auto w = ops::topk_witness(keys, dummy, 2, ops::Order::Desc, 1u << 20);
  EXPECT_EQ(w.is_k, (std::vector<uint8_t>{1, 1, 0, 0}));
  EXPECT_EQ(w.val_k, w.eff[1]);
  EXPECT_EQ(w.eff[1], w.eff[2]);

  const auto all = ops::topk_witness(keys, dummy, 4, ops::Order::Desc, 1u << 20);
  EXPECT_EQ(all.is_k, (std::vector<uint8_t>(4, 1)));
}

TEST(TopK, CircuitRejectsWrongSelection) {
  const GraphDb db = edge_db({}, {1, 2, 3, 4}, true, {9, 7, 7, 3});
  const auto q = run(db, "t = topk(nodes, score, k=2)");
  ASSERT_TRUE(check_satisfied(q.layout.table).satisfied);
  std::multiset<uint64_t> keys;
  for (const auto& row : q.result.rows) keys.insert(row[1].value());
  EXPECT_EQ(keys, (std::multiset<uint64_t>{9, 7}));

  const auto v = tampered(q.layout.table, [](ConstraintTable& m) {
    const ColumnId top = column_named(m, "t.v0.top");
    size_t seven = 0;
    for (size_t i = 0; i < 4; ++i) {
      if (m.cell(top, i) == Fe(1) && cell_of(m, "db.nodes.score", i) == Fe(7)) seven = i;
    }
    m.set_cell(top, seven, Fe(0));
    m.set_cell(top, 3, Fe(1));
  });
  bool cmp = false;
  for (const auto& f : v.failures) cmp |= f.detail.rfind("t.v0.cmp", 0) == 0;
  EXPECT_TRUE(cmp) << v.serialize();
}

TEST(TopK, MatchesOracle) {
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    const GraphDb db = random_graph(seed, 30, 60, seed % 2 == 0);
    const size_t k = 1 + seed % 7;
    const bool desc = seed % 3 != 0;
    const auto q = run(db, "topk(nodes, score, k=" + std::to_string(k) +
                               (desc ? ", order=desc)" : ", order=asc)"));
    ASSERT_TRUE(check_satisfied(q.layout.table).satisfied) << seed;
    std::multiset<uint64_t> got;
    for (const auto& row : q.result.rows) got.insert(row[1].value());
    EXPECT_EQ(got, oracle::topk_keys(db, oracle::nodes(db), "score", k, desc)) << seed;

    const auto d = run(db, "sssp(edges, src=1) |> topk(dist, k=" + std::to_string(k) +
                               ", order=asc)");
    ASSERT_TRUE(check_satisfied(d.layout.table).satisfied) << seed;
    std::multiset<uint64_t> dist;
    for (const auto& row : d.result.rows) dist.insert(row[1].value());
    EXPECT_EQ(dist, oracle::topk_keys(db, oracle::sssp(db, 1), "dist", k, false)) << seed;
  }
}

TEST(Filter, EqualitySelectsRows) {
  const GraphDb db = edge_db({}, {1, 2, 3}, true, {5, 8, 5});
  const auto q = run(db, "e = filter(nodes, score=5)");
  ASSERT_TRUE(check_satisfied(q.layout.table).satisfied);
  EXPECT_EQ(result_rows(q.result), (std::multiset<oracle::Row>{{1, 5}, {3, 5}}));

  const auto none = run(db, "filter(nodes, score=6)");
  EXPECT_TRUE(check_satisfied(none.layout.table).satisfied);
  EXPECT_TRUE(none.result.rows.empty());

  const auto v = tampered(q.layout.table, [](ConstraintTable& m) {
    set(m, "e.v0.out.id", 2, Fe(2));
    set(m, "e.v0.out.score", 2, Fe(8));
  });
  EXPECT_TRUE(has_failure(v, FailureKind::Permutation, "e.v0.out"));
}

TEST(Filter, MatchesOracle) {
  const oracle::Cmp cmps[] = {oracle::Cmp::Eq, oracle::Cmp::Ge, oracle::Cmp::Le};
  const char* syms[] = {"=", ">=", "<="};
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    const GraphDb db = random_graph(seed, 30, 70, seed % 2 == 0);
    const int c = seed % 3;
    const uint64_t v = (seed * 37) % 100;
    const std::string pred = "score" + std::string(syms[c]) + std::to_string(v);
    const auto q = run(db, "expand_single(edges, id=" + std::to_string(1 + seed % 30) +
                               ") |> filter(" + pred + ")");
    ASSERT_TRUE(check_satisfied(q.layout.table).satisfied) << seed;
    const auto want = oracle::filter(db, oracle::expand(db, {1 + seed % 30}), "score", cmps[c], v);
    EXPECT_EQ(result_rows(q.result), oracle::as_multiset(want.rows)) << seed;
  }
}

TEST(Filter, StringEquality) {
  Schema s;
  s.node_props = {{"label", PropType::String}};
  const GraphDb db = load_csv_text("id,label\n1,City\n2,Person\n3,City\n", "src,dst\n2,1\n2,3\n", s);
  const auto q = run(db, "expand_single(edges, id=2) |> filter(label=\"City\")");
  ASSERT_TRUE(check_satisfied(q.layout.table).satisfied);
  EXPECT_EQ(result_rows(q.result), (std::multiset<oracle::Row>{{2, 1}, {2, 3}}));
  EXPECT_THROW(run(db, "filter(nodes, label>=3)"), Error);
}

TEST(Project, PublishesLookedUpValues) {
  const GraphDb db = edge_db({{1, 2}, {2, 3}}, {1, 2, 3, 4});
  const auto q = run(db, "sssp(edges, src=1) |> project(dist[3], dist[4])");
  ASSERT_TRUE(check_satisfied(q.layout.table).satisfied);
  EXPECT_EQ(result_rows(q.result), (std::multiset<oracle::Row>{{3, 2}, {4, 8}}));
}

}  // namespace
