#include <gtest/gtest.h>

#include <random>

#include "support/harness.hpp"
#include "support/oracle.hpp"
#include "zkgraph/error.hpp"

using namespace zkgraph;
using namespace harness;

namespace {

Schema social() {
  Schema s;
  s.node_label = "Person";
  s.edge_kind = "KNOWS";
  s.node_props = {{"label", PropType::String}};
  return s;
}

ErrorCode plan_error(const std::string& text, const ParamMap& params = {},
                     const Schema* schema = nullptr, std::string* what = nullptr) {
  try {
    parse_plan(text, params, schema);
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.code();
  }
  ADD_FAILURE() << "plan accepted: " << text;
  return ErrorCode::IoError;
}

TEST(Planner, Is1Plan) {
  const Schema s = social();
  const auto p = parse_plan("expand_single(person, id=$s) |> filter(label=City)", {{"s", "7"}}, &s);
  ASSERT_EQ(p.nodes.size(), 2u);
  EXPECT_EQ(p.nodes[0].op, PlanOp::ExpandSingle);
  EXPECT_EQ(p.nodes[1].op, PlanOp::Filter);
  EXPECT_EQ(p.nodes[1].input, p.nodes[0].name);
  EXPECT_TRUE(p.nodes[1].input_is_node);
  EXPECT_EQ(p.nodes[0].find("id")->value.number, 7);
}

TEST(Planner, Ic13Plan) {
  const Schema s = social();
  const auto p = parse_plan("sssp(knows, src=$a) |> project(dist[$b])", {{"a", "1"}, {"b", "9"}}, &s);
  ASSERT_EQ(p.nodes.size(), 2u);
  EXPECT_EQ(p.nodes[0].op, PlanOp::Sssp);
  EXPECT_EQ(p.nodes[1].op, PlanOp::Project);
  EXPECT_EQ(p.nodes[1].args[0].op, ArgOp::Index);
  EXPECT_EQ(p.nodes[1].args[0].key, "dist");
  EXPECT_EQ(p.nodes[1].args[0].value.number, 9);
}

TEST(Planner, Errors) {
  const Schema s = social();
  EXPECT_EQ(plan_error("X |> filter(label=City)"), ErrorCode::UnboundInput);
  EXPECT_EQ(plan_error("expand_set(edges, from=X)"), ErrorCode::UnboundInput);
  EXPECT_EQ(plan_error("expand_single(cities, id=1)", {}, &s), ErrorCode::UnboundInput);
  EXPECT_EQ(plan_error("shortest(edges, src=1)"), ErrorCode::UnknownOperator);
  EXPECT_EQ(plan_error("sssp(edges, src=$a)"), ErrorCode::UnboundParam);
  std::string what;
  EXPECT_EQ(plan_error("a = sssp(edges, src=1)\nb = filter(a, dist<=)", {}, nullptr, &what),
            ErrorCode::SyntaxError);
  EXPECT_NE(what.find("2:"), std::string::npos) << what;
  EXPECT_EQ(plan_error("a = sssp(edges, src=1)\na = sssp(edges, src=2)"), ErrorCode::SyntaxError);
}

TEST(Planner, CanonicalTextAndHash) {
  const auto a = parse_plan("d = sssp(edges, src=1)\nd |> topk(dist, k=3, order=asc)");
  const auto b = parse_plan("# same plan\n d=sssp( edges,src=1 )\n\nd|>topk(dist,k=3,order=asc)  ");
  EXPECT_EQ(a.canonical_text(), b.canonical_text());
  EXPECT_EQ(a.hash(), b.hash());
  const auto c = parse_plan("d = sssp(edges, src=$s)\nd |> topk(dist, k=3, order=asc)", {{"s", "1"}});
  EXPECT_EQ(a.hash(), c.hash());
  const auto d = parse_plan("d = sssp(edges, src=$s)\nd |> topk(dist, k=3, order=asc)", {{"s", "2"}});
  EXPECT_NE(a.hash(), d.hash());
}

TEST(Planner, ParameterChangesInstance) {
  const GraphDb db = random_graph(3, 20, 50);
  const std::string text = "sssp(edges, src=$s) |> topk(dist, k=3, order=asc)";
  const auto q1 = run(db, text, {{"s", "1"}});
  const auto q2 = run(db, text, {{"s", "2"}});
  ASSERT_EQ(q1.layout.table.n_rows(), q2.layout.table.n_rows());
  bool differs = false;
  for (size_t i = kHeaderRows / 2; i < kHeaderRows; ++i) {
    differs |= q1.layout.table.cell(q1.layout.header, i) != q2.layout.table.cell(q2.layout.header, i);
  }
  EXPECT_TRUE(differs);
}

TEST(Planner, CanonFeedsSetExpansion) {
  const GraphDb db = random_graph(4, 30, 90, false);
  const auto q = run(db, "c = canon(edges)\nexpand_set(c, ids=[2,5,7])");
  ASSERT_TRUE(check_satisfied(q.layout.table).satisfied);
  std::multiset<oracle::Row> got;
  for (const auto& row : q.result.rows) got.insert({row[0].value(), row[1].value()});
  EXPECT_EQ(got, oracle::as_multiset(oracle::expand(db, {2, 5, 7}).rows));
}

TEST(Planner, CopyConstraintsBindRegions) {
  const GraphDb db = random_graph(5, 20, 80);
  const auto q = run(db, "a = expand_single(edges, id=3)\nb = filter(a, score>=0)");
  ASSERT_TRUE(check_satisfied(q.layout.table).satisfied);
  const auto v = tampered(q.layout.table, [](ConstraintTable& m) {
    set(m, "b.in.dst0", 0, cell_of(m, "b.in.dst0", 0) + Fe(1));
  });
  bool copy = false;
  for (const auto& f : v.failures) copy |= f.kind == FailureKind::Copy;
  EXPECT_TRUE(copy);
}

TEST(Planner, RowBudgets) {
  const GraphDb db = random_graph(6, 10, 80);
  try {
    run(db, "expand_single(edges, id=2, rows=1)");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RowBudgetExceeded);
  }
  const auto q = run(db, "expand_single(edges, id=2, rows=64)");
  EXPECT_TRUE(check_satisfied(q.layout.table).satisfied);
  CompileOptions small;
  small.edge_budget = 8;
  EXPECT_THROW(run(db, "expand_single(edges, id=2)", {}, small), Error);
}

// Random chains of up to four operators against sequential native execution.
class RandomPlan {
 public:
  RandomPlan(const GraphDb& db, uint64_t seed) : db_(db), rng_(seed) {}

  void build() {
    const size_t ops = 1 + rng_() % 4;
    start();
    for (size_t i = 1; i < ops && !terminal; ++i) step(i);
  }

  std::string text;
  oracle::Table table;
  bool terminal = false;
  std::multiset<uint64_t> topk;
  std::string topk_key;

 private:
  uint64_t node() { return 1 + rng_() % db_.nodes.size(); }

  void start() {
    switch (rng_() % 5) {
      case 0: {
        const uint64_t id = node();
        emit("expand_single(edges, id=" + std::to_string(id) + ")");
        table = oracle::expand(db_, {id});
        break;
      }
      case 1: {
        std::set<uint64_t> ids;
        for (int i = 0; i < 3; ++i) ids.insert(node());
        std::string list;
        for (uint64_t id : ids) list += (list.empty() ? "" : ",") + std::to_string(id);
        emit("expand_set(edges, ids=[" + list + "])");
        table = oracle::expand(db_, ids);
        break;
      }
      case 2: {
        const uint64_t src = node();
        emit("sssp(edges, src=" + std::to_string(src) + ")");
        table = oracle::sssp(db_, src);
        break;
      }
      case 3:
        emit("canon(edges)");
        table = oracle::canon(db_);
        break;
      default:
        table = oracle::nodes(db_);
        filter("nodes");
        break;
    }
  }

  void step(size_t i) {
    const std::string prev = "s" + std::to_string(i - 1);
    switch (rng_() % 3) {
      case 0: {
        emit("expand_set(edges, from=" + prev + ")");
        std::set<uint64_t> ids;
        for (const auto& r : table.rows) ids.insert(r[table.id_column()]);
        table = oracle::expand(db_, ids);
        break;
      }
      case 1:
        filter(prev);
        break;
      default: {
        const size_t k = 1 + rng_() % 5;
        const bool desc = rng_() % 2;
        const std::string key = has("dist") && rng_() % 2 ? "dist" : "score";
        emit("topk(" + prev + ", " + key + ", k=" + std::to_string(k) +
             (desc ? ", order=desc)" : ", order=asc)"));
        topk = oracle::topk_keys(db_, table, key, k, desc);
        topk_key = key;
        terminal = true;
        break;
      }
    }
  }

  void filter(const std::string& input) {
    const char* syms[] = {"=", ">=", "<="};
    const oracle::Cmp cmps[] = {oracle::Cmp::Eq, oracle::Cmp::Ge, oracle::Cmp::Le};
    const int c = rng_() % 3;
    const bool dist = has("dist") && rng_() % 2;
    const uint64_t v = dist ? rng_() % 5 : rng_() % 100;
    const std::string key = dist ? "dist" : "score";
    emit("filter(" + input + ", " + key + syms[c] + std::to_string(v) + ")");
    table = oracle::filter(db_, table, key, cmps[c], v);
  }

  bool has(const std::string& name) const {
    return std::find(table.names.begin(), table.names.end(), name) != table.names.end();
  }

  void emit(const std::string& call) {
    text += "s" + std::to_string(count_++) + " = " + call + "\n";
  }

  const GraphDb& db_;
  std::mt19937_64 rng_;
  size_t count_ = 0;
};

TEST(Planner, RandomPlansMatchNativeExecution) {
  for (uint64_t seed = 0; seed < 200; ++seed) {
    const GraphDb db = random_graph(seed + 1000, 20 + seed % 10, 30 + seed % 40, seed % 4 != 0);
    RandomPlan plan(db, seed);
    plan.build();
    const auto q = run(db, plan.text);
    const auto verdict = check_satisfied(q.layout.table);
    ASSERT_TRUE(verdict.satisfied) << plan.text << verdict.serialize().substr(0, 1500);
    if (plan.terminal) {
      size_t col = 0;
      for (size_t j = 0; j < q.result.columns.size(); ++j) {
        if (q.result.columns[j] == plan.topk_key) col = j;
      }
      std::multiset<uint64_t> got;
      for (const auto& row : q.result.rows) {
        if (plan.topk_key == "score" && q.result.columns[col] != "score") {
          const uint64_t id = row[plan.table.id_column()].value();
          got.insert(db.nodes.props[0][*db.node_index(id)].value());
        } else {
          got.insert(row[col].value());
        }
      }
      EXPECT_EQ(got, plan.topk) << plan.text;
      continue;
    }
    std::multiset<oracle::Row> got;
    for (const auto& row : q.result.rows) {
      oracle::Row r;
      for (const Fe& f : row) r.push_back(f.value());
      got.insert(r);
    }
    EXPECT_EQ(got, oracle::as_multiset(plan.table.rows)) << plan.text;
  }
}

}  // namespace
