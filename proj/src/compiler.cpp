#include "zkgraph/compiler.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "zkgraph/error.hpp"
#include "zkgraph/ops/ops.hpp"

namespace zkgraph {

using ops::Relation;

namespace {

[[noreturn]] void bad_arg(const PlanNode& n, const std::string& what) {
  throw Error(ErrorCode::BadParameter, "line " + std::to_string(n.line) + ": " +
                                           std::string(plan_op_name(n.op)) + ": " + what);
}

void check_keys(const PlanNode& n, std::initializer_list<std::string_view> allowed,
                size_t max_positional) {
  size_t positional = 0;
  for (const auto& a : n.args) {
    if (a.op == ArgOp::Positional) {
      ++positional;
      continue;
    }
    if (n.op == PlanOp::Filter && a.op != ArgOp::Index && a.key != "rows") continue;
    if (n.op == PlanOp::Project && a.op == ArgOp::Index) continue;
    if (a.op != ArgOp::Eq ||
        std::find(allowed.begin(), allowed.end(), a.key) == allowed.end()) {
      bad_arg(n, "unexpected argument " + a.key);
    }
  }
  if (positional > max_positional) bad_arg(n, "too many positional arguments");
}

int64_t int_value(const PlanNode& n, const PlanValue& v, const std::string& what) {
  if (v.kind != PlanValue::Kind::Int) {
    throw Error(ErrorCode::TypeMismatch, "line " + std::to_string(n.line) + ": " + what +
                                             " must be an integer, got " + v.canonical());
  }
  return v.number;
}

uint64_t id_value(const PlanNode& n, const PlanValue& v, const std::string& what) {
  const int64_t x = int_value(n, v, what);
  if (x < 0) bad_arg(n, what + " must be non-negative");
  return static_cast<uint64_t>(x);
}

uint64_t required_id(const PlanNode& n, const std::string& key) {
  const PlanArg* a = n.find(key);
  if (!a) bad_arg(n, "missing " + key + "=");
  return id_value(n, a->value, key);
}

std::optional<uint64_t> optional_id(const PlanNode& n, const std::string& key) {
  const PlanArg* a = n.find(key);
  if (!a) return std::nullopt;
  return id_value(n, a->value, key);
}

std::optional<size_t> rows_arg(const PlanNode& n) {
  auto r = optional_id(n, "rows");
  if (r && *r == 0) bad_arg(n, "rows must be positive");
  return r;
}

std::string ident_value(const PlanNode& n, const PlanValue& v, const std::string& what) {
  if (v.kind != PlanValue::Kind::Ident && v.kind != PlanValue::Kind::String) {
    throw Error(ErrorCode::TypeMismatch, "line " + std::to_string(n.line) + ": " + what +
                                             " must be a name, got " + v.canonical());
  }
  return v.text;
}

bool is_edge_op(PlanOp op) {
  switch (op) {
    case PlanOp::ExpandSingle:
    case PlanOp::ExpandSet:
    case PlanOp::Sssp:
    case PlanOp::Reach:
    case PlanOp::AllSp:
    case PlanOp::Canon:
      return true;
    default:
      return false;
  }
}

struct Requirements {
  bool edge_list = false;
  bool csr = false;
};

Requirements requirements(const QueryPlan& plan, const Schema& schema) {
  Requirements r;
  for (const auto& n : plan.nodes) {
    if (n.op == PlanOp::ExpandSingleCsr) {
      r.csr = true;
      continue;
    }
    if (n.input_is_node) continue;
    const auto t = resolve_table(schema, n.input);
    if (!t) {
      throw Error(ErrorCode::UnboundInput, "line " + std::to_string(n.line) + ": " + n.input +
                                               " is neither a statement nor a table");
    }
    if (is_edge_op(n.op) || *t == DbTable::Edges) r.edge_list = true;
  }
  return r;
}

class PlanCompiler {
 public:
  PlanCompiler(const QueryPlan& plan, const Schema& schema, const GraphDb* db, bool proving,
               size_t nb, size_t eb)
      : plan_(plan), b_(proving), ctx_{b_, schema, db, {}, {}} {
    ctx_.layout.node_budget = nb;
    ctx_.layout.edge_budget = eb;
  }

  QueryLayout run(bool finish, const Digest* db_commitment, const Digest* plan_hash) {
    const Requirements req = requirements(plan_, ctx_.schema);
    ops::build_db_region(ctx_, req.edge_list, req.csr);

    b_.begin_region("public", "public", kHeaderRows, 0);
    const ColumnId header = b_.instance("header", kHeaderRows);
    if (db_commitment && plan_hash) {
      const auto cells = header_cells(*db_commitment, *plan_hash);
      b_.set_instance(header, {cells.begin(), cells.end()});
    }

    for (const auto& n : plan_.nodes) compile_node(n);
    ResultShape shape = bind_result(plan_.nodes.back());

    QueryLayout out;
    out.cost = b_.cost();
    out.schema = ctx_.schema;
    out.node_budget = ctx_.layout.node_budget;
    out.edge_budget = ctx_.layout.edge_budget;
    out.db = ctx_.layout;
    out.header = header;
    out.result = std::move(shape);
    if (finish) out.table = b_.finish();
    out.witness_time = ctx_.witness_time;
    return out;
  }

 private:
  Relation db_relation(const PlanNode& n, bool edges_wanted) {
    const auto t = resolve_table(ctx_.schema, n.input);
    if (!t) {
      throw Error(ErrorCode::UnboundInput, "line " + std::to_string(n.line) + ": " + n.input +
                                               " is neither a statement nor a table");
    }
    if (edges_wanted || *t == DbTable::Edges) return ops::db_edges_relation(ctx_);
    return ops::db_nodes_relation(ctx_);
  }

  // Edge input of a traversal operator. Database edges of an undirected kind
  // go through one shared canonicalization region.
  Relation edge_input(const PlanNode& n) {
    if (n.input_is_node) {
      const Relation& r = outputs_.at(n.input);
      if (r.kind != ops::RelKind::Edges) {
        throw Error(ErrorCode::TypeMismatch, "line " + std::to_string(n.line) + ": " +
                                                 n.input + " is not an edge relation");
      }
      return r;
    }
    Relation e = db_relation(n, true);
    if (ctx_.schema.directed || n.op == PlanOp::Canon) return e;
    if (!canon_) canon_ = ops::canon(ctx_, "canon", e);
    return *canon_;
  }

  Relation any_input(const PlanNode& n) {
    if (n.input_is_node) return outputs_.at(n.input);
    return db_relation(n, false);
  }

  void compile_node(const PlanNode& n) {
    Relation out;
    switch (n.op) {
      case PlanOp::ExpandSingle:
        check_keys(n, {"id", "rows"}, 0);
        out = ops::expand_single(ctx_, n.name, edge_input(n), required_id(n, "id"), rows_arg(n));
        break;
      case PlanOp::ExpandSingleCsr:
        check_keys(n, {"id", "rows"}, 0);
        out = ops::expand_single_csr(ctx_, n.name, required_id(n, "id"), rows_arg(n));
        break;
      case PlanOp::ExpandSet: {
        check_keys(n, {"ids", "from", "rows"}, 0);
        const PlanArg* ids = n.find("ids");
        const PlanArg* from = n.find("from");
        if (!!ids == !!from) bad_arg(n, "exactly one of ids= and from= is required");
        ops::SetInput set;
        if (ids) {
          if (ids->value.kind != PlanValue::Kind::List) {
            throw Error(ErrorCode::TypeMismatch, "line " + std::to_string(n.line) +
                                                     ": ids must be a list");
          }
          std::vector<uint64_t> v;
          for (const auto& x : ids->value.list) v.push_back(id_value(n, x, "ids"));
          set = std::move(v);
        } else {
          set = outputs_.at(from->value.text);
        }
        out = ops::expand_set(ctx_, n.name, edge_input(n), set, rows_arg(n));
        break;
      }
      case PlanOp::Sssp:
        check_keys(n, {"src", "dmax"}, 0);
        out = ops::sssp(ctx_, n.name, edge_input(n), required_id(n, "src"),
                        optional_id(n, "dmax"));
        break;
      case PlanOp::Reach:
        check_keys(n, {"src", "dst"}, 0);
        out = ops::reach(ctx_, n.name, edge_input(n), required_id(n, "src"),
                         required_id(n, "dst"));
        break;
      case PlanOp::AllSp:
        check_keys(n, {"src", "dst", "dmax"}, 0);
        out = ops::allsp(ctx_, n.name, edge_input(n), required_id(n, "src"),
                         required_id(n, "dst"), optional_id(n, "dmax"));
        break;
      case PlanOp::Canon:
        check_keys(n, {}, 0);
        out = ops::canon(ctx_, n.name, edge_input(n));
        break;
      case PlanOp::Filter: {
        check_keys(n, {"rows"}, 0);
        const PlanArg* cmp = nullptr;
        for (const auto& a : n.args) {
          if (a.op == ArgOp::Positional || a.op == ArgOp::Index || a.key == "rows") continue;
          if (cmp) bad_arg(n, "only one comparison is supported");
          cmp = &a;
        }
        if (!cmp) bad_arg(n, "missing comparison");
        ops::FilterValue v;
        if (cmp->value.kind == PlanValue::Kind::Int) {
          v.number = cmp->value.number;
        } else if (cmp->value.kind == PlanValue::Kind::List) {
          throw Error(ErrorCode::TypeMismatch, "line " + std::to_string(n.line) +
                                                   ": cannot compare with a list");
        } else {
          v.is_string = true;
          v.text = cmp->value.text;
        }
        const ops::CmpOp op = cmp->op == ArgOp::Eq   ? ops::CmpOp::Eq
                              : cmp->op == ArgOp::Ge ? ops::CmpOp::Ge
                                                     : ops::CmpOp::Le;
        out = ops::filter(ctx_, n.name, any_input(n), cmp->key, op, v, rows_arg(n));
        break;
      }
      case PlanOp::TopK: {
        check_keys(n, {"key", "k", "order", "key2", "rows"}, 1);
        std::string key;
        const auto pos = n.positional();
        if (!pos.empty()) {
          key = ident_value(n, pos[0]->value, "key");
        } else if (const PlanArg* a = n.find("key")) {
          key = ident_value(n, a->value, "key");
        } else {
          bad_arg(n, "missing sort key");
        }
        const PlanArg* ka = n.find("k");
        if (!ka) bad_arg(n, "missing k=");
        const size_t kk = id_value(n, ka->value, "k");
        ops::Order order = ops::Order::Desc;
        if (const PlanArg* o = n.find("order")) {
          const std::string s = ident_value(n, o->value, "order");
          if (s == "asc") {
            order = ops::Order::Asc;
          } else if (s != "desc") {
            bad_arg(n, "order must be asc or desc");
          }
        }
        std::optional<std::string> key2;
        if (const PlanArg* a = n.find("key2")) key2 = ident_value(n, a->value, "key2");
        out = ops::topk(ctx_, n.name, any_input(n), key, kk, order, key2, rows_arg(n));
        break;
      }
      case PlanOp::Project: {
        check_keys(n, {}, 0);
        std::vector<ops::ProjectItem> items;
        for (const auto& a : n.args) {
          if (a.op != ArgOp::Index) continue;
          items.push_back({a.key, id_value(n, a.value, a.key)});
        }
        ops::project(ctx_, n.name, any_input(n), items);
        out.kind = ops::RelKind::Nodes;
        break;
      }
    }
    outputs_[n.name] = std::move(out);
  }

  std::optional<ColumnId> instance_named(const std::string& name) const {
    for (const auto& c : b_.spec().columns) {
      if (c.id.kind == ColumnKind::Instance && c.name == name) return c.id;
    }
    return std::nullopt;
  }

  ResultShape bind_result(const PlanNode& last) {
    ResultShape shape;
    shape.op = last.op;
    if (last.op == PlanOp::Project) {
      shape.columns = {"key", "value"};
      shape.cells.push_back(
          {*instance_named(last.name + ".key"), *instance_named(last.name + ".value")});
      return shape;
    }
    if (last.op == PlanOp::Reach) return shape;
    if (last.op == PlanOp::AllSp) {
      shape.scalars.emplace_back("d", *instance_named(last.name + ".d.public"));
    }
    const Relation& r = outputs_.at(last.name);
    shape.columns = r.names;
    b_.begin_region("result", "result", 0, 0);
    for (size_t s = 0; s < r.segments.size(); ++s) {
      const auto& seg = r.segments[s];
      std::vector<ColumnId> cols;
      for (size_t j = 0; j < seg.cols.size(); ++j) {
        const ColumnId inst = b_.instance(r.names[j] + std::to_string(s), seg.extent);
        for (size_t row = 0; row < seg.extent; ++row) {
          b_.bind_instance({seg.cols[j], row}, {inst, row});
        }
        if (!seg.data.empty()) b_.set_instance(inst, seg.data[j]);
        cols.push_back(inst);
      }
      shape.cells.push_back(std::move(cols));
    }
    return shape;
  }

  const QueryPlan& plan_;
  CircuitBuilder b_;
  ops::OpContext ctx_;
  std::map<std::string, Relation> outputs_;
  std::optional<Relation> canon_;
};

std::pair<size_t, size_t> budgets(const GraphDb& db, const CompileOptions& o) {
  const size_t nb = o.node_budget.value_or(default_budget(db.nodes.size()));
  const size_t eb = o.edge_budget.value_or(default_budget(db.edges.size()));
  if (nb <= db.nodes.size() || eb <= db.edges.size()) {
    throw Error(ErrorCode::RowBudgetExceeded, "database does not fit its row budgets");
  }
  return {nb, eb};
}

}  // namespace

size_t default_budget(size_t native_rows) { return next_pow2(native_rows + 1); }

std::array<Fe, kHeaderRows> header_cells(const Digest& db_commitment, const Digest& plan_hash) {
  std::array<Fe, kHeaderRows> out{};
  auto limbs = [&](const Digest& d, size_t at) {
    for (size_t i = 0; i < 8; ++i) {
      uint64_t v = 0;
      for (size_t j = 0; j < 4; ++j) v |= uint64_t{d[4 * i + j]} << (8 * j);
      out[at + i] = Fe(v);
    }
  };
  limbs(db_commitment, 0);
  limbs(plan_hash, 8);
  return out;
}

CompiledQuery compile_and_witness(const QueryPlan& plan, const GraphDb& db,
                                  const CompileOptions& options) {
  const auto [nb, eb] = budgets(db, options);
  CompiledQuery q;
  q.db_commitment = db.commitment;
  q.plan_hash = plan.hash();
  PlanCompiler pc(plan, db.schema, &db, true, nb, eb);
  q.layout = pc.run(true, &q.db_commitment, &q.plan_hash);
  q.challenges = finalize_witness(q.layout.table);
  q.result = read_result(q.layout.table, q.layout.result);
  return q;
}

CostReport estimate(const QueryPlan& plan, const GraphDb& db, const CompileOptions& options) {
  const auto [nb, eb] = budgets(db, options);
  PlanCompiler pc(plan, db.schema, &db, false, nb, eb);
  return pc.run(false, nullptr, nullptr).cost;
}

QueryLayout layout_for_verify(const QueryPlan& plan, const Schema& schema, size_t node_budget,
                              size_t edge_budget) {
  PlanCompiler pc(plan, schema, nullptr, false, node_budget, edge_budget);
  return pc.run(true, nullptr, nullptr);
}

ResultTable read_result(const ConstraintTable& table, const ResultShape& shape) {
  ResultTable r;
  r.op = std::string(plan_op_name(shape.op));
  r.columns = shape.columns;
  for (const auto& seg : shape.cells) {
    if (seg.empty()) continue;
    const size_t rows = table.extent(seg[0]);
    for (size_t i = 0; i < rows; ++i) {
      std::vector<Fe> row;
      for (ColumnId c : seg) row.push_back(table.cell(c, i));
      if (row[0].is_zero()) continue;
      r.rows.push_back(std::move(row));
    }
  }
  for (const auto& [name, col] : shape.scalars) r.scalars.emplace_back(name, table.cell(col, 0));
  return r;
}

std::string ResultTable::to_string() const {
  std::ostringstream os;
  if (op == "reach") {
    os << "reachable\n";
    return os.str();
  }
  for (const auto& [name, v] : scalars) os << name << " = " << v.value() << "\n";
  for (size_t j = 0; j < columns.size(); ++j) os << (j ? "," : "") << columns[j];
  os << "\n";
  for (const auto& row : rows) {
    for (size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << row[j].value();
    os << "\n";
  }
  return os.str();
}

}  // namespace zkgraph
