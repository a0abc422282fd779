#pragma once

// Textual query plans.
//
//   # comment
//   near = sssp(knows, src=$a)
//   near |> filter(dist<=3) |> topk(dist, k=5, order=asc)
//
// A statement is an optional `name =` followed by one or more calls joined
// with `|>`. The first positional argument of an unpiped call names its
// input: an earlier statement or a database table. Piped calls take the
// previous call's output instead. Arguments are positional values,
// `key=value`, `key>=value`, `key<=value` or `column[value]`; values are
// integers, identifiers, "strings", [lists] or `$param` references.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zkgraph/graph_store.hpp"
#include "zkgraph/sha256.hpp"

namespace zkgraph {

struct PlanValue {
  enum class Kind : uint8_t { Int, Ident, String, List };
  Kind kind = Kind::Int;
  int64_t number = 0;
  std::string text;
  std::vector<PlanValue> list;

  std::string canonical() const;
};

enum class ArgOp : uint8_t { Positional, Eq, Ge, Le, Index };

struct PlanArg {
  std::string key;  // empty for positional arguments
  ArgOp op = ArgOp::Positional;
  PlanValue value;
};

enum class PlanOp : uint8_t {
  ExpandSingle,
  ExpandSingleCsr,
  ExpandSet,
  Sssp,
  Reach,
  AllSp,
  Canon,
  Filter,
  TopK,
  Project
};

std::string_view plan_op_name(PlanOp op);

struct PlanNode {
  std::string name;
  PlanOp op = PlanOp::ExpandSingle;
  // An earlier node's name or a database table name.
  std::string input;
  bool input_is_node = false;
  std::vector<PlanArg> args;
  size_t line = 0;

  const PlanArg* find(std::string_view key) const;
  std::vector<const PlanArg*> positional() const;
};

struct QueryPlan {
  std::vector<PlanNode> nodes;
  // Parameters substituted into the plan, kept for the bundle.
  std::map<std::string, std::string> params;

  // One `name = op(input, args...)` line per node.
  std::string canonical_text() const;
  Digest hash() const;
};

using ParamMap = std::map<std::string, std::string>;

// Errors: SyntaxError (message carries line:col), UnknownOperator,
// UnboundInput (reference to an undefined statement, or to an unknown table
// when `schema` is given), UnboundParam.
QueryPlan parse_plan(std::string_view text, const ParamMap& params = {},
                     const Schema* schema = nullptr);

// Parses `k=v` strings as given on the command line. Errors: BadParameter.
ParamMap parse_params(const std::vector<std::string>& kv);

// Database table named by `name` for this schema: the edge kind or "edges"
// map to the edge table, the node label or "nodes" to the node table
// (case-insensitive).
enum class DbTable : uint8_t { Nodes, Edges };
std::optional<DbTable> resolve_table(const Schema& schema, std::string_view name);

}  // namespace zkgraph
