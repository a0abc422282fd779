#pragma once

// Command-line front end. Exit codes: 0 success, 1 verification failure,
// 2 input or usage error, 3 internal invariant breach.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "zkgraph/builder.hpp"
#include "zkgraph/graph_store.hpp"
#include "zkgraph/plan.hpp"

namespace zkgraph {

enum ExitCode : int {
  kExitOk = 0,
  kExitRejected = 1,
  kExitInput = 2,
  kExitInternal = 3,
};

int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// A bench suite is a text file of blocks:
//
//   query is1-edge
//   param s=3
//   expand_single(edges, id=$s)
//
// Every line up to the next `query` belongs to the plan, except `param`
// lines. `#` starts a comment line.
struct BenchQuery {
  std::string name;
  std::string plan;
  ParamMap params;
};

struct BenchRow {
  std::string query;
  size_t rows = 0;
  size_t gates = 0;
  size_t lookups = 0;
  size_t perms = 0;
  double witness_ms = 0;
  double check_ms = 0;
  size_t bundle_bytes = 0;
  std::string error;
  std::vector<RegionCost> regions;
};

// Errors: ParseError.
std::vector<BenchQuery> parse_suite(std::string_view text);

// Proves and verifies one query. Failures are reported in `error`.
BenchRow bench_query(const GraphDb& db, const BenchQuery& query);

std::string bench_csv(const std::vector<BenchRow>& rows);
std::string bench_breakdown_csv(const std::vector<BenchRow>& rows);

}  // namespace zkgraph
