#include "zkgraph/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "zkgraph/bundle.hpp"
#include "zkgraph/bytes.hpp"
#include "zkgraph/compiler.hpp"
#include "zkgraph/error.hpp"

namespace zkgraph {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string read_text(const std::string& path) {
  const auto bytes = read_file(path);
  return {bytes.begin(), bytes.end()};
}

void write_text(const std::string& path, std::string_view text) {
  write_file(path, {reinterpret_cast<const uint8_t*>(text.data()), text.size()});
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct IngestArgs {
  std::string nodes, edges, schema, out;
};

struct ProveArgs {
  std::string db, plan, out;
  std::vector<std::string> params;
  size_t node_budget = 0;
  size_t edge_budget = 0;
};

struct VerifyArgs {
  std::string bundle, db_commitment, plan;
};

struct BenchArgs {
  std::string db, suite, out, breakdown;
  unsigned jobs = 1;
};

struct GenerateArgs {
  size_t nodes = 0, edges = 0;
  bool undirected = false;
  std::string out_dir;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  const Schema schema = Schema::from_json(read_text(a.schema));
  const GraphDb db = load_csv(a.nodes, a.edges, schema);
  write_file(a.out, serialize_db(db));
  out << to_hex(db.commitment) << "\n";
  return kExitOk;
}

int cmd_prove(const ProveArgs& a, std::ostream& out, std::ostream& err) {
  const GraphDb db = deserialize_db(read_file(a.db));
  const std::string text = read_text(a.plan);
  const QueryPlan plan = parse_plan(text, parse_params(a.params), &db.schema);
  CompileOptions opts;
  if (a.node_budget) opts.node_budget = a.node_budget;
  if (a.edge_budget) opts.edge_budget = a.edge_budget;
  const CompiledQuery q = compile_and_witness(plan, db, opts);
  const auto verdict = check_satisfied(q.layout.table);
  if (!verdict.satisfied) {
    err << "self-check failed\n" << verdict.serialize().substr(0, 4000) << "\n";
    return kExitInternal;
  }
  const auto bytes = serialize_bundle(make_bundle(q, plan));
  write_file(a.out, bytes);
  out << q.result.to_string();
  out << "db commitment: " << to_hex(q.db_commitment) << "\n";
  out << "plan hash: " << to_hex(q.plan_hash) << "\n";
  out << "bundle: " << a.out << " (" << bytes.size() << " bytes, " << q.layout.table.n_rows()
      << " rows)\n";
  return kExitOk;
}

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  Digest expected{};
  if (!from_hex(a.db_commitment, expected)) {
    err << "--db-commitment must be 64 hex characters\n";
    return kExitInput;
  }
  const Bundle b = parse_bundle(read_file(a.bundle));
  const VerifyReport rep = verify_bundle(b, read_text(a.plan), expected);
  out << rep.to_string();
  if (!rep.ok) return kExitRejected;
  out << rep.result.to_string();
  return kExitOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const GraphDb db = deserialize_db(read_file(a.db));
  const auto suite = parse_suite(read_text(a.suite));
  std::vector<BenchRow> rows(suite.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < suite.size(); i = next++) rows[i] = bench_query(db, suite[i]);
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(a.jobs, suite.size()));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& r : rows) {
    if (!r.error.empty()) err << r.query << ": " << r.error << "\n";
  }
  const std::string csv = bench_csv(rows);
  write_text(a.out, csv);
  if (!a.breakdown.empty()) write_text(a.breakdown, bench_breakdown_csv(rows));
  out << csv;
  return kExitOk;
}

int cmd_generate(const GenerateArgs& a, uint64_t seed, std::ostream& out) {
  const GraphDb db = random_graph(seed, a.nodes, a.edges, !a.undirected);
  std::filesystem::create_directories(a.out_dir);
  const std::filesystem::path dir(a.out_dir);
  std::ostringstream nodes, edges;
  nodes << "id,score\n";
  for (size_t i = 0; i < db.nodes.size(); ++i) {
    nodes << db.nodes.ids[i] << "," << db.nodes.props[0][i].value() << "\n";
  }
  edges << "src,dst\n";
  for (size_t i = 0; i < db.edges.size(); ++i) {
    edges << db.edges.src[i] << "," << db.edges.dst[i] << "\n";
  }
  write_text((dir / "nodes.csv").string(), nodes.str());
  write_text((dir / "edges.csv").string(), edges.str());
  write_text((dir / "schema.json").string(), db.schema.to_json() + "\n");
  out << "wrote " << db.nodes.size() << " nodes and " << db.edges.size() << " edges to "
      << a.out_dir << "\n";
  return kExitOk;
}

}  // namespace

std::vector<BenchQuery> parse_suite(std::string_view text) {
  std::vector<BenchQuery> out;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (line.starts_with("query ")) {
      out.push_back({std::string(trim(line.substr(6))), "", {}});
      continue;
    }
    if (out.empty()) {
      throw Error(ErrorCode::ParseError,
                  "suite line " + std::to_string(line_no) + ": expected 'query <name>'");
    }
    if (line.starts_with("param ")) {
      const auto kv = parse_params({std::string(trim(line.substr(6)))});
      out.back().params.insert(kv.begin(), kv.end());
      continue;
    }
    out.back().plan += std::string(line) + "\n";
  }
  for (const auto& q : out) {
    if (q.plan.empty()) throw Error(ErrorCode::ParseError, "suite query '" + q.name + "' has no plan");
  }
  return out;
}

BenchRow bench_query(const GraphDb& db, const BenchQuery& query) {
  BenchRow row;
  row.query = query.name;
  try {
    const QueryPlan plan = parse_plan(query.plan, query.params, &db.schema);
    const CompiledQuery q = compile_and_witness(plan, db);
    const CostReport& cost = q.layout.cost;
    row.rows = cost.rows();
    row.gates = cost.gates();
    row.lookups = cost.lookups();
    row.perms = cost.perms();
    row.regions = cost.regions;
    row.witness_ms = std::chrono::duration<double, std::milli>(q.layout.witness_time).count();
    const auto bytes = serialize_bundle(make_bundle(q, plan));
    row.bundle_bytes = bytes.size();
    const auto start = Clock::now();
    const VerifyReport rep = verify_bundle(parse_bundle(bytes), query.plan, db.commitment);
    row.check_ms = ms_since(start);
    if (!rep.ok) row.error = "bundle rejected: " + rep.to_string();
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "query,rows,gates,lookups,perms,witness_ms,check_ms,bundle_bytes\n";
  os.setf(std::ios::fixed);
  os.precision(3);
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      os << "# " << r.query << " failed\n";
      continue;
    }
    os << r.query << "," << r.rows << "," << r.gates << "," << r.lookups << "," << r.perms << ","
       << r.witness_ms << "," << r.check_ms << "," << r.bundle_bytes << "\n";
  }
  return os.str();
}

std::string bench_breakdown_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "query,region,op,native_rows,budget_rows,gates,lookups,perms,copies\n";
  for (const auto& r : rows) {
    for (const auto& g : r.regions) {
      os << r.query << "," << g.name << "," << g.op << "," << g.native_rows << ","
         << g.budget_rows << "," << g.gates << "," << g.lookups << "," << g.perms << ","
         << g.copies << "\n";
    }
  }
  return os.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"zkgraph: verifiable graph queries over committed databases", "zkgraph"};
  app.require_subcommand(1);
  uint64_t seed = 1;
  app.add_option("--seed", seed, "Seed for generated fixtures")->capture_default_str();

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Load CSV tables and write a database file");
  c_ingest->add_option("--nodes", ingest.nodes, "Node CSV")->required();
  c_ingest->add_option("--edges", ingest.edges, "Edge CSV")->required();
  c_ingest->add_option("--schema", ingest.schema, "Schema JSON")->required();
  c_ingest->add_option("--out", ingest.out, "Output database file")->required();

  ProveArgs prove;
  auto* c_prove = app.add_subcommand("prove", "Run a plan and write an attestation bundle");
  c_prove->add_option("--db", prove.db, "Database file")->required();
  c_prove->add_option("--plan", prove.plan, "Plan file")->required();
  c_prove->add_option("--param", prove.params, "Plan parameter k=v");
  c_prove->add_option("--out", prove.out, "Output bundle")->required();
  c_prove->add_option("--node-budget", prove.node_budget, "Node table rows");
  c_prove->add_option("--edge-budget", prove.edge_budget, "Edge table rows");

  VerifyArgs verify;
  auto* c_verify = app.add_subcommand("verify", "Check a bundle against a plan and db commitment");
  c_verify->add_option("--bundle", verify.bundle, "Bundle file")->required();
  c_verify->add_option("--db-commitment", verify.db_commitment, "Expected commitment (hex)")
      ->required();
  c_verify->add_option("--plan", verify.plan, "Plan file")->required();

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "Prove and verify every query of a suite");
  c_bench->add_option("--db", bench.db, "Database file")->required();
  c_bench->add_option("--suite", bench.suite, "Suite file")->required();
  c_bench->add_option("--out", bench.out, "Report CSV")->required();
  c_bench->add_option("--breakdown", bench.breakdown, "Per-region report CSV");
  c_bench->add_option("--jobs", bench.jobs, "Worker threads")->check(CLI::Range(1u, 256u));

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "Write a random graph as CSV files");
  c_gen->add_option("--nodes", gen.nodes, "Node count")->required();
  c_gen->add_option("--edges", gen.edges, "Edge count")->required();
  c_gen->add_flag("--undirected", gen.undirected, "Mark the edge kind undirected");
  c_gen->add_option("--out-dir", gen.out_dir, "Output directory")->required();

  std::vector<std::string> argv_store = args;
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest(ingest, out);
    if (c_prove->parsed()) return cmd_prove(prove, out, err);
    if (c_verify->parsed()) return cmd_verify(verify, out, err);
    if (c_bench->parsed()) return cmd_bench(bench, out, err);
    if (c_gen->parsed()) return cmd_generate(gen, seed, out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInput;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.empty()) args.emplace_back("zkgraph");
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace zkgraph
