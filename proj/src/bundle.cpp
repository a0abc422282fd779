#include "zkgraph/bundle.hpp"

#include <sstream>

#include "zkgraph/bytes.hpp"
#include "zkgraph/error.hpp"
#include "zkgraph/transcript.hpp"

namespace zkgraph {

namespace {

constexpr uint8_t kMagic[4] = {'Z', 'K', 'G', 'B'};

enum Tag : uint16_t {
  kHeader = 1,
  kSchema = 2,
  kDbCommitment = 3,
  kPlanHash = 4,
  kParams = 5,
  kInstance = 6,
  kCommitments = 7,
  kChallenges = 8,
  kWitness = 9,
};

void section(ByteWriter& out, uint16_t tag, const ByteWriter& body) {
  out.u16(tag);
  out.u32(static_cast<uint32_t>(body.size()));
  out.bytes(body.data());
}

void write_columns(ByteWriter& w, const std::vector<ColumnCells>& cols) {
  w.u32(static_cast<uint32_t>(cols.size()));
  for (const auto& c : cols) {
    w.u16(c.index);
    w.u64(c.cells.size());
    for (const Fe& f : c.cells) w.fe(f);
  }
}

std::vector<ColumnCells> read_columns(ByteReader& r) {
  std::vector<ColumnCells> cols(r.u32());
  for (auto& c : cols) {
    c.index = r.u16();
    const uint64_t n = r.u64();
    if (n > r.remaining() / 8) throw Error(ErrorCode::MalformedBundle, "column too long");
    c.cells.resize(n);
    for (auto& f : c.cells) f = r.fe();
  }
  return cols;
}

Digest read_digest(ByteReader& r) {
  Digest d;
  auto b = r.bytes(32);
  std::copy(b.begin(), b.end(), d.begin());
  return d;
}

std::vector<ColumnId> columns_of(const ConstraintTable& t, ColumnKind kind) {
  std::vector<ColumnId> out;
  for (const auto& c : t.spec().columns) {
    if (c.id.kind == kind) out.push_back(c.id);
  }
  return out;
}

// Loads `cols` into the matching columns of `table`; false on a shape
// mismatch.
bool load_columns(ConstraintTable& table, ColumnKind kind, const std::vector<ColumnCells>& cols,
                  std::vector<std::string>& problems, const char* what) {
  const auto ids = columns_of(table, kind);
  if (ids.size() != cols.size()) {
    problems.push_back(std::string(what) + ": expected " + std::to_string(ids.size()) +
                       " columns, bundle has " + std::to_string(cols.size()));
    return false;
  }
  for (size_t i = 0; i < ids.size(); ++i) {
    if (cols[i].index != ids[i].index || cols[i].cells.size() != table.extent(ids[i])) {
      problems.push_back(std::string(what) + ": column " + table.decl(ids[i]).name +
                         " has the wrong shape");
      return false;
    }
    table.assign_column(ids[i], cols[i].cells);
  }
  return true;
}

}  // namespace

Bundle make_bundle(const CompiledQuery& q, const QueryPlan& plan) {
  const ConstraintTable& t = q.layout.table;
  Bundle b;
  b.id_bits = q.layout.schema.id_bits;
  b.node_budget = q.layout.node_budget;
  b.edge_budget = q.layout.edge_budget;
  b.n_rows = t.n_rows();
  b.schema_json = q.layout.schema.to_json();
  b.db_commitment = q.db_commitment;
  b.plan_hash = q.plan_hash;
  b.params = plan.params;
  for (ColumnId id : columns_of(t, ColumnKind::Instance)) {
    auto v = t.column(id).first(t.extent(id));
    b.instance.push_back({id.index, {v.begin(), v.end()}});
  }
  for (ColumnId id : columns_of(t, ColumnKind::Advice)) {
    auto v = t.column(id).first(t.extent(id));
    b.witness.push_back({id.index, {v.begin(), v.end()}});
    b.commitments.push_back(commit_column(t, id));
  }
  b.alpha = q.challenges.alpha;
  b.beta = q.challenges.beta;
  b.retry = q.challenges.retry;
  return b;
}

std::vector<uint8_t> serialize_bundle(const Bundle& b) {
  ByteWriter out;
  out.bytes(kMagic);
  out.u16(b.version);
  {
    ByteWriter s;
    s.u64(b.modulus);
    s.u32(b.id_bits);
    s.u64(b.node_budget);
    s.u64(b.edge_budget);
    s.u64(b.n_rows);
    section(out, kHeader, s);
  }
  {
    ByteWriter s;
    s.str(b.schema_json);
    section(out, kSchema, s);
  }
  {
    ByteWriter s;
    s.bytes(b.db_commitment);
    section(out, kDbCommitment, s);
  }
  {
    ByteWriter s;
    s.bytes(b.plan_hash);
    section(out, kPlanHash, s);
  }
  {
    ByteWriter s;
    s.u32(static_cast<uint32_t>(b.params.size()));
    for (const auto& [k, v] : b.params) {
      s.str(k);
      s.str(v);
    }
    section(out, kParams, s);
  }
  {
    ByteWriter s;
    write_columns(s, b.instance);
    section(out, kInstance, s);
  }
  {
    ByteWriter s;
    s.u32(static_cast<uint32_t>(b.commitments.size()));
    for (const auto& d : b.commitments) s.bytes(d);
    section(out, kCommitments, s);
  }
  {
    ByteWriter s;
    s.fe(b.alpha);
    s.fe(b.beta);
    s.u32(b.retry);
    section(out, kChallenges, s);
  }
  {
    ByteWriter s;
    write_columns(s, b.witness);
    section(out, kWitness, s);
  }
  return std::move(out.data());
}

Bundle parse_bundle(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) {
    throw Error(ErrorCode::MalformedBundle, "bad magic");
  }
  Bundle b;
  b.version = r.u16();
  if (b.version != kBundleVersion) {
    throw Error(ErrorCode::MalformedBundle, "unsupported version " + std::to_string(b.version));
  }
  uint16_t expected = kHeader;
  while (!r.done()) {
    const uint16_t tag = r.u16();
    const uint32_t len = r.u32();
    if (tag != expected) {
      throw Error(ErrorCode::MalformedBundle, "unexpected section " + std::to_string(tag));
    }
    ByteReader s(r.bytes(len));
    switch (tag) {
      case kHeader:
        b.modulus = s.u64();
        b.id_bits = s.u32();
        b.node_budget = s.u64();
        b.edge_budget = s.u64();
        b.n_rows = s.u64();
        break;
      case kSchema:
        b.schema_json = s.str();
        break;
      case kDbCommitment:
        b.db_commitment = read_digest(s);
        break;
      case kPlanHash:
        b.plan_hash = read_digest(s);
        break;
      case kParams: {
        const uint32_t n = s.u32();
        for (uint32_t i = 0; i < n; ++i) {
          std::string k = s.str();
          b.params[k] = s.str();
        }
        break;
      }
      case kInstance:
        b.instance = read_columns(s);
        break;
      case kCommitments: {
        const uint32_t n = s.u32();
        if (n > s.remaining() / 32) throw Error(ErrorCode::MalformedBundle, "truncated input");
        for (uint32_t i = 0; i < n; ++i) b.commitments.push_back(read_digest(s));
        break;
      }
      case kChallenges:
        b.alpha = s.fe();
        b.beta = s.fe();
        b.retry = s.u32();
        break;
      case kWitness:
        b.witness = read_columns(s);
        break;
    }
    if (!s.done()) throw Error(ErrorCode::MalformedBundle, "trailing bytes in section");
    ++expected;
  }
  if (expected != kWitness + 1) throw Error(ErrorCode::MalformedBundle, "missing sections");
  if (b.modulus != Fe::kModulus) throw Error(ErrorCode::MalformedBundle, "foreign field");
  return b;
}

VerifyReport verify_bundle(const Bundle& b, std::string_view plan_text,
                           const Digest& expected_db) {
  VerifyReport rep;
  auto& problems = rep.problems;

  Schema schema;
  try {
    schema = Schema::from_json(b.schema_json);
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedBundle, std::string("schema: ") + e.what());
  }
  if (schema.id_bits != b.id_bits) problems.push_back("header: id_bits disagree with schema");
  const QueryPlan plan = parse_plan(plan_text, b.params, &schema);
  if (plan.hash() != b.plan_hash) problems.push_back("plan hash mismatch");
  if (b.db_commitment != expected_db) problems.push_back("db commitment mismatch");

  const size_t cap = size_t{1} << 26;
  if (b.node_budget == 0 || b.edge_budget == 0 || b.node_budget > cap || b.edge_budget > cap) {
    throw Error(ErrorCode::MalformedBundle, "implausible row budgets");
  }
  QueryLayout layout = layout_for_verify(plan, schema, b.node_budget, b.edge_budget);
  ConstraintTable& t = layout.table;
  if (t.n_rows() != b.n_rows) {
    problems.push_back("table size mismatch");
    return rep;
  }
  if (!load_columns(t, ColumnKind::Instance, b.instance, problems, "instance") ||
      !load_columns(t, ColumnKind::Advice, b.witness, problems, "witness")) {
    return rep;
  }

  const auto advice = columns_of(t, ColumnKind::Advice);
  if (b.commitments.size() != advice.size()) {
    problems.push_back("commitment count mismatch");
    return rep;
  }
  std::vector<Digest> phase1;
  for (size_t i = 0; i < advice.size(); ++i) {
    const Digest d = commit_column(t, advice[i]);
    if (d != b.commitments[i]) {
      problems.push_back("commitment mismatch for column " + t.decl(advice[i]).name);
    }
    if (t.decl(advice[i]).phase == 1) phase1.push_back(b.commitments[i]);
  }
  if (b.retry > kMaxChallengeRetries) problems.push_back("challenge retry out of range");
  const Challenges ch = challenges_from_commitments(phase1, b.retry);
  if (ch.alpha != b.alpha || ch.beta != b.beta) problems.push_back("challenge mismatch");
  t.set_challenges({b.alpha, b.beta});

  rep.verdict = check_satisfied(t);
  if (!rep.verdict.satisfied) {
    problems.push_back("constraints unsatisfied: " +
                       std::to_string(rep.verdict.failures.size()) + " failures");
  }
  const auto recovered = ops::db_commitment_from_table(t, schema, layout.db);
  if (!recovered || *recovered != b.db_commitment) {
    problems.push_back("database columns do not match the db commitment");
  }
  const auto header = header_cells(b.db_commitment, b.plan_hash);
  for (size_t i = 0; i < kHeaderRows; ++i) {
    if (t.cell(layout.header, i) != header[i]) {
      problems.push_back("header cells do not match the db commitment and plan hash");
      break;
    }
  }
  rep.result = read_result(t, layout.result);
  rep.ok = problems.empty();
  return rep;
}

std::string VerifyReport::to_string() const {
  std::ostringstream os;
  os << (ok ? "verified" : "REJECTED") << "\n";
  for (const auto& p : problems) os << "  " << p << "\n";
  if (!verdict.satisfied) {
    const size_t shown = std::min<size_t>(verdict.failures.size(), 20);
    for (size_t i = 0; i < shown; ++i) {
      const auto& f = verdict.failures[i];
      os << "  " << zkgraph::to_string(f.kind) << " " << f.index << " row " << f.row << ": "
         << f.detail << "\n";
    }
    if (shown < verdict.failures.size()) {
      os << "  ... " << verdict.failures.size() - shown << " more\n";
    }
  }
  return os.str();
}

}  // namespace zkgraph
