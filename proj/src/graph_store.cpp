#include "zkgraph/graph_store.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "zkgraph/bytes.hpp"
#include "zkgraph/error.hpp"

namespace zkgraph {

using nlohmann::json;

namespace {

constexpr uint32_t kDbMagic = 0x44474B5A;  // "ZKGD"
constexpr uint16_t kDbVersion = 1;

PropType parse_type(const std::string& s) {
  if (s == "int") return PropType::Int;
  if (s == "string") return PropType::String;
  throw Error(ErrorCode::ParseError, "schema: unknown property type '" + s + "'");
}

std::vector<PropSpec> parse_props(const json& j, const char* key) {
  std::vector<PropSpec> out;
  if (!j.contains(key)) return out;
  for (const auto& p : j.at(key)) {
    out.push_back({p.at("name").get<std::string>(),
                   parse_type(p.value("type", std::string("int")))});
  }
  return out;
}

json props_json(const std::vector<PropSpec>& props) {
  json a = json::array();
  for (const auto& p : props) {
    json o;
    o["name"] = p.name;
    o["type"] = p.type == PropType::Int ? "int" : "string";
    a.push_back(o);
  }
  return a;
}

std::optional<size_t> find_prop(const std::vector<PropSpec>& props, std::string_view name) {
  for (size_t i = 0; i < props.size(); ++i) {
    if (props[i].name == name) return i;
  }
  return std::nullopt;
}

}  // namespace

std::optional<size_t> Schema::node_prop(std::string_view name) const {
  return find_prop(node_props, name);
}

std::optional<size_t> Schema::edge_prop(std::string_view name) const {
  return find_prop(edge_props, name);
}

Schema Schema::from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    Schema s;
    s.node_label = j.value("node_label", s.node_label);
    s.edge_kind = j.value("edge_kind", s.edge_kind);
    s.directed = j.value("directed", true);
    s.id_bits = j.value("id_bits", 16u);
    s.node_props = parse_props(j, "node_props");
    s.edge_props = parse_props(j, "edge_props");
    if (s.id_bits < 4 || s.id_bits > 20) {
      throw Error(ErrorCode::ParseError, "schema: id_bits must be in [4, 20]");
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("schema: ") + e.what());
  }
}

std::string Schema::to_json() const {
  nlohmann::ordered_json j;
  j["node_label"] = node_label;
  j["edge_kind"] = edge_kind;
  j["directed"] = directed;
  j["id_bits"] = id_bits;
  j["node_props"] = props_json(node_props);
  j["edge_props"] = props_json(edge_props);
  return j.dump();
}

bool GraphDb::has_node(uint64_t id) const { return node_index(id).has_value(); }

std::optional<size_t> GraphDb::node_index(uint64_t id) const {
  auto it = std::lower_bound(nodes.ids.begin(), nodes.ids.end(), id);
  if (it == nodes.ids.end() || *it != id) return std::nullopt;
  return static_cast<size_t>(it - nodes.ids.begin());
}

Fe hash_to_field(std::string_view s) {
  Sha256 h;
  h.update(std::string_view("ZKGRAPH/str")).update(s);
  return fe_from_bytes_wide(h.finish());
}

GraphDb make_db(Schema schema, NodeTable nodes, EdgeTable edges) {
  const uint64_t max_id = schema.max_id();
  if (nodes.props.size() != schema.node_props.size() ||
      edges.props.size() != schema.edge_props.size()) {
    throw Error(ErrorCode::BadParameter, "property columns do not match the schema");
  }
  for (const auto& p : nodes.props) {
    if (p.size() != nodes.size()) throw Error(ErrorCode::BadParameter, "node prop length");
  }
  if (edges.dst.size() != edges.src.size()) {
    throw Error(ErrorCode::BadParameter, "edge column lengths differ");
  }
  for (const auto& p : edges.props) {
    if (p.size() != edges.size()) throw Error(ErrorCode::BadParameter, "edge prop length");
  }

  for (uint64_t id : nodes.ids) {
    if (id == kDummyId || id >= max_id) {
      throw Error(ErrorCode::IdOutOfRange,
                  "node id " + std::to_string(id) + " outside [1, " +
                      std::to_string(max_id) + ")");
    }
  }

  // Sort nodes by id.
  std::vector<size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return nodes.ids[a] < nodes.ids[b]; });
  NodeTable sn;
  sn.props.resize(nodes.props.size());
  for (size_t i : order) {
    if (!sn.ids.empty() && sn.ids.back() == nodes.ids[i]) {
      throw Error(ErrorCode::DuplicateNodeId, std::to_string(nodes.ids[i]));
    }
    sn.ids.push_back(nodes.ids[i]);
    for (size_t p = 0; p < nodes.props.size(); ++p) sn.props[p].push_back(nodes.props[p][i]);
  }

  GraphDb db;
  db.schema = std::move(schema);
  db.nodes = std::move(sn);

  for (size_t i = 0; i < edges.size(); ++i) {
    for (uint64_t end : {edges.src[i], edges.dst[i]}) {
      if (!db.has_node(end)) {
        throw Error(ErrorCode::DanglingEdge,
                    "edge (" + std::to_string(edges.src[i]) + ", " +
                        std::to_string(edges.dst[i]) + ") references unknown node " +
                        std::to_string(end));
      }
    }
  }

  // Sort edges by (src, dst, props).
  order.resize(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (edges.src[a] != edges.src[b]) return edges.src[a] < edges.src[b];
    if (edges.dst[a] != edges.dst[b]) return edges.dst[a] < edges.dst[b];
    for (const auto& p : edges.props) {
      if (p[a] != p[b]) return p[a] < p[b];
    }
    return false;
  });
  EdgeTable se;
  se.props.resize(edges.props.size());
  for (size_t i : order) {
    se.src.push_back(edges.src[i]);
    se.dst.push_back(edges.dst[i]);
    for (size_t p = 0; p < edges.props.size(); ++p) se.props[p].push_back(edges.props[p][i]);
  }
  db.edges = std::move(se);
  db.commitment = commit_db(db);
  return db;
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line, size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unterminated quote");
  }
  out.push_back(std::move(cur));
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  return lines;
}

uint64_t parse_id(const std::string& s, size_t line_no) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": bad id '" + s + "'");
  }
  return v;
}

Fe parse_prop(const std::string& s, PropType type, size_t line_no) {
  if (type == PropType::String) return hash_to_field(s);
  int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
  return Fe::from_i64(v);
}

void check_header(const std::vector<std::string>& header,
                  const std::vector<std::string>& expected, const char* file) {
  if (header != expected) {
    std::string want;
    for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
    throw Error(ErrorCode::ParseError,
                std::string(file) + " line 1: header must be '" + want + "'");
  }
}

}  // namespace

GraphDb load_csv_text(std::string_view nodes_csv, std::string_view edges_csv,
                      const Schema& schema) {
  NodeTable nodes;
  nodes.props.resize(schema.node_props.size());
  {
    auto lines = split_lines(nodes_csv);
    if (lines.empty()) throw Error(ErrorCode::ParseError, "nodes line 1: missing header");
    std::vector<std::string> expected{"id"};
    for (const auto& p : schema.node_props) expected.push_back(p.name);
    check_header(split_csv_line(lines[0], 1), expected, "nodes");
    for (size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const size_t line_no = i + 1;
      auto f = split_csv_line(lines[i], line_no);
      if (f.size() != expected.size()) {
        throw Error(ErrorCode::ParseError, "nodes line " + std::to_string(line_no) +
                                               ": expected " +
                                               std::to_string(expected.size()) + " fields");
      }
      const uint64_t id = parse_id(f[0], line_no);
      if (id == kDummyId || id >= schema.max_id()) {
        throw Error(ErrorCode::IdOutOfRange,
                    "nodes line " + std::to_string(line_no) + ": id " + f[0]);
      }
      nodes.ids.push_back(id);
      for (size_t p = 0; p < schema.node_props.size(); ++p) {
        nodes.props[p].push_back(parse_prop(f[p + 1], schema.node_props[p].type, line_no));
      }
    }
  }
  EdgeTable edges;
  edges.props.resize(schema.edge_props.size());
  {
    auto lines = split_lines(edges_csv);
    if (lines.empty()) throw Error(ErrorCode::ParseError, "edges line 1: missing header");
    std::vector<std::string> expected{"src", "dst"};
    for (const auto& p : schema.edge_props) expected.push_back(p.name);
    check_header(split_csv_line(lines[0], 1), expected, "edges");
    for (size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const size_t line_no = i + 1;
      auto f = split_csv_line(lines[i], line_no);
      if (f.size() != expected.size()) {
        throw Error(ErrorCode::ParseError, "edges line " + std::to_string(line_no) +
                                               ": expected " +
                                               std::to_string(expected.size()) + " fields");
      }
      edges.src.push_back(parse_id(f[0], line_no));
      edges.dst.push_back(parse_id(f[1], line_no));
      for (size_t p = 0; p < schema.edge_props.size(); ++p) {
        edges.props[p].push_back(parse_prop(f[p + 2], schema.edge_props[p].type, line_no));
      }
    }
  }
  return make_db(schema, std::move(nodes), std::move(edges));
}

GraphDb load_csv(const std::string& nodes_path, const std::string& edges_path,
                 const Schema& schema) {
  const auto n = read_file(nodes_path);
  const auto e = read_file(edges_path);
  return load_csv_text(std::string_view(reinterpret_cast<const char*>(n.data()), n.size()),
                       std::string_view(reinterpret_cast<const char*>(e.data()), e.size()),
                       schema);
}

CsrTables to_csr(const GraphDb& db) {
  CsrTables csr;
  const size_t n = db.nodes.size();
  csr.row.assign(n + 1, 0);
  csr.val.resize(db.edges.props.size());
  // Edges are already sorted by (src, dst), so the segments are contiguous.
  for (size_t i = 0; i < db.edges.size(); ++i) {
    const size_t u = *db.node_index(db.edges.src[i]);
    ++csr.row[u + 1];
    csr.col.push_back(db.edges.dst[i]);
    for (size_t p = 0; p < db.edges.props.size(); ++p) {
      csr.val[p].push_back(db.edges.props[p][i]);
    }
  }
  for (size_t i = 0; i < n; ++i) csr.row[i + 1] += csr.row[i];
  csr.idx.resize(csr.col.size());
  std::iota(csr.idx.begin(), csr.idx.end(), 0);
  return csr;
}

EdgeTable from_csr(const NodeTable& nodes, const CsrTables& csr) {
  EdgeTable e;
  e.props.resize(csr.val.size());
  for (size_t i = 0; i < nodes.size(); ++i) {
    for (uint64_t k = csr.row[i]; k < csr.row[i + 1]; ++k) {
      e.src.push_back(nodes.ids[i]);
      e.dst.push_back(csr.col[k]);
      for (size_t p = 0; p < csr.val.size(); ++p) e.props[p].push_back(csr.val[p][k]);
    }
  }
  return e;
}

PaddedEdges pad_with_dummies(const EdgeTable& table, size_t target_rows) {
  if (target_rows < table.size()) {
    throw Error(ErrorCode::TargetTooSmall, std::to_string(target_rows) + " < " +
                                               std::to_string(table.size()));
  }
  if (target_rows == 0 || (target_rows & (target_rows - 1)) != 0) {
    throw Error(ErrorCode::BadParameter, "target rows must be a power of two");
  }
  PaddedEdges out{table, std::vector<uint8_t>(table.size(), 0)};
  out.table.src.resize(target_rows, kDummyId);
  out.table.dst.resize(target_rows, kDummyId);
  for (auto& p : out.table.props) p.resize(target_rows, Fe::zero());
  out.dummy.resize(target_rows, 1);
  return out;
}

Digest commit_db_columns(const Schema& schema,
                         const std::vector<std::vector<Fe>>& node_columns,
                         const std::vector<std::vector<Fe>>& edge_columns) {
  Sha256 h;
  h.update(std::string_view("ZKGRAPH/db/v1"));
  h.update(schema.to_json());
  auto put = [&](const std::vector<std::vector<Fe>>& cols) {
    const uint64_t rows = cols.empty() ? 0 : cols[0].size();
    h.update_u64_le(rows);
    std::vector<uint8_t> buf;
    for (const auto& c : cols) {
      buf.clear();
      buf.reserve(c.size() * 8);
      for (Fe v : c) {
        auto b = v.to_le_bytes();
        buf.insert(buf.end(), b.begin(), b.end());
      }
      h.update(buf);
    }
  };
  put(node_columns);
  put(edge_columns);
  return h.finish();
}

namespace {

std::vector<Fe> to_fe(const std::vector<uint64_t>& v) {
  std::vector<Fe> out;
  out.reserve(v.size());
  for (auto x : v) out.push_back(Fe(x));
  return out;
}

}  // namespace

Digest commit_db(const GraphDb& db) {
  std::vector<std::vector<Fe>> nc{to_fe(db.nodes.ids)};
  for (const auto& p : db.nodes.props) nc.push_back(p);
  std::vector<std::vector<Fe>> ec{to_fe(db.edges.src), to_fe(db.edges.dst)};
  for (const auto& p : db.edges.props) ec.push_back(p);
  return commit_db_columns(db.schema, nc, ec);
}

std::vector<uint8_t> serialize_db(const GraphDb& db) {
  ByteWriter w;
  w.u32(kDbMagic);
  w.u16(kDbVersion);
  w.str(db.schema.to_json());
  w.u64(db.nodes.size());
  for (auto id : db.nodes.ids) w.u64(id);
  for (const auto& p : db.nodes.props) {
    for (Fe v : p) w.fe(v);
  }
  w.u64(db.edges.size());
  for (auto v : db.edges.src) w.u64(v);
  for (auto v : db.edges.dst) w.u64(v);
  for (const auto& p : db.edges.props) {
    for (Fe v : p) w.fe(v);
  }
  w.bytes(db.commitment);
  return std::move(w.data());
}

GraphDb deserialize_db(std::span<const uint8_t> bytes) {
  ByteReader r(bytes, ErrorCode::ParseError);
  if (r.u32() != kDbMagic) throw Error(ErrorCode::ParseError, "not a database file");
  if (r.u16() != kDbVersion) throw Error(ErrorCode::ParseError, "unsupported database version");
  Schema schema = Schema::from_json(r.str());
  auto count = [&](size_t width) {
    const uint64_t n = r.u64();
    if (n > r.remaining() / width) throw Error(ErrorCode::ParseError, "truncated database");
    return static_cast<size_t>(n);
  };
  NodeTable nodes;
  const size_t n = count(8);
  nodes.ids.resize(n);
  for (auto& id : nodes.ids) id = r.u64();
  nodes.props.assign(schema.node_props.size(), std::vector<Fe>(n));
  for (auto& p : nodes.props) {
    for (auto& v : p) v = r.fe();
  }
  EdgeTable edges;
  const size_t m = count(16);
  edges.src.resize(m);
  edges.dst.resize(m);
  for (auto& v : edges.src) v = r.u64();
  for (auto& v : edges.dst) v = r.u64();
  edges.props.assign(schema.edge_props.size(), std::vector<Fe>(m));
  for (auto& p : edges.props) {
    for (auto& v : p) v = r.fe();
  }
  Digest stored{};
  auto b = r.bytes(32);
  std::copy(b.begin(), b.end(), stored.begin());
  if (!r.done()) throw Error(ErrorCode::ParseError, "trailing bytes in database file");
  GraphDb db = make_db(std::move(schema), std::move(nodes), std::move(edges));
  if (db.commitment != stored) {
    throw Error(ErrorCode::ParseError, "database commitment does not match its content");
  }
  return db;
}

GraphDb random_graph(uint64_t seed, size_t n_nodes, size_t n_edges, bool directed,
                     unsigned id_bits) {
  std::mt19937_64 rng(seed);
  Schema s;
  s.node_label = "Node";
  s.edge_kind = "LINK";
  s.directed = directed;
  s.id_bits = id_bits;
  s.node_props = {{"score", PropType::Int}};
  NodeTable nodes;
  nodes.props.resize(1);
  for (size_t i = 1; i <= n_nodes; ++i) {
    nodes.ids.push_back(i);
    nodes.props[0].push_back(Fe(rng() % 100));
  }
  EdgeTable edges;
  for (size_t i = 0; i < n_edges && n_nodes > 0; ++i) {
    edges.src.push_back(1 + rng() % n_nodes);
    edges.dst.push_back(1 + rng() % n_nodes);
  }
  return make_db(std::move(s), std::move(nodes), std::move(edges));
}

}  // namespace zkgraph
