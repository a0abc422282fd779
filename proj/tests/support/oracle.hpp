#pragma once

// Brute-force reference implementations of the graph operators. They work on
// plain adjacency data and share no code with the circuit side.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "zkgraph/graph_store.hpp"

namespace oracle {

using Row = std::vector<uint64_t>;

struct Table {
  std::vector<std::string> names;
  std::vector<Row> rows;
  bool edges = false;

  size_t id_column() const { return edges ? 1 : 0; }
};

inline constexpr uint64_t kInf = std::numeric_limits<uint64_t>::max();

inline uint64_t next_pow2(uint64_t n) {
  uint64_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Directed traversal pairs: the edges themselves, or both orientations of
// each edge when the kind is undirected.
inline std::vector<std::pair<uint64_t, uint64_t>> arcs(const zkgraph::GraphDb& db) {
  std::vector<std::pair<uint64_t, uint64_t>> out;
  for (size_t i = 0; i < db.edges.size(); ++i) {
    out.emplace_back(db.edges.src[i], db.edges.dst[i]);
    if (!db.directed()) out.emplace_back(db.edges.dst[i], db.edges.src[i]);
  }
  return out;
}

inline Table expand(const zkgraph::GraphDb& db, const std::set<uint64_t>& ids) {
  Table t{{"src", "dst"}, {}, true};
  for (auto [a, b] : arcs(db)) {
    if (ids.count(a)) t.rows.push_back({a, b});
  }
  return t;
}

// Bellman-Ford over unit weights; kInf when unreachable.
inline std::map<uint64_t, uint64_t> distances(const zkgraph::GraphDb& db, uint64_t src) {
  std::map<uint64_t, uint64_t> d;
  for (uint64_t id : db.nodes.ids) d[id] = kInf;
  d[src] = 0;
  const auto e = arcs(db);
  for (size_t round = 0; round < db.nodes.size(); ++round) {
    bool changed = false;
    for (auto [a, b] : e) {
      if (d[a] != kInf && d[a] + 1 < d[b]) {
        d[b] = d[a] + 1;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return d;
}

// (id, dist) per node; unreachable nodes carry the node budget.
inline Table sssp(const zkgraph::GraphDb& db, uint64_t src) {
  const uint64_t unreachable = next_pow2(db.nodes.size() + 1);
  Table t{{"id", "dist"}, {}, false};
  for (auto [id, d] : distances(db, src)) t.rows.push_back({id, d == kInf ? unreachable : d});
  return t;
}

// Predecessors of `dst` on some shortest path from `src`.
inline std::set<uint64_t> last_hops(const zkgraph::GraphDb& db, uint64_t src, uint64_t dst) {
  const auto d = distances(db, src);
  std::set<uint64_t> out;
  if (d.at(dst) == kInf) return out;
  for (auto [a, b] : arcs(db)) {
    if (b == dst && d.at(a) != kInf && d.at(a) + 1 == d.at(dst)) out.insert(a);
  }
  return out;
}

inline Table canon(const zkgraph::GraphDb& db) {
  Table t{{"src", "dst"}, {}, true};
  for (size_t i = 0; i < db.edges.size(); ++i) {
    const uint64_t a = db.edges.src[i], b = db.edges.dst[i];
    t.rows.push_back({std::min(a, b), std::max(a, b)});
    t.rows.push_back({std::max(a, b), std::min(a, b)});
  }
  return t;
}

inline Table nodes(const zkgraph::GraphDb& db) {
  Table t{{"id"}, {}, false};
  for (const auto& p : db.schema.node_props) t.names.push_back(p.name);
  for (size_t i = 0; i < db.nodes.size(); ++i) {
    Row r{db.nodes.ids[i]};
    for (const auto& p : db.nodes.props) r.push_back(p[i].value());
    t.rows.push_back(r);
  }
  return t;
}

// Value of `prop` for a row: its own column, else the node property of the
// row's id.
inline uint64_t prop_of(const zkgraph::GraphDb& db, const Table& t, const Row& r,
                        const std::string& prop) {
  for (size_t c = 0; c < t.names.size(); ++c) {
    if (t.names[c] == prop) return r[c];
  }
  const auto p = db.schema.node_prop(prop);
  const auto idx = db.node_index(r[t.id_column()]);
  return db.nodes.props[*p][*idx].value();
}

enum class Cmp { Eq, Ge, Le };

inline Table filter(const zkgraph::GraphDb& db, const Table& in, const std::string& prop, Cmp op,
                    uint64_t v) {
  Table out{in.names, {}, in.edges};
  for (const auto& r : in.rows) {
    const uint64_t x = prop_of(db, in, r, prop);
    const bool keep = op == Cmp::Eq ? x == v : op == Cmp::Ge ? x >= v : x <= v;
    if (keep) out.rows.push_back(r);
  }
  return out;
}

// The multiset of keys top-k must select.
inline std::multiset<uint64_t> topk_keys(const zkgraph::GraphDb& db, const Table& in,
                                         const std::string& key, size_t k, bool desc) {
  std::vector<uint64_t> keys;
  for (const auto& r : in.rows) keys.push_back(prop_of(db, in, r, key));
  std::sort(keys.begin(), keys.end());
  if (desc) std::reverse(keys.begin(), keys.end());
  keys.resize(std::min(k, keys.size()));
  return {keys.begin(), keys.end()};
}

inline std::multiset<Row> as_multiset(const std::vector<Row>& rows) {
  return {rows.begin(), rows.end()};
}

}  // namespace oracle
