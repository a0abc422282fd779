#pragma once

// Attestation bundles: everything a verifier needs to re-check a query
// offline, given the plan text and the expected database commitment.
//
// Layout: "ZKGB", u16 version, then sections of (u16 tag, u32 length,
// payload). Field cells are 8-byte little-endian.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zkgraph/compiler.hpp"

namespace zkgraph {

inline constexpr uint16_t kBundleVersion = 1;

struct ColumnCells {
  uint16_t index = 0;
  std::vector<Fe> cells;
};

struct Bundle {
  uint16_t version = kBundleVersion;
  uint64_t modulus = Fe::kModulus;
  uint32_t id_bits = 0;
  uint64_t node_budget = 0;
  uint64_t edge_budget = 0;
  uint64_t n_rows = 0;
  std::string schema_json;
  Digest db_commitment{};
  Digest plan_hash{};
  std::map<std::string, std::string> params;
  std::vector<ColumnCells> instance;
  // One commitment per advice column (both phases) in declaration order.
  std::vector<Digest> commitments;
  Fe alpha;
  Fe beta;
  uint32_t retry = 0;
  std::vector<ColumnCells> witness;
};

Bundle make_bundle(const CompiledQuery& query, const QueryPlan& plan);

std::vector<uint8_t> serialize_bundle(const Bundle& bundle);
// Errors: MalformedBundle.
Bundle parse_bundle(std::span<const uint8_t> bytes);

struct VerifyReport {
  bool ok = false;
  std::vector<std::string> problems;
  VerdictReport verdict;
  ResultTable result;

  std::string to_string() const;
};

// Rebuilds the circuit from the plan and the public header, loads the
// witness, and checks column commitments, challenges, constraints, the
// database commitment recovered from the database columns, the plan hash and
// the header cells. Errors: MalformedBundle for a structurally unusable
// bundle; plan errors when `plan_text` does not parse.
VerifyReport verify_bundle(const Bundle& bundle, std::string_view plan_text,
                           const Digest& expected_db_commitment);

}  // namespace zkgraph
