#pragma once

// Incremental construction of one constraint table out of operator regions.
//
// Each region owns its columns and declares its own gates, lookups and
// permutations. Fixed lookup tables are shared and de-duplicated. Advice and
// instance values are staged while the layout is built and written into the
// table by finish().

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zkgraph/constraint_table.hpp"

namespace zkgraph {

inline constexpr size_t kMinTableRows = 16;

struct RegionCost {
  std::string name;
  std::string op;
  size_t native_rows = 0;
  size_t budget_rows = 0;
  size_t gates = 0;
  size_t lookups = 0;
  size_t perms = 0;
  size_t copies = 0;
  size_t columns = 0;
};

struct CostReport {
  std::vector<RegionCost> regions;
  std::vector<std::pair<std::string, size_t>> fixed_tables;
  size_t n_rows = 0;

  // Native region rows plus the sizes of the distinct fixed lookup tables.
  size_t rows() const;
  size_t padded_rows() const;
  size_t gates() const;
  size_t lookups() const;
  size_t perms() const;
  size_t copies() const;
  size_t columns() const;
};

size_t next_pow2(size_t n);

class CircuitBuilder {
 public:
  explicit CircuitBuilder(bool proving) : proving_(proving) {}

  bool proving() const { return proving_; }

  // Opens a region; subsequent declarations are attributed to it.
  void begin_region(std::string name, std::string op, size_t budget_rows,
                    size_t native_rows);
  const std::string& region_name() const;

  ColumnId advice(const std::string& name, size_t extent);
  // Phase-2 running-product column spanning the whole table.
  ColumnId advice_phase2(const std::string& name);
  ColumnId fixed(const std::string& name, std::vector<Fe> values);
  // Fixed 0/1 column that is 1 on rows [begin, end). Shared across regions.
  ColumnId selector(size_t begin, size_t end);
  // Fixed column holding 0, 1, ..., rows - 1. Shared across regions.
  ColumnId positions(size_t rows);
  ColumnId instance(const std::string& name, size_t extent);

  void gate(const std::string& name, ColumnId selector, Expr poly);
  void lookup(LookupDecl decl);
  // Creates the z column and registers the permutation.
  void permutation(const std::string& name, std::vector<ColumnId> left,
                   std::vector<ColumnId> right,
                   std::optional<ColumnId> left_selector = std::nullopt,
                   std::optional<ColumnId> right_selector = std::nullopt);
  void copy(CellRef a, CellRef b);
  void copy_rows(ColumnId from, ColumnId to, size_t rows);
  void bind_instance(CellRef cell, CellRef instance);

  // Shared fixed tables; return the table index.
  size_t range_table(uint64_t bound);
  size_t tuple_table(const std::string& name, std::vector<std::vector<Fe>> rows);

  // Staged values. Ignored for advice when not proving.
  void assign(ColumnId column, std::vector<Fe> values);
  void set_instance(ColumnId column, std::vector<Fe> values);

  size_t max_extent() const;
  const CircuitSpec& spec() const { return spec_; }
  CostReport cost() const;

  // Builds the table with n_rows = next_pow2(max(kMinTableRows, max extent))
  // and writes the staged fixed, instance and advice values.
  ConstraintTable finish() const;

 private:
  RegionCost& current();

  bool proving_;
  CircuitSpec spec_;
  std::vector<RegionCost> regions_;
  uint16_t next_index_[3] = {0, 0, 0};
  std::map<std::pair<size_t, size_t>, ColumnId> selectors_;
  std::map<size_t, ColumnId> positions_;
  std::map<uint64_t, size_t> range_tables_;
  std::map<std::string, size_t> tuple_tables_;
  std::map<ColumnId, std::vector<Fe>> staged_;
};

// Adds one lookup of `value` into the range table [0, 2^bits) on rows where
// `selector` is non-zero.
void range_check(CircuitBuilder& b, const std::string& name, const Expr& value,
                 const Expr& selector, unsigned bits);

// Two-limb variant for values below 2^(2*bits): value = hi * 2^bits + lo with
// both limbs range-checked. Returns the (hi, lo) advice columns.
std::pair<ColumnId, ColumnId> range_check_wide(CircuitBuilder& b, const std::string& name,
                                               const Expr& value, ColumnId selector,
                                               size_t extent, unsigned bits);

// Is-zero gadget: flag = [x == 0] with inverse witness inv. Emits
// flag*(1-flag) = 0, flag*x = 0, (1-flag)*(x*inv - 1) = 0 and flag*inv = 0.
void is_zero_gadget(CircuitBuilder& b, const std::string& name, ColumnId selector,
                    const Expr& x, ColumnId flag, ColumnId inv);
// Witness for the gadget.
void is_zero_witness(std::span<const Fe> x, std::vector<Fe>& flag, std::vector<Fe>& inv);

}  // namespace zkgraph
