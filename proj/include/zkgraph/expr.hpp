#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "zkgraph/field.hpp"

namespace zkgraph {

enum class ColumnKind : uint8_t { Advice = 0, Fixed = 1, Instance = 2 };

struct ColumnId {
  ColumnKind kind = ColumnKind::Advice;
  uint16_t index = 0;

  friend auto operator<=>(const ColumnId&, const ColumnId&) = default;
};

std::string to_string(ColumnId id);

class ConstraintTable;

// Immutable polynomial expression over table cells. Cells reference a column
// at a signed row offset; offsets wrap modulo the table height.
class Expr {
 public:
  enum class Op : uint8_t { Cell, Const, Add, Sub, Mul };

  Expr();  // the constant 0
  Expr(Fe constant);  // NOLINT(google-explicit-constructor)

  static Expr cell(ColumnId column, int rotation = 0);
  static Expr constant(uint64_t v) { return Expr(Fe(v)); }

  Op op() const;
  ColumnId column() const;
  int rotation() const;
  Fe constant_value() const;
  const Expr& lhs() const;
  const Expr& rhs() const;

  // Shifts every cell reference by `delta` rows.
  Expr rotated(int delta) const;

  int degree() const;
  int max_abs_rotation() const;
  void for_each_cell(const std::function<void(ColumnId, int)>& fn) const;

  Fe evaluate(const ConstraintTable& table, size_t row) const;
  // Evaluates the expression on every row using the active field kernels.
  std::vector<Fe> evaluate_all(const ConstraintTable& table) const;

  std::string to_string() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

}  // namespace zkgraph
