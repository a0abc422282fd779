#include "zkgraph/expr.hpp"

#include <algorithm>
#include <cstdlib>

#include "zkgraph/constraint_table.hpp"
#include "zkgraph/error.hpp"
#include "zkgraph/field_kernels.hpp"

namespace zkgraph {

std::string to_string(ColumnId id) {
  static constexpr const char* kNames[] = {"advice", "fixed", "instance"};
  return std::string(kNames[static_cast<int>(id.kind)]) + "[" +
         std::to_string(id.index) + "]";
}

struct Expr::Node {
  Op op = Op::Const;
  ColumnId column{};
  int rotation = 0;
  Fe value{};
  Expr lhs;
  Expr rhs;
};

// A null node is the constant 0.
Expr::Expr() = default;

Expr::Expr(Fe constant) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = constant;
  node_ = std::move(n);
}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::cell(ColumnId column, int rotation) {
  auto n = std::make_shared<Node>();
  n->op = Op::Cell;
  n->column = column;
  n->rotation = rotation;
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr::Op Expr::op() const { return node_ ? node_->op : Op::Const; }
ColumnId Expr::column() const { return node_ ? node_->column : ColumnId{}; }
int Expr::rotation() const { return node_ ? node_->rotation : 0; }
Fe Expr::constant_value() const { return node_ ? node_->value : Fe::zero(); }
const Expr& Expr::lhs() const { return node_->lhs; }
const Expr& Expr::rhs() const { return node_->rhs; }

Expr operator+(const Expr& a, const Expr& b) {
  if (a.op() == Expr::Op::Const && b.op() == Expr::Op::Const) {
    return Expr(a.constant_value() + b.constant_value());
  }
  if (a.op() == Expr::Op::Const && a.constant_value().is_zero()) return b;
  if (b.op() == Expr::Op::Const && b.constant_value().is_zero()) return a;
  auto n = std::make_shared<Expr::Node>();
  n->op = Expr::Op::Add;
  n->lhs = a;
  n->rhs = b;
  return Expr(std::shared_ptr<const Expr::Node>(std::move(n)));
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.op() == Expr::Op::Const && b.op() == Expr::Op::Const) {
    return Expr(a.constant_value() - b.constant_value());
  }
  if (b.op() == Expr::Op::Const && b.constant_value().is_zero()) return a;
  auto n = std::make_shared<Expr::Node>();
  n->op = Expr::Op::Sub;
  n->lhs = a;
  n->rhs = b;
  return Expr(std::shared_ptr<const Expr::Node>(std::move(n)));
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.op() == Expr::Op::Const && b.op() == Expr::Op::Const) {
    return Expr(a.constant_value() * b.constant_value());
  }
  if (a.op() == Expr::Op::Const && a.constant_value() == Fe::one()) return b;
  if (b.op() == Expr::Op::Const && b.constant_value() == Fe::one()) return a;
  auto n = std::make_shared<Expr::Node>();
  n->op = Expr::Op::Mul;
  n->lhs = a;
  n->rhs = b;
  return Expr(std::shared_ptr<const Expr::Node>(std::move(n)));
}

Expr operator-(const Expr& a) { return Expr(Fe::zero()) - a; }

Expr Expr::rotated(int delta) const {
  switch (op()) {
    case Op::Const:
      return *this;
    case Op::Cell:
      return cell(column(), rotation() + delta);
    case Op::Add:
      return lhs().rotated(delta) + rhs().rotated(delta);
    case Op::Sub:
      return lhs().rotated(delta) - rhs().rotated(delta);
    case Op::Mul:
      return lhs().rotated(delta) * rhs().rotated(delta);
  }
  return *this;
}

int Expr::degree() const {
  switch (op()) {
    case Op::Const:
      return 0;
    case Op::Cell:
      return 1;
    case Op::Add:
    case Op::Sub:
      return std::max(lhs().degree(), rhs().degree());
    case Op::Mul:
      return lhs().degree() + rhs().degree();
  }
  return 0;
}

int Expr::max_abs_rotation() const {
  switch (op()) {
    case Op::Const:
      return 0;
    case Op::Cell:
      return std::abs(rotation());
    default:
      return std::max(lhs().max_abs_rotation(), rhs().max_abs_rotation());
  }
}

void Expr::for_each_cell(const std::function<void(ColumnId, int)>& fn) const {
  switch (op()) {
    case Op::Const:
      return;
    case Op::Cell:
      fn(column(), rotation());
      return;
    default:
      lhs().for_each_cell(fn);
      rhs().for_each_cell(fn);
  }
}

static size_t wrap_row(size_t row, int rotation, size_t n) {
  const auto r = static_cast<long long>(row) + rotation;
  const auto m = static_cast<long long>(n);
  return static_cast<size_t>(((r % m) + m) % m);
}

Fe Expr::evaluate(const ConstraintTable& table, size_t row) const {
  switch (op()) {
    case Op::Const:
      return constant_value();
    case Op::Cell:
      return table.cell(column(), wrap_row(row, rotation(), table.n_rows()));
    case Op::Add:
      return lhs().evaluate(table, row) + rhs().evaluate(table, row);
    case Op::Sub:
      return lhs().evaluate(table, row) - rhs().evaluate(table, row);
    case Op::Mul:
      return lhs().evaluate(table, row) * rhs().evaluate(table, row);
  }
  return Fe::zero();
}

std::vector<Fe> Expr::evaluate_all(const ConstraintTable& table) const {
  const size_t n = table.n_rows();
  const auto& k = kernels::active();
  switch (op()) {
    case Op::Const:
      return std::vector<Fe>(n, constant_value());
    case Op::Cell: {
      auto col = table.column(column());
      std::vector<Fe> out(n);
      for (size_t i = 0; i < n; ++i) out[i] = col[wrap_row(i, rotation(), n)];
      return out;
    }
    default:
      break;
  }
  // Constant operands go through the scalar kernels.
  if (rhs().op() == Op::Const) {
    auto a = lhs().evaluate_all(table);
    const Fe s = rhs().constant_value();
    if (op() == Op::Add) k.add_scalar(a, a, s);
    if (op() == Op::Sub) k.add_scalar(a, a, -s);
    if (op() == Op::Mul) k.mul_scalar(a, a, s);
    return a;
  }
  if (lhs().op() == Op::Const && op() != Op::Sub) {
    auto b = rhs().evaluate_all(table);
    const Fe s = lhs().constant_value();
    if (op() == Op::Add) k.add_scalar(b, b, s);
    if (op() == Op::Mul) k.mul_scalar(b, b, s);
    return b;
  }
  auto a = lhs().evaluate_all(table);
  const auto b = rhs().evaluate_all(table);
  if (op() == Op::Add) k.add(a, a, b);
  if (op() == Op::Sub) k.sub(a, a, b);
  if (op() == Op::Mul) k.mul(a, a, b);
  return a;
}

std::string Expr::to_string() const {
  switch (op()) {
    case Op::Const:
      return constant_value().to_string();
    case Op::Cell: {
      std::string s = zkgraph::to_string(column());
      if (rotation() != 0) s += "@" + std::to_string(rotation());
      return s;
    }
    case Op::Add:
      return "(" + lhs().to_string() + " + " + rhs().to_string() + ")";
    case Op::Sub:
      return "(" + lhs().to_string() + " - " + rhs().to_string() + ")";
    case Op::Mul:
      return lhs().to_string() + "*" + rhs().to_string();
  }
  return {};
}

}  // namespace zkgraph
