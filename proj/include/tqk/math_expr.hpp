#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "tqk/program.hpp"

namespace tqk {

enum class BinaryOp { kAdd, kSub, kMul, kDiv };

// Arithmetic expression tree over + - * / and numeric literals. Literals
// may be written with "$", thousands commas, or a trailing "%" (x% = x/100).
class MathExpr {
 public:
  struct Node {
    bool is_literal = true;
    double value = 0.0;  // literal value
    BinaryOp op = BinaryOp::kAdd;
    std::unique_ptr<Node> lhs, rhs;
  };

  MathExpr() = default;
  explicit MathExpr(std::unique_ptr<Node> root) : root_(std::move(root)) {}
  MathExpr(const MathExpr& other);
  MathExpr& operator=(const MathExpr& other);
  MathExpr(MathExpr&&) noexcept = default;
  MathExpr& operator=(MathExpr&&) noexcept = default;

  const Node& root() const { return *root_; }
  bool valid() const { return root_ != nullptr; }

  static MathExpr literal(double v);
  static MathExpr binary(BinaryOp op, MathExpr lhs, MathExpr rhs);

 private:
  std::unique_ptr<Node> root_;
};

// Standard precedence, left associativity, parentheses, unary minus on
// literals. Throws ParseError with offset; a divisor that folds to zero is
// rejected as "division by zero".
MathExpr parse_math_expr(std::string_view text);

// Canonical text: spaced operators, parentheses only where the tree needs
// them. parse_math_expr(print_math_expr(e)) rebuilds the same tree.
std::string print_math_expr(const MathExpr& e);

// Throws ExecError on division by zero.
double eval_math_expr(const MathExpr& e);

// Post-order flattening: each operator node becomes one step, in the order
// its evaluation completes. A bare literal has no operator and is rejected
// with Error.
Program expr_to_program(const MathExpr& e);

}  // namespace tqk
