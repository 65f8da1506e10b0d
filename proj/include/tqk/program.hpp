#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tqk {

// Numerical-reasoning program: a list of binary steps whose arguments are
// literals or references (#k) to earlier steps. The program's value is the
// value of its last step.
//
// Canonical text: "op(a, b), op(#0, b)". Nested calls such as
// "divide(subtract(a, b), b)" are accepted on input and flattened
// post-order, so their canonical form uses #refs.
enum class Op { kAdd, kSubtract, kMultiply, kDivide, kExp, kGreater };

std::string_view to_string(Op op);

struct Number {
  double value = 0.0;
  friend bool operator==(const Number&, const Number&) = default;
};
struct StepRef {
  std::size_t index = 0;
  friend bool operator==(const StepRef&, const StepRef&) = default;
};
// "const_100" style literal; numerically identical to Number.
struct Const {
  double value = 0.0;
  friend bool operator==(const Const&, const Const&) = default;
};

using Arg = std::variant<Number, StepRef, Const>;

struct Step {
  Op op = Op::kAdd;
  Arg lhs;
  Arg rhs;
  friend bool operator==(const Step&, const Step&) = default;
};

struct Program {
  std::vector<Step> steps;
  friend bool operator==(const Program&, const Program&) = default;
};

// Result of running a program: a number, or yes/no from a final `greater`.
using ProgramValue = std::variant<double, bool>;

// Throws ParseError (with offset) on unknown ops, wrong arity, bad or
// forward references, and trailing garbage.
Program parse_program(std::string_view text);
std::string print_program(const Program& program);

// Throws ExecError on division by zero, on a `greater` result used as an
// operand or anywhere but the last step, and on invalid programs.
ProgramValue eval_program(const Program& program);

// "yes"/"no" or format_number(value).
std::string value_to_string(const ProgramValue& value);

// Structural equality: same ops, same reference shape, literal values
// within `tolerance`. Number and Const with equal values compare equal.
bool programs_equivalent(const Program& a, const Program& b, double tolerance = 1e-9);

}  // namespace tqk
