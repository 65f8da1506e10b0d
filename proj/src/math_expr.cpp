#include "tqk/math_expr.hpp"

#include <cctype>

#include "tqk/error.hpp"
#include "tqk/numeric.hpp"

namespace tqk {

namespace {

using Node = MathExpr::Node;

std::unique_ptr<Node> clone(const Node& n) {
  auto out = std::make_unique<Node>();
  out->is_literal = n.is_literal;
  out->value = n.value;
  out->op = n.op;
  if (n.lhs) out->lhs = clone(*n.lhs);
  if (n.rhs) out->rhs = clone(*n.rhs);
  return out;
}

int precedence(BinaryOp op) { return op == BinaryOp::kAdd || op == BinaryOp::kSub ? 1 : 2; }

char symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd: return '+';
    case BinaryOp::kSub: return '-';
    case BinaryOp::kMul: return '*';
    case BinaryOp::kDiv: return '/';
  }
  return '?';
}

double eval_node(const Node& n) {
  if (n.is_literal) return n.value;
  double a = eval_node(*n.lhs);
  double b = eval_node(*n.rhs);
  switch (n.op) {
    case BinaryOp::kAdd: return a + b;
    case BinaryOp::kSub: return a - b;
    case BinaryOp::kMul: return a * b;
    case BinaryOp::kDiv:
      if (b == 0.0) throw ExecError("division by zero");
      return a / b;
  }
  return 0.0;
}

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  MathExpr parse() {
    auto root = expression();
    skip_ws();
    if (pos_ < text_.size()) throw ParseError("unexpected character", pos_);
    return MathExpr(std::move(root));
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  // Operator at the cursor and its byte length; accepts the Unicode
  // spellings used in some annotated derivations.
  std::optional<std::pair<BinaryOp, std::size_t>> peek_op(bool additive) {
    skip_ws();
    std::string_view rest = text_.substr(pos_);
    if (rest.empty()) return std::nullopt;
    if (additive) {
      if (rest.front() == '+') return std::pair{BinaryOp::kAdd, std::size_t{1}};
      if (rest.front() == '-') return std::pair{BinaryOp::kSub, std::size_t{1}};
      if (rest.starts_with("\u2212")) return std::pair{BinaryOp::kSub, std::size_t{3}};
    } else {
      if (rest.front() == '*') return std::pair{BinaryOp::kMul, std::size_t{1}};
      if (rest.front() == '/') return std::pair{BinaryOp::kDiv, std::size_t{1}};
      if (rest.starts_with("\u00d7")) return std::pair{BinaryOp::kMul, std::size_t{2}};
      if (rest.starts_with("\u00f7")) return std::pair{BinaryOp::kDiv, std::size_t{2}};
    }
    return std::nullopt;
  }

  std::unique_ptr<Node> expression() {
    auto lhs = term();
    while (auto op = peek_op(true)) {
      std::size_t op_pos = pos_;
      pos_ += op->second;
      lhs = combine(op->first, std::move(lhs), term(), op_pos);
    }
    return lhs;
  }

  std::unique_ptr<Node> term() {
    auto lhs = factor();
    while (auto op = peek_op(false)) {
      std::size_t op_pos = pos_;
      pos_ += op->second;
      lhs = combine(op->first, std::move(lhs), factor(), op_pos);
    }
    return lhs;
  }

  std::unique_ptr<Node> combine(BinaryOp op, std::unique_ptr<Node> lhs, std::unique_ptr<Node> rhs,
                                std::size_t op_pos) {
    if (op == BinaryOp::kDiv) {
      double divisor = 0.0;
      try {
        divisor = eval_node(*rhs);
      } catch (const ExecError&) {
        throw ParseError("division by zero", op_pos);
      }
      if (divisor == 0.0) throw ParseError("division by zero", op_pos);
    }
    auto n = std::make_unique<Node>();
    n->is_literal = false;
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  std::unique_ptr<Node> factor() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    if (text_[pos_] == '(') {
      ++pos_;
      auto inner = expression();
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ')') throw ParseError("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    return literal();
  }

  // [-] ["$"] digits-with-commas [. digits] ["%"]
  std::unique_ptr<Node> literal() {
    std::size_t start = pos_;
    std::size_t p = pos_;
    auto take_from = [&](std::size_t& i, auto pred) {
      while (i < text_.size() && pred(text_[i])) ++i;
    };
    auto take = [&](auto pred) { take_from(p, pred); };
    if (p < text_.size() && text_[p] == '-') ++p;
    if (p < text_.size() && text_[p] == '$') ++p;
    if (p < text_.size() && text_[p] == '-') ++p;
    std::size_t digits_start = p;
    take([](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == ','; });
    if (p < text_.size() && text_[p] == '.') {
      ++p;
      take([](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    }
    if (p == digits_start) throw ParseError("expected number", start);
    // A trailing comma belongs to surrounding text, not the literal.
    while (p > digits_start && text_[p - 1] == ',') --p;
    if (p < text_.size() && (text_[p] == 'e' || text_[p] == 'E')) {
      std::size_t q = p + 1;
      if (q < text_.size() && (text_[q] == '-' || text_[q] == '+')) ++q;
      std::size_t exp_digits = q;
      take_from(q, [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
      if (q > exp_digits) p = q;
    }
    if (p < text_.size() && text_[p] == '%') ++p;
    auto v = parse_number(text_.substr(start, p - start));
    if (!v) throw ParseError("malformed number", start);
    pos_ = p;
    auto n = std::make_unique<Node>();
    n->value = *v;
    return n;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print_node(const Node& n, std::string& out) {
  if (n.is_literal) {
    out += format_number(n.value);
    return;
  }
  const int p = precedence(n.op);
  auto child = [&](const Node& c, bool right) {
    bool parens = !c.is_literal && (precedence(c.op) < p || (right && precedence(c.op) == p));
    if (parens) out += '(';
    print_node(c, out);
    if (parens) out += ')';
  };
  child(*n.lhs, false);
  out += ' ';
  out += symbol(n.op);
  out += ' ';
  child(*n.rhs, true);
}

Arg flatten(const Node& n, Program& program) {
  if (n.is_literal) return Number{n.value};
  Arg lhs = flatten(*n.lhs, program);
  Arg rhs = flatten(*n.rhs, program);
  Op op = Op::kAdd;
  switch (n.op) {
    case BinaryOp::kAdd: op = Op::kAdd; break;
    case BinaryOp::kSub: op = Op::kSubtract; break;
    case BinaryOp::kMul: op = Op::kMultiply; break;
    case BinaryOp::kDiv: op = Op::kDivide; break;
  }
  program.steps.push_back({op, lhs, rhs});
  return StepRef{program.steps.size() - 1};
}

}  // namespace

MathExpr::MathExpr(const MathExpr& other) : root_(other.root_ ? clone(*other.root_) : nullptr) {}

MathExpr& MathExpr::operator=(const MathExpr& other) {
  if (this != &other) root_ = other.root_ ? clone(*other.root_) : nullptr;
  return *this;
}

MathExpr MathExpr::literal(double v) {
  auto n = std::make_unique<Node>();
  n->value = v;
  return MathExpr(std::move(n));
}

MathExpr MathExpr::binary(BinaryOp op, MathExpr lhs, MathExpr rhs) {
  auto n = std::make_unique<Node>();
  n->is_literal = false;
  n->op = op;
  n->lhs = std::move(lhs.root_);
  n->rhs = std::move(rhs.root_);
  return MathExpr(std::move(n));
}

MathExpr parse_math_expr(std::string_view text) { return ExprParser(text).parse(); }

std::string print_math_expr(const MathExpr& e) {
  std::string out;
  print_node(e.root(), out);
  return out;
}

double eval_math_expr(const MathExpr& e) {
  if (!e.valid()) throw ExecError("empty expression");
  return eval_node(e.root());
}

Program expr_to_program(const MathExpr& e) {
  if (!e.valid() || e.root().is_literal) throw Error("expression has no operator");
  Program program;
  flatten(e.root(), program);
  return program;
}

}  // namespace tqk
