#include "tqk/program.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

#include "tqk/error.hpp"
#include "tqk/numeric.hpp"

namespace tqk {

namespace {

struct OpName {
  Op op;
  std::string_view name;
};
constexpr OpName kOps[] = {
    {Op::kAdd, "add"},       {Op::kSubtract, "subtract"}, {Op::kMultiply, "multiply"},
    {Op::kDivide, "divide"}, {Op::kExp, "exp"},           {Op::kGreater, "greater"},
};

class ProgramParser {
 public:
  explicit ProgramParser(std::string_view text) : text_(text) {}

  Program parse() {
    skip_ws();
    if (at_end()) throw ParseError("empty program", pos_);
    parse_step();
    skip_ws();
    while (!at_end() && peek() == ',') {
      ++pos_;
      parse_step();
      skip_ws();
    }
    if (!at_end()) throw ParseError("trailing garbage", pos_);
    return std::move(program_);
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (at_end() || peek() != c) throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  std::string_view identifier() {
    std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  // Returns the index of the appended step.
  std::size_t parse_step() {
    skip_ws();
    std::size_t start = pos_;
    std::string_view name = identifier();
    if (name.empty()) throw ParseError("expected operation", start);
    auto it = std::find_if(std::begin(kOps), std::end(kOps),
                           [&](const OpName& o) { return o.name == name; });
    if (it == std::end(kOps)) throw ParseError("unknown op '" + std::string(name) + "'", start);
    expect('(');

    std::vector<std::pair<Arg, std::size_t>> args;  // arg, offset
    skip_ws();
    if (!at_end() && peek() == ')') {
      ++pos_;
    } else {
      while (true) {
        skip_ws();
        std::size_t arg_pos = pos_;
        args.emplace_back(parse_arg(), arg_pos);
        skip_ws();
        if (at_end()) throw ParseError("unterminated argument list", pos_);
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        if (peek() == ')') {
          ++pos_;
          break;
        }
        throw ParseError("expected ',' or ')'", pos_);
      }
    }
    if (args.size() != 2) {
      throw ParseError(std::string(name) + " expects 2 arguments, got " +
                           std::to_string(args.size()),
                       start);
    }
    const std::size_t index = program_.steps.size();
    for (const auto& [arg, offset] : args) {
      if (const auto* ref = std::get_if<StepRef>(&arg); ref && ref->index >= index) {
        throw ParseError("forward reference at step " + std::to_string(index), offset);
      }
    }
    program_.steps.push_back({it->op, args[0].first, args[1].first});
    return index;
  }

  Arg parse_arg() {
    if (at_end()) throw ParseError("expected argument", pos_);
    std::size_t start = pos_;
    char c = peek();
    if (c == '#') {
      ++pos_;
      std::size_t digits_start = pos_;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      if (pos_ == digits_start) throw ParseError("expected step index after '#'", pos_);
      std::size_t index = 0;
      auto [p, ec] = std::from_chars(text_.data() + digits_start, text_.data() + pos_, index);
      if (ec != std::errc()) throw ParseError("step index out of range", digits_start);
      return StepRef{index};
    }
    if (text_.substr(pos_).starts_with("const_")) {
      pos_ += 6;
      bool negative = false;
      if (!at_end() && peek() == 'm') {  // FinQA spelling of negative constants
        negative = true;
        ++pos_;
      }
      double v = number(pos_);
      return Const{negative ? -v : v};
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      pos_ = start;
      return StepRef{parse_step()};
    }
    return Number{number(start)};
  }

  double number(std::size_t start) {
    std::size_t p = pos_;
    if (p < text_.size() && (text_[p] == '-' || text_[p] == '+')) ++p;
    std::size_t mantissa = p;
    while (p < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[p])) || text_[p] == '.')) ++p;
    if (p == mantissa) throw ParseError("expected number", start);
    if (p < text_.size() && (text_[p] == 'e' || text_[p] == 'E')) {
      std::size_t q = p + 1;
      if (q < text_.size() && (text_[q] == '-' || text_[q] == '+')) ++q;
      std::size_t exp_digits = q;
      while (q < text_.size() && std::isdigit(static_cast<unsigned char>(text_[q]))) ++q;
      if (q > exp_digits) p = q;
    }
    std::string lexeme(text_.substr(pos_, p - pos_));
    if (!lexeme.empty() && lexeme.front() == '+') lexeme.erase(0, 1);
    double value = 0.0;
    auto [end, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), value);
    if (ec != std::errc() || end != lexeme.data() + lexeme.size() || !std::isfinite(value)) {
      throw ParseError("malformed number", pos_);
    }
    pos_ = p;
    return value;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Program program_;
};

std::string print_arg(const Arg& arg) {
  if (const auto* n = std::get_if<Number>(&arg)) return format_number(n->value);
  if (const auto* r = std::get_if<StepRef>(&arg)) return "#" + std::to_string(r->index);
  double v = std::get<Const>(arg).value;
  return v < 0 ? "const_m" + format_number(-v) : "const_" + format_number(v);
}

std::optional<double> literal_value(const Arg& arg) {
  if (const auto* n = std::get_if<Number>(&arg)) return n->value;
  if (const auto* c = std::get_if<Const>(&arg)) return c->value;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Op op) {
  for (const auto& o : kOps) {
    if (o.op == op) return o.name;
  }
  return "?";
}

Program parse_program(std::string_view text) { return ProgramParser(text).parse(); }

std::string print_program(const Program& program) {
  std::string out;
  for (std::size_t i = 0; i < program.steps.size(); ++i) {
    const Step& s = program.steps[i];
    if (i) out += ", ";
    out += to_string(s.op);
    out += '(';
    out += print_arg(s.lhs);
    out += ", ";
    out += print_arg(s.rhs);
    out += ')';
  }
  return out;
}

ProgramValue eval_program(const Program& program) {
  if (program.steps.empty()) throw ExecError("empty program");
  std::vector<ProgramValue> results;
  results.reserve(program.steps.size());
  for (std::size_t i = 0; i < program.steps.size(); ++i) {
    const Step& s = program.steps[i];
    auto operand = [&](const Arg& arg) -> double {
      if (auto v = literal_value(arg)) return *v;
      std::size_t ref = std::get<StepRef>(arg).index;
      if (ref >= i) throw ExecError("forward reference at step " + std::to_string(i));
      const auto* v = std::get_if<double>(&results[ref]);
      if (!v) throw ExecError("greater result used as numeric argument at step " + std::to_string(i));
      return *v;
    };
    double a = operand(s.lhs);
    double b = operand(s.rhs);
    double r = 0.0;
    switch (s.op) {
      case Op::kAdd: r = a + b; break;
      case Op::kSubtract: r = a - b; break;
      case Op::kMultiply: r = a * b; break;
      case Op::kDivide:
        if (b == 0.0) throw ExecError("division by zero at step " + std::to_string(i));
        r = a / b;
        break;
      case Op::kExp: r = std::pow(a, b); break;
      case Op::kGreater:
        if (i + 1 != program.steps.size()) {
          throw ExecError("greater may only be the final step (step " + std::to_string(i) + ")");
        }
        results.emplace_back(a > b);
        continue;
    }
    if (!std::isfinite(r)) throw ExecError("non-finite result at step " + std::to_string(i));
    results.emplace_back(r);
  }
  return results.back();
}

std::string value_to_string(const ProgramValue& value) {
  if (const auto* b = std::get_if<bool>(&value)) return *b ? "yes" : "no";
  return format_number(std::get<double>(value));
}

bool programs_equivalent(const Program& a, const Program& b, double tolerance) {
  if (a.steps.size() != b.steps.size()) return false;
  auto same_arg = [&](const Arg& x, const Arg& y) {
    auto lx = literal_value(x);
    auto ly = literal_value(y);
    if (lx && ly) return std::fabs(*lx - *ly) <= tolerance * std::max({1.0, std::fabs(*lx), std::fabs(*ly)});
    if (lx || ly) return false;
    return std::get<StepRef>(x).index == std::get<StepRef>(y).index;
  };
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    const Step& s = a.steps[i];
    const Step& t = b.steps[i];
    if (s.op != t.op || !same_arg(s.lhs, t.lhs) || !same_arg(s.rhs, t.rhs)) return false;
  }
  return true;
}

}  // namespace tqk
