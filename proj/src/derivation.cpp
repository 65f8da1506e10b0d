#include "tqk/derivation.hpp"

#include <cctype>

#include "tqk/error.hpp"
#include "tqk/math_expr.hpp"
#include "tqk/numeric.hpp"
#include "tqk/program.hpp"
#include "tqk/sql.hpp"

namespace tqk {

namespace {

bool looks_like_sql(std::string_view text) {
  std::string_view t = trim(text);
  return t.size() >= 6 && iequals(t.substr(0, 6), "select");
}

template <typename F>
bool parses(F&& f) {
  try {
    f();
    return true;
  } catch (const ParseError&) {
    return false;
  }
}

AnswerFormat resolve(std::string_view text, AnswerFormat format) {
  if (format != AnswerFormat::kDirect) return format;
  if (auto f = detect_derivation(text)) return *f;
  // Report the error of the most plausible grammar.
  if (looks_like_sql(text)) parse_sql(text);
  if (text.find('(') != std::string_view::npos && !trim(text).empty() &&
      std::isalpha(static_cast<unsigned char>(trim(text).front()))) {
    parse_program(text);
  }
  parse_math_expr(text);
  throw ParseError("unparseable derivation", 0);
}

}  // namespace

std::optional<AnswerFormat> detect_derivation(std::string_view text) {
  if (parses([&] { parse_program(text); })) return AnswerFormat::kProgram;
  if (looks_like_sql(text) && parses([&] { parse_sql(text); })) return AnswerFormat::kSql;
  if (parses([&] { parse_math_expr(text); })) return AnswerFormat::kMathExpr;
  return std::nullopt;
}

std::string execute_derivation(std::string_view text, const UnifiedTable& table, AnswerFormat format) {
  switch (resolve(text, format)) {
    case AnswerFormat::kProgram: return value_to_string(eval_program(parse_program(text)));
    case AnswerFormat::kSql: return exec_sql(parse_sql(text), table);
    case AnswerFormat::kMathExpr: return format_number(eval_math_expr(parse_math_expr(text)));
    case AnswerFormat::kDirect: break;
  }
  throw ParseError("unparseable derivation", 0);
}

std::string canonicalize_derivation(std::string_view text, AnswerFormat format) {
  switch (resolve(text, format)) {
    case AnswerFormat::kProgram: return print_program(parse_program(text));
    case AnswerFormat::kSql: return print_sql(parse_sql(text));
    case AnswerFormat::kMathExpr: return print_math_expr(parse_math_expr(text));
    case AnswerFormat::kDirect: break;
  }
  throw ParseError("unparseable derivation", 0);
}

}  // namespace tqk
