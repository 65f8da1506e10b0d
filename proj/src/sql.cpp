#include "tqk/sql.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "tqk/error.hpp"
#include "tqk/numeric.hpp"

namespace tqk {

namespace {

constexpr std::pair<Aggregate, std::string_view> kAggregates[] = {
    {Aggregate::kMax, "MAX"}, {Aggregate::kMin, "MIN"}, {Aggregate::kCount, "COUNT"},
    {Aggregate::kSum, "SUM"}, {Aggregate::kAvg, "AVG"},
};

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class SqlParser {
 public:
  explicit SqlParser(std::string_view text) : text_(text) {}

  SqlQuery parse() {
    SqlQuery q;
    skip_ws();
    if (!keyword("SELECT")) throw ParseError("expected SELECT", pos_);
    skip_ws();

    std::size_t save = pos_;
    bool has_agg = false;
    for (const auto& [agg, name] : kAggregates) {
      if (keyword(name)) {
        skip_ws();
        if (peek() == '(') {
          ++pos_;
          q.agg = agg;
          has_agg = true;
        } else {
          pos_ = save;  // a column that happens to be called e.g. "Count"
        }
        break;
      }
    }
    q.select_column = column(has_agg);
    if (has_agg) {
      skip_ws();
      if (peek() != ')') throw ParseError("expected ')'", pos_);
      ++pos_;
    }
    skip_ws();
    if (keyword("FROM")) {
      skip_ws();
      q.table_name = table_name();
      skip_ws();
    }
    if (keyword("WHERE")) {
      do {
        skip_ws();
        q.conditions.push_back(condition());
        skip_ws();
      } while (keyword("AND"));
    }
    skip_ws();
    if (peek() == ';') {
      ++pos_;
      skip_ws();
    }
    if (pos_ < text_.size()) throw ParseError("trailing garbage", pos_);
    return q;
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool keyword_at(std::size_t p, std::string_view kw) const {
    if (p + kw.size() > text_.size()) return false;
    if (!iequals(text_.substr(p, kw.size()), kw)) return false;
    if (p > 0 && is_word_char(text_[p - 1])) return false;
    std::size_t end = p + kw.size();
    return end == text_.size() || !is_word_char(text_[end]);
  }

  bool keyword(std::string_view kw) {
    if (!keyword_at(pos_, kw)) return false;
    pos_ += kw.size();
    return true;
  }

  std::string quoted(char close) {
    std::size_t start = pos_;
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= text_.size()) throw ParseError("unterminated quote", start);
      char c = text_[pos_++];
      if (c == close) {
        if (close != ']' && peek() == close) {  // doubled quote escapes itself
          out.push_back(close);
          ++pos_;
          continue;
        }
        return out;
      }
      out.push_back(c);
    }
  }

  std::string column(bool in_aggregate) {
    skip_ws();
    char c = peek();
    if (c == '"') return quoted('"');
    if (c == '`') return quoted('`');
    if (c == '[') return quoted(']');
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (d == '=' || d == '<' || d == '>' || d == '(' || d == ';') break;
      if (d == ')' && in_aggregate) break;
      if (keyword_at(pos_, "FROM") || keyword_at(pos_, "WHERE") || keyword_at(pos_, "AND")) break;
      ++pos_;
    }
    std::string name(trim(text_.substr(start, pos_ - start)));
    if (name.empty()) throw ParseError("expected column", start);
    return name;
  }

  std::string table_name() {
    char c = peek();
    if (c == '"') return quoted('"');
    if (c == '`') return quoted('`');
    if (c == '[') return quoted(']');
    std::size_t start = pos_;
    while (pos_ < text_.size() && (is_word_char(text_[pos_]) || text_[pos_] == '.' || text_[pos_] == '-')) ++pos_;
    if (pos_ == start) throw ParseError("expected table name", start);
    return std::string(text_.substr(start, pos_ - start));
  }

  SqlCondition condition() {
    SqlCondition cond;
    cond.column = column(false);
    skip_ws();
    switch (peek()) {
      case '=': cond.op = CompareOp::kEq; break;
      case '>': cond.op = CompareOp::kGt; break;
      case '<': cond.op = CompareOp::kLt; break;
      default: throw ParseError("expected one of = > <", pos_);
    }
    ++pos_;
    skip_ws();
    if (peek() == '\'') {
      cond.literal = quoted('\'');
    } else if (peek() == '"') {
      cond.literal = quoted('"');
    } else {
      std::size_t start = pos_;
      while (pos_ < text_.size() && !keyword_at(pos_, "AND") && text_[pos_] != ';') ++pos_;
      cond.literal = std::string(trim(text_.substr(start, pos_ - start)));
      if (cond.literal.empty()) throw ParseError("expected literal", start);
    }
    return cond;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string quote(std::string_view s, char q) {
  std::string out(1, q);
  for (char c : s) {
    out.push_back(c);
    if (c == q) out.push_back(q);
  }
  out.push_back(q);
  return out;
}

bool bare_table_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return is_word_char(c) || c == '.' || c == '-';
  });
}

bool matches(const std::string& cell, const BoundCondition& cond) {
  auto lhs = parse_number(cell);
  auto rhs = parse_number(cond.literal);
  if (lhs && rhs) {
    switch (cond.op) {
      case CompareOp::kEq: return *lhs == *rhs;
      case CompareOp::kGt: return *lhs > *rhs;
      case CompareOp::kLt: return *lhs < *rhs;
    }
  }
  return cond.op == CompareOp::kEq && trim(cell) == trim(cond.literal);
}

}  // namespace

std::string_view to_string(Aggregate agg) {
  for (const auto& [a, name] : kAggregates) {
    if (a == agg) return name;
  }
  return "?";
}

SqlQuery parse_sql(std::string_view text) { return SqlParser(text).parse(); }

std::string print_sql(const SqlQuery& q) {
  std::string out = "SELECT ";
  if (q.agg) {
    out += to_string(*q.agg);
    out += '(';
    out += quote(q.select_column, '"');
    out += ')';
  } else {
    out += quote(q.select_column, '"');
  }
  if (!q.table_name.empty()) {
    out += " FROM ";
    out += bare_table_name(q.table_name) ? q.table_name : quote(q.table_name, '"');
  }
  for (std::size_t i = 0; i < q.conditions.size(); ++i) {
    const auto& c = q.conditions[i];
    out += i == 0 ? " WHERE " : " AND ";
    out += quote(c.column, '"');
    out += c.op == CompareOp::kEq ? " = " : c.op == CompareOp::kGt ? " > " : " < ";
    out += quote(c.literal, '\'');
  }
  return out;
}

BoundQuery bind_sql(const SqlQuery& q, const UnifiedTable& table) {
  if (table.header_rows() == 0) throw ExecError("table has no header rows");
  const auto headers = table.column_headers();
  auto resolve = [&](const std::string& name) {
    std::string_view want = trim(name);
    for (std::size_t c = 0; c < headers.size(); ++c) {
      if (iequals(headers[c], want)) return c;
    }
    throw ExecError("unknown column " + name);
  };
  BoundQuery b;
  b.select_column = resolve(q.select_column);
  b.agg = q.agg;
  for (const auto& c : q.conditions) b.conditions.push_back({resolve(c.column), c.op, c.literal});
  return b;
}

std::string exec_sql(const BoundQuery& q, const UnifiedTable& table) {
  std::vector<const std::string*> selected;
  for (std::size_t r = table.header_rows(); r < table.rows(); ++r) {
    bool keep = std::all_of(q.conditions.begin(), q.conditions.end(), [&](const BoundCondition& c) {
      return matches(table.cell(r, c.column).text, c);
    });
    if (keep) selected.push_back(&table.cell(r, q.select_column).text);
  }

  if (!q.agg) {
    std::string out;
    for (std::size_t i = 0; i < selected.size(); ++i) {
      if (i) out += ", ";
      out += *selected[i];
    }
    return out;
  }
  if (*q.agg == Aggregate::kCount) return std::to_string(selected.size());
  if (selected.empty()) {
    throw ExecError(std::string(to_string(*q.agg)) + " over empty result");
  }
  std::vector<double> values;
  values.reserve(selected.size());
  for (const std::string* s : selected) {
    auto v = parse_number(*s);
    if (!v) {
      throw ExecError("non-numeric value '" + *s + "' under " + std::string(to_string(*q.agg)));
    }
    values.push_back(*v);
  }
  double result = 0.0;
  switch (*q.agg) {
    case Aggregate::kMax: result = *std::max_element(values.begin(), values.end()); break;
    case Aggregate::kMin: result = *std::min_element(values.begin(), values.end()); break;
    case Aggregate::kSum: result = std::accumulate(values.begin(), values.end(), 0.0); break;
    case Aggregate::kAvg:
      result = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
      break;
    case Aggregate::kCount: break;
  }
  return format_number(result);
}

std::string exec_sql(const SqlQuery& q, const UnifiedTable& table) {
  return exec_sql(bind_sql(q, table), table);
}

}  // namespace tqk
