#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tqk/table.hpp"

namespace tqk {

// WikiSQL-shaped query:
//   SELECT [AGG(] col [)] [FROM t] [WHERE col OP lit (AND col OP lit)*]
// with AGG in {MAX, MIN, COUNT, SUM, AVG} and OP in {=, >, <}.
// Column names are bare words (up to the next keyword or operator) or
// quoted with "..." / `...` / [...]; literals are bare text up to the next
// AND, or quoted with '...' or "...".
enum class Aggregate { kMax, kMin, kCount, kSum, kAvg };
enum class CompareOp { kEq, kGt, kLt };

std::string_view to_string(Aggregate agg);

struct SqlCondition {
  std::string column;
  CompareOp op = CompareOp::kEq;
  std::string literal;
  friend bool operator==(const SqlCondition&, const SqlCondition&) = default;
};

struct SqlQuery {
  std::string select_column;
  std::optional<Aggregate> agg;
  std::string table_name;  // informational; the query always runs on the given table
  std::vector<SqlCondition> conditions;
  friend bool operator==(const SqlQuery&, const SqlQuery&) = default;
};

// Column indices resolved against a table's joined header paths.
struct BoundCondition {
  std::size_t column = 0;
  CompareOp op = CompareOp::kEq;
  std::string literal;
};
struct BoundQuery {
  std::size_t select_column = 0;
  std::optional<Aggregate> agg;
  std::vector<BoundCondition> conditions;
};

// Throws ParseError with offset.
SqlQuery parse_sql(std::string_view text);

// Canonical text, e.g. SELECT COUNT("Name") FROM t WHERE "Age" > '30'.
std::string print_sql(const SqlQuery& q);

// Case-insensitive column lookup; throws ExecError("unknown column X").
BoundQuery bind_sql(const SqlQuery& q, const UnifiedTable& table);

// Filters body rows by every condition, then projects or aggregates.
// A condition compares numerically when both sides parse as numbers;
// otherwise "=" is exact string equality and "<"/">" do not match.
// Non-aggregate results join values with ", " in row order; COUNT of no
// rows is "0"; other aggregates throw ExecError on no rows or non-numeric
// values.
std::string exec_sql(const BoundQuery& q, const UnifiedTable& table);
std::string exec_sql(const SqlQuery& q, const UnifiedTable& table);

}  // namespace tqk
