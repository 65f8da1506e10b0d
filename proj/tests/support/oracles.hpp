#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

// Reference implementations written from the contracts, without reusing
// library code. Used by the unit tests and the acceptance binary.
namespace tqk::oracle {

// Column header finder, transcribed line by line (1-based rows).
std::size_t header_finder(const std::vector<std::vector<std::string>>& table);

struct SqlCond {
  std::size_t column;
  char op;  // '=', '<', '>'
  std::string literal;
};
struct SqlSpec {
  std::size_t select;
  std::optional<std::string> agg;  // MAX MIN COUNT SUM AVG
  std::vector<SqlCond> conds;
};

// Filter-then-fold over explicit body rows. Returns "ERROR" where the
// executor must refuse (empty or non-numeric input to a numeric aggregate).
// Only plain numerals (-?digits[.digits]) count as numbers here.
std::string sql(const std::vector<std::vector<std::string>>& body, const SqlSpec& q);

// Shortest round-tripping decimal, integers without a fraction.
std::string number(double v);

}  // namespace tqk::oracle
