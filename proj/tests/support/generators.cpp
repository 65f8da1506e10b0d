#include "generators.hpp"

#include <set>

namespace tqk::testgen {

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::string word(Rng& rng, std::size_t min_len, std::size_t max_len) {
  std::string w;
  for (std::size_t i = 0, n = uniform(rng, min_len, max_len); i < n; ++i) {
    w += static_cast<char>('a' + uniform(rng, 0, 25));
  }
  return w;
}

std::string messy_text(Rng& rng, std::size_t max_len) {
  static const std::vector<std::string> pieces = {
      "a", "Z", "7", " ", ",", ".", "\"", "'", "\\", "|", "\t", "\n", "%", "$", "-",
      "{", "}", "[", "]", "\xc3\xa9", "\xe2\x82\xac", "\xe4\xb8\xad", "\xf0\x9f\x98\x80", "x", "42"};
  std::string s;
  for (std::size_t i = 0, n = uniform(rng, 0, max_len); i < n; ++i) {
    s += pieces[uniform(rng, 0, pieces.size() - 1)];
  }
  return s;
}

std::vector<std::vector<std::string>> string_grid(Rng& rng, std::size_t rows, std::size_t cols,
                                                  double p_empty) {
  std::vector<std::vector<std::string>> g(rows, std::vector<std::string>(cols));
  for (auto& row : g) {
    for (auto& cell : row) cell = coin(rng, p_empty) ? (coin(rng, 0.3) ? " " : "") : word(rng);
  }
  return g;
}

QAExample valid_example(Rng& rng, std::size_t index) {
  QAExample ex;
  ex.id = "ex-" + std::to_string(index);
  ex.dataset = coin(rng, 0.5) ? "synthetic" : messy_text(rng, 6);
  ex.category = static_cast<Category>(uniform(rng, 0, 2));
  ex.question = word(rng) + " " + messy_text(rng, 20) + "?";

  for (std::size_t i = 0, n = uniform(rng, 0, 3); i < n; ++i) {
    ex.passages.push_back({"p" + std::to_string(i), messy_text(rng, 8), messy_text(rng, 40)});
  }
  for (std::size_t i = 0, n = uniform(rng, 0, 2); i < n; ++i) {
    ex.images.push_back({"img" + std::to_string(i), "file://img/" + word(rng) + ".png", messy_text(rng, 8)});
  }

  const std::size_t rows = uniform(rng, 1, 6), cols = uniform(rng, 1, 5);
  Grid grid(rows, std::vector<Cell>(cols));
  for (auto& row : grid) {
    for (auto& cell : row) {
      cell.text = coin(rng, 0.2) ? "" : messy_text(rng, 10);
      if (!ex.passages.empty() && coin(rng, 0.2)) {
        cell.links.push_back(ex.passages[uniform(rng, 0, ex.passages.size() - 1)].id);
      }
      if (!ex.images.empty() && coin(rng, 0.1)) {
        cell.images.push_back(ex.images[uniform(rng, 0, ex.images.size() - 1)].id);
      }
    }
  }
  // Merged regions: disjoint by construction, one per pair of rows at most.
  std::vector<Region> merged;
  for (std::size_t r = 0; r + 1 < rows; r += 2) {
    if (cols >= 2 && coin(rng, 0.3)) {
      std::size_t c0 = uniform(rng, 0, cols - 2);
      merged.push_back({r, c0, r + uniform(rng, 0, 1), c0 + 1});
    }
  }
  std::optional<std::string> caption;
  if (coin(rng, 0.4)) caption = messy_text(rng, 12);
  ex.table = UnifiedTable("tbl-" + std::to_string(index), std::move(grid), uniform(rng, 0, std::min<std::size_t>(rows, 2)),
                          std::move(merged), caption);

  ex.answer.format = static_cast<AnswerFormat>(uniform(rng, 0, 3));
  ex.answer.value = coin(rng, 0.5) ? std::to_string(uniform(rng, 0, 5000)) : messy_text(rng, 12);
  if (ex.answer.format != AnswerFormat::kDirect) ex.answer.derivation = messy_text(rng, 20);
  return ex;
}

UnifiedTable sql_table(Rng& rng, std::size_t rows, std::size_t cols) {
  static const std::vector<std::string> words = {"red", "blue", "green", "Red", "x", "alpha"};
  Grid grid;
  std::vector<Cell> header;
  for (std::size_t c = 0; c < cols; ++c) header.push_back({"c" + std::to_string(c), {}, {}});
  grid.push_back(header);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<Cell> row;
    for (std::size_t c = 0; c < cols; ++c) {
      std::string v;
      switch (uniform(rng, 0, 9)) {
        case 0: case 1: v = words[uniform(rng, 0, words.size() - 1)]; break;
        case 2: v = std::to_string(uniform(rng, 0, 99)) + "." + std::to_string(uniform(rng, 0, 9)); break;
        case 3: v = "-" + std::to_string(uniform(rng, 1, 20)); break;
        default: v = std::to_string(uniform(rng, 0, 30)); break;
      }
      row.push_back({v, {}, {}});
    }
    grid.push_back(row);
  }
  return UnifiedTable("sql", std::move(grid), 1);
}

std::string math_expr_text(Rng& rng, int depth) {
  if (depth <= 0 || coin(rng, 0.25)) {
    std::string lit = std::to_string(uniform(rng, 1, 999));
    if (coin(rng, 0.3)) lit += "." + std::to_string(uniform(rng, 0, 99));
    return lit;
  }
  static const char* ops[] = {" + ", " - ", " * ", " / "};
  const char* op = ops[uniform(rng, 0, 3)];
  std::string lhs = math_expr_text(rng, depth - 1);
  std::string rhs = math_expr_text(rng, depth - 1);
  return "(" + lhs + op + rhs + ")";
}

UnifiedTable distinct_token_table(Rng& rng, std::size_t body_rows, std::size_t cols) {
  std::set<std::string> used = {"row", "is", "column"};
  auto fresh = [&] {
    for (;;) {
      std::string w = "q" + word(rng, 4, 7);
      if (used.insert(w).second) return w;
    }
  };
  Grid grid;
  std::vector<Cell> header;
  for (std::size_t c = 0; c < cols; ++c) header.push_back({fresh(), {}, {}});
  grid.push_back(header);
  for (std::size_t r = 0; r < body_rows; ++r) {
    std::vector<Cell> row;
    for (std::size_t c = 0; c < cols; ++c) row.push_back({fresh(), {}, {}});
    grid.push_back(row);
  }
  return UnifiedTable("distinct", std::move(grid), 1);
}

}  // namespace tqk::testgen

namespace tqk::testgen {

SqlCase random_sql(Rng& rng, std::size_t cols, const std::vector<std::vector<std::string>>& body) {
  static const char* aggs[] = {"MAX", "MIN", "COUNT", "SUM", "AVG"};
  auto kw = [&](std::string k) {
    if (coin(rng, 0.3)) {
      for (auto& ch : k) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    return k;
  };
  auto col = [&](std::size_t c) {
    std::string name = (coin(rng, 0.2) ? "C" : "c") + std::to_string(c);
    switch (uniform(rng, 0, 3)) {
      case 0: return "\"" + name + "\"";
      case 1: return "`" + name + "`";
      case 2: return "[" + name + "]";
      default: return name;
    }
  };
  SqlCase out;
  out.spec.select = uniform(rng, 0, cols - 1);
  std::string text = kw("SELECT") + " ";
  if (coin(rng, 0.6)) {
    out.spec.agg = aggs[uniform(rng, 0, 4)];
    text += kw(*out.spec.agg) + "(" + col(out.spec.select) + ")";
  } else {
    text += col(out.spec.select);
  }
  if (coin(rng, 0.5)) text += " " + kw("FROM") + " t";
  for (std::size_t i = 0, n = uniform(rng, 0, 3); i < n; ++i) {
    oracle::SqlCond c;
    c.column = uniform(rng, 0, cols - 1);
    c.op = "=<>"[uniform(rng, 0, 2)];
    if (!body.empty() && coin(rng, 0.6)) {
      c.literal = body[uniform(rng, 0, body.size() - 1)][c.column];
    } else {
      c.literal = std::to_string(uniform(rng, 0, 40));
    }
    out.spec.conds.push_back(c);
    text += " " + kw(i == 0 ? "WHERE" : "AND") + " " + col(c.column) + " " + c.op + " ";
    text += coin(rng, 0.5) ? "'" + c.literal + "'" : c.literal;
  }
  out.text = text;
  return out;
}

}  // namespace tqk::testgen
