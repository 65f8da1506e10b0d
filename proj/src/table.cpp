#include "tqk/table.hpp"

#include <algorithm>
#include <set>

#include "tqk/error.hpp"
#include "tqk/numeric.hpp"

namespace tqk {

bool Cell::empty() const { return trim(text).empty(); }

namespace {

bool overlaps(const Region& a, const Region& b) {
  return a.r0 <= b.r1 && b.r0 <= a.r1 && a.c0 <= b.c1 && b.c0 <= a.c1;
}

// Empty string when every region is in bounds and disjoint.
std::string check_regions(const std::vector<Region>& regions, std::size_t rows,
                          std::size_t cols) {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Region& g = regions[i];
    if (g.r0 > g.r1 || g.c0 > g.c1 || g.r1 >= rows || g.c1 >= cols) {
      return "merged region out of bounds";
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (overlaps(g, regions[j])) return "merged regions overlap";
    }
  }
  return {};
}

}  // namespace

UnifiedTable::UnifiedTable(std::string id, Grid cells, std::size_t header_rows,
                           std::vector<Region> merged_regions,
                           std::optional<std::string> caption)
    : id_(std::move(id)),
      cells_(std::move(cells)),
      header_rows_(header_rows),
      merged_(std::move(merged_regions)),
      caption_(std::move(caption)) {
  for (const auto& row : cells_) cols_ = std::max(cols_, row.size());
  for (auto& row : cells_) row.resize(cols_);
  if (header_rows_ > cells_.size()) {
    throw Error("header_rows " + std::to_string(header_rows_) + " exceeds row count " +
                std::to_string(cells_.size()));
  }
  if (auto problem = check_regions(merged_, cells_.size(), cols_); !problem.empty()) {
    throw Error(problem);
  }
}

std::string UnifiedTable::column_header(std::size_t c) const {
  std::string out;
  for (std::size_t r = 0; r < header_rows_; ++r) {
    std::string_view part = trim(cells_[r][c].text);
    if (part.empty()) continue;
    if (!out.empty()) out += " / ";
    out += part;
  }
  return out;
}

std::vector<std::string> UnifiedTable::column_headers() const {
  std::vector<std::string> out;
  out.reserve(cols_);
  for (std::size_t c = 0; c < cols_; ++c) out.push_back(column_header(c));
  return out;
}

UnifiedTable UnifiedTable::with_body_prefix(std::size_t body_count) const {
  body_count = std::min(body_count, body_rows());
  std::vector<std::size_t> keep(body_count);
  for (std::size_t i = 0; i < body_count; ++i) keep[i] = i;
  return with_body_rows(keep);
}

UnifiedTable UnifiedTable::with_body_rows(const std::vector<std::size_t>& body_indices) const {
  Grid out(cells_.begin(), cells_.begin() + static_cast<std::ptrdiff_t>(header_rows_));
  // old row index -> new row index
  std::vector<std::optional<std::size_t>> remap(rows());
  for (std::size_t r = 0; r < header_rows_; ++r) remap[r] = r;
  for (std::size_t b : body_indices) {
    std::size_t r = header_rows_ + b;
    if (r >= rows()) throw Error("body row " + std::to_string(b) + " out of range");
    remap[r] = out.size();
    out.push_back(cells_[r]);
  }
  // A region survives only while its rows stay contiguous in the new grid.
  std::vector<Region> regions;
  for (const Region& g : merged_) {
    std::optional<std::size_t> first, last;
    bool contiguous = true;
    for (std::size_t r = g.r0; r <= g.r1; ++r) {
      if (!remap[r]) continue;
      if (last && *remap[r] != *last + 1) contiguous = false;
      if (!first) first = remap[r];
      last = remap[r];
    }
    if (!first || !contiguous) continue;
    regions.push_back({*first, g.c0, *last, g.c1});
  }
  return UnifiedTable(id_, std::move(out), header_rows_, std::move(regions), caption_);
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kSpreadSheet: return "SpreadSheet";
    case Category::kEncyclopedia: return "Encyclopedia";
    case Category::kStructured: return "Structured";
  }
  return "?";
}

std::string_view to_string(AnswerFormat f) {
  switch (f) {
    case AnswerFormat::kDirect: return "Direct";
    case AnswerFormat::kProgram: return "Program";
    case AnswerFormat::kMathExpr: return "MathExpr";
    case AnswerFormat::kSql: return "Sql";
  }
  return "?";
}

std::optional<Category> category_from_string(std::string_view s) {
  for (auto c : {Category::kSpreadSheet, Category::kEncyclopedia, Category::kStructured}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::optional<AnswerFormat> answer_format_from_string(std::string_view s) {
  for (auto f : {AnswerFormat::kDirect, AnswerFormat::kProgram, AnswerFormat::kMathExpr,
                 AnswerFormat::kSql}) {
    if (to_string(f) == s) return f;
  }
  return std::nullopt;
}

std::size_t find_header_rows(const UnifiedTable& table) {
  if (table.rows() == 0 || table.cols() == 0) throw Error("empty table");
  const std::size_t n_rows = table.rows();
  const std::size_t width = table.cols();

  std::vector<bool> non_empty(width);
  for (std::size_t c = 0; c < width; ++c) non_empty[c] = !table.cell(0, c).empty();

  // 1-based row cursor, as in the header-finder procedure.
  std::size_t n = 2;
  auto any_empty = [&] { return std::find(non_empty.begin(), non_empty.end(), false) != non_empty.end(); };
  while (n <= n_rows && any_empty()) {
    for (std::size_t c = 0; c < width; ++c) non_empty[c] = !table.cell(n - 1, c).empty();
    ++n;
  }
  return n;
}

std::size_t effective_header_rows(const UnifiedTable& table) {
  std::size_t n = find_header_rows(table);
  if (n == table.rows() + 1) return 1;
  return n - 1;
}

UnifiedTable normalize_table(Grid raw, const std::vector<Region>& merged, std::string id,
                             std::optional<std::string> caption) {
  if (raw.empty()) throw Error("empty table");
  std::size_t width = 0;
  for (const auto& row : raw) width = std::max(width, row.size());
  if (width == 0) throw Error("empty table");
  for (auto& row : raw) row.resize(width);

  if (auto problem = check_regions(merged, raw.size(), width); !problem.empty()) {
    throw Error(problem);
  }
  for (const Region& g : merged) {
    const std::string anchor = raw[g.r0][g.c0].text;
    for (std::size_t r = g.r0; r <= g.r1; ++r) {
      for (std::size_t c = g.c0; c <= g.c1; ++c) raw[r][c].text = anchor;
    }
  }
  // Header detection needs a table object; header_rows is fixed up after.
  UnifiedTable probe(id, raw, 0, merged, caption);
  std::size_t header = effective_header_rows(probe);
  return UnifiedTable(std::move(id), std::move(raw), header, merged, std::move(caption));
}

UnifiedTable normalize_table(const std::vector<std::vector<std::string>>& raw,
                             const std::vector<Region>& merged, std::string id,
                             std::optional<std::string> caption) {
  Grid grid;
  grid.reserve(raw.size());
  for (const auto& row : raw) grid.emplace_back(row.begin(), row.end());
  return normalize_table(std::move(grid), merged, std::move(id), std::move(caption));
}

UnifiedTable normalize_table(const UnifiedTable& table) {
  return normalize_table(table.cells(), table.merged_regions(), table.id(), table.caption());
}

std::vector<std::string> validate_example(const QAExample& ex) {
  std::vector<std::string> out;
  if (trim(ex.question).empty()) out.push_back("empty question");

  const UnifiedTable& t = ex.table;
  if (t.rows() == 0 || t.cols() == 0) out.push_back("empty table");
  for (const auto& row : t.cells()) {
    if (row.size() != t.cols()) {
      out.push_back("non-rectangular grid");
      break;
    }
  }
  if (t.header_rows() > t.rows()) out.push_back("header_rows exceeds row count");
  if (auto problem = check_regions(t.merged_regions(), t.rows(), t.cols()); !problem.empty()) {
    out.push_back(problem);
  }

  std::set<std::string> passage_ids, image_ids;
  for (const auto& p : ex.passages) {
    if (!passage_ids.insert(p.id).second) out.push_back("duplicate passage id " + p.id);
  }
  for (const auto& i : ex.images) {
    if (!image_ids.insert(i.id).second) out.push_back("duplicate image id " + i.id);
  }
  std::set<std::string> reported;
  for (const auto& row : t.cells()) {
    for (const auto& cell : row) {
      for (const auto& link : cell.links) {
        if (!passage_ids.count(link) && reported.insert("p:" + link).second) {
          out.push_back("dangling passage id " + link);
        }
      }
      for (const auto& img : cell.images) {
        if (!image_ids.count(img) && reported.insert("i:" + img).second) {
          out.push_back("dangling image id " + img);
        }
      }
    }
  }

  const bool needs_derivation = ex.answer.format != AnswerFormat::kDirect;
  if (needs_derivation && !ex.answer.derivation) out.push_back("missing derivation");
  if (!needs_derivation && ex.answer.derivation) out.push_back("unexpected derivation");
  return out;
}

}  // namespace tqk
