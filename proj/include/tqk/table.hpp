#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tqk {

struct Cell {
  std::string text;
  std::vector<std::string> links;   // passage ids
  std::vector<std::string> images;  // image ids

  Cell() = default;
  Cell(std::string t) : text(std::move(t)) {}  // NOLINT: implicit from text is intended
  Cell(std::string t, std::vector<std::string> l, std::vector<std::string> i = {})
      : text(std::move(t)), links(std::move(l)), images(std::move(i)) {}

  // Whitespace-only text counts as empty.
  bool empty() const;

  friend bool operator==(const Cell&, const Cell&) = default;
};

// Inclusive rectangle (r0,c0)-(r1,c1).
struct Region {
  std::size_t r0 = 0, c0 = 0, r1 = 0, c1 = 0;

  bool contains(std::size_t r, std::size_t c) const {
    return r >= r0 && r <= r1 && c >= c0 && c <= c1;
  }
  friend bool operator==(const Region&, const Region&) = default;
};

using Grid = std::vector<std::vector<Cell>>;

// Rectangular cell grid whose first header_rows rows form the column header.
// Construction pads short rows with empty cells and rejects out-of-bounds
// or overlapping merged regions; the object is immutable afterwards.
class UnifiedTable {
 public:
  UnifiedTable() = default;
  UnifiedTable(std::string id, Grid cells, std::size_t header_rows,
               std::vector<Region> merged_regions = {},
               std::optional<std::string> caption = std::nullopt);

  const std::string& id() const { return id_; }
  const Grid& cells() const { return cells_; }
  const Cell& cell(std::size_t r, std::size_t c) const { return cells_.at(r).at(c); }
  std::size_t rows() const { return cells_.size(); }
  std::size_t cols() const { return cols_; }
  std::size_t header_rows() const { return header_rows_; }
  std::size_t body_rows() const { return rows() - header_rows_; }
  const std::vector<Region>& merged_regions() const { return merged_; }
  const std::optional<std::string>& caption() const { return caption_; }

  // Non-empty header texts of column c joined with " / ", top to bottom.
  std::string column_header(std::size_t c) const;
  std::vector<std::string> column_headers() const;

  // Header plus the first `body_count` body rows; merged regions are clipped.
  UnifiedTable with_body_prefix(std::size_t body_count) const;
  // Header plus the listed body rows (body-relative indices, kept in order).
  UnifiedTable with_body_rows(const std::vector<std::size_t>& body_indices) const;

  friend bool operator==(const UnifiedTable&, const UnifiedTable&) = default;

 private:
  std::string id_;
  Grid cells_;
  std::size_t cols_ = 0;
  std::size_t header_rows_ = 0;
  std::vector<Region> merged_;
  std::optional<std::string> caption_;
};

struct Passage {
  std::string id;
  std::string title;
  std::string text;
  friend bool operator==(const Passage&, const Passage&) = default;
};

struct ImageRef {
  std::string id;
  std::string uri;
  std::string caption;
  friend bool operator==(const ImageRef&, const ImageRef&) = default;
};

enum class Category { kSpreadSheet, kEncyclopedia, kStructured };
enum class AnswerFormat { kDirect, kProgram, kMathExpr, kSql };

std::string_view to_string(Category c);
std::string_view to_string(AnswerFormat f);
std::optional<Category> category_from_string(std::string_view s);
std::optional<AnswerFormat> answer_format_from_string(std::string_view s);

struct Answer {
  AnswerFormat format = AnswerFormat::kDirect;
  std::string value;
  std::optional<std::string> derivation;  // present iff format != kDirect
  friend bool operator==(const Answer&, const Answer&) = default;
};

struct QAExample {
  std::string id;
  std::string dataset;
  Category category = Category::kStructured;
  std::string question;
  UnifiedTable table;
  std::vector<Passage> passages;
  std::vector<ImageRef> images;
  Answer answer;
  friend bool operator==(const QAExample&, const QAExample&) = default;
};

// Column header finder. Returns the 1-based index of the first body row:
// rows 1..n-1 are the header. Scans row 1, then while some column of the
// most recently scanned row is empty and rows remain, scans the next row,
// overwriting the per-column emptiness flags. A return of rows()+1 means no
// row cleared the check (degenerate). Throws Error("empty table") on a
// table without rows or columns.
std::size_t find_header_rows(const UnifiedTable& table);

// header_rows derived from find_header_rows, with the degenerate return
// mapped to 1.
std::size_t effective_header_rows(const UnifiedTable& table);

// Pads ragged rows, copies each merged region's anchor text into every
// covered cell, and sets header_rows via effective_header_rows.
UnifiedTable normalize_table(const std::vector<std::vector<std::string>>& raw,
                             const std::vector<Region>& merged = {}, std::string id = {},
                             std::optional<std::string> caption = std::nullopt);
UnifiedTable normalize_table(Grid raw, const std::vector<Region>& merged = {},
                             std::string id = {},
                             std::optional<std::string> caption = std::nullopt);
UnifiedTable normalize_table(const UnifiedTable& table);

// Every invariant violation found in `ex`; empty means valid.
std::vector<std::string> validate_example(const QAExample& ex);

}  // namespace tqk
