#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tqk/exec_policy.hpp"
#include "tqk/table.hpp"

namespace tqk {

enum class Granularity { kRow, kColumn, kCell, kPassage };

std::string_view to_string(Granularity g);
std::optional<Granularity> granularity_from_string(std::string_view s);

struct RowLoc {
  std::size_t row = 0;  // body-relative
  friend auto operator<=>(const RowLoc&, const RowLoc&) = default;
};
struct ColumnLoc {
  std::size_t column = 0;
  friend auto operator<=>(const ColumnLoc&, const ColumnLoc&) = default;
};
struct CellLoc {
  std::size_t row = 0;  // body-relative
  std::size_t column = 0;
  friend auto operator<=>(const CellLoc&, const CellLoc&) = default;
};
struct PassageLoc {
  std::string id;
  friend auto operator<=>(const PassageLoc&, const PassageLoc&) = default;
};

// Where a unit sits: body row, column, body cell, or passage id.
using Locator = std::variant<RowLoc, ColumnLoc, CellLoc, PassageLoc>;

// "r3", "c1", "r3c1", "p:<id>"
std::string locator_to_string(const Locator& loc);
Locator locator_from_string(std::string_view s);

struct RetrievalUnit {
  Granularity kind = Granularity::kRow;
  Locator locator;
  std::string text;
  std::size_t ordinal = 0;  // position in extraction order; the tie-break key
};

struct RetrieverConfig {
  Granularity granularity = Granularity::kRow;
  double k1 = 1.2;
  double b = 0.75;
  std::size_t top_k = 5;
  bool include_passages = false;
};

// Throws Error when k1 <= 0, b outside [0,1], or top_k == 0.
void validate(const RetrieverConfig& cfg);

// Row units are flatten sentences, column units "header: v1; v2; ...",
// cell units "header: text" (empty cells skipped). Passages are appended
// as Passage units when include_passages is set.
std::vector<RetrievalUnit> extract_units(const QAExample& ex, Granularity granularity,
                                         bool include_passages = false);

// Lowercased maximal alphanumeric runs (bytes >= 0x80 count as alphanumeric).
std::vector<std::string> retrieval_tokens(std::string_view text);

// Scores every unit of a corpus against a query. Implementations must be
// immutable after construction so one instance can serve many threads.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::vector<double> score(const std::vector<RetrievalUnit>& units,
                                    std::string_view query) const = 0;
};

// Okapi BM25 with idf = max(0, ln((N - n + 0.5) / (n + 0.5))).
class Bm25Scorer : public Scorer {
 public:
  Bm25Scorer(double k1 = 1.2, double b = 0.75);
  std::vector<double> score(const std::vector<RetrievalUnit>& units,
                            std::string_view query) const override;

 private:
  double k1_, b_;
};

// Same score for every unit; ranking falls back to the tie-break order.
class ConstantScorer : public Scorer {
 public:
  explicit ConstantScorer(double value = 0.0) : value_(value) {}
  std::vector<double> score(const std::vector<RetrievalUnit>& units,
                            std::string_view) const override {
    return std::vector<double>(units.size(), value_);
  }

 private:
  double value_;
};

// Scores precomputed elsewhere (e.g. by a neural retriever), read from
// JSONL lines {"id": example id, "scores": {"r0": 1.5, "c2": 0.1, ...}}.
// Units without a score get 0.
class ExternalScorer : public Scorer {
 public:
  static ExternalScorer from_file(const std::string& path);
  static ExternalScorer from_text(std::string_view jsonl);

  // Binds to one example before scoring.
  ExternalScorer for_example(const std::string& example_id) const;
  std::vector<double> score(const std::vector<RetrievalUnit>& units,
                            std::string_view query) const override;

 private:
  std::shared_ptr<const std::map<std::string, std::map<std::string, double>>> table_;
  std::string example_id_;
};

struct Ranked {
  RetrievalUnit unit;
  double score = 0.0;
};

// Sorts by descending score, ties by unit ordinal; returns min(top_k, n).
std::vector<Ranked> rank(std::vector<RetrievalUnit> units, const std::vector<double>& scores,
                         std::size_t top_k);

// BM25 ranking of the example's units. Throws Error("nothing to index")
// when the example yields no units.
std::vector<Ranked> retrieve(const QAExample& ex, const RetrieverConfig& cfg,
                             std::string_view question);
std::vector<Ranked> retrieve(const QAExample& ex, const RetrieverConfig& cfg,
                             std::string_view question, const Scorer& scorer);

// Retrieval over many examples with each example's own question.
std::vector<std::vector<Ranked>> retrieve_batch(const std::vector<QAExample>& examples,
                                                const RetrieverConfig& cfg,
                                                ExecPolicy policy = ExecPolicy::kParallel);

// |gold ∩ top-k| / |gold|. Throws Error("no gold units") on empty gold and
// Error on k == 0.
double recall_at_k(const std::vector<Ranked>& ranked, const std::vector<Locator>& gold,
                   std::size_t k);

}  // namespace tqk
