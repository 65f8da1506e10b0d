#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tqk/error.hpp"
#include "tqk/exec_policy.hpp"
#include "tqk/ingest.hpp"
#include "tqk/linearize.hpp"
#include "tqk/table.hpp"

namespace tqk {

// Exclusive bounds on markdown table tokens: min < tokens < max.
struct LengthBounds {
  std::optional<std::size_t> min_tokens;
  std::optional<std::size_t> max_tokens;
  bool admits(std::size_t tokens) const {
    return (!min_tokens || tokens > *min_tokens) && (!max_tokens || tokens < *max_tokens);
  }
};

struct BenchConfig {
  std::map<Category, std::size_t> quotas{
      {Category::kSpreadSheet, 300}, {Category::kEncyclopedia, 300}, {Category::kStructured, 400}};
  std::map<Category, LengthBounds> bounds{
      {Category::kEncyclopedia, {std::nullopt, 6000}},
      {Category::kStructured, {2000, std::nullopt}},
  };
  std::uint64_t seed = 0;
  // Unified JSONL files feeding each category.
  std::map<Category, std::vector<std::string>> inputs;
  std::optional<std::string> tokenizer_vocab;

  std::size_t total() const;
  // Throws Error when a lower bound is not below its upper bound.
  void validate() const;
};

// Plain key=value lines; "[SpreadSheet]"-style headers scope the keys
// quota, min_tokens, max_tokens (a value of "none" unsets) and inputs
// (comma separated). Top-level keys: seed, tokenizer_vocab. '#' starts a
// comment. Relative paths resolve against base_dir.
BenchConfig parse_bench_config(std::string_view text, const std::string& base_dir = "");
BenchConfig load_bench_config(const std::string& path);

std::size_t table_tokens(const QAExample& ex, const Tokenizer& tokenizer);
std::vector<std::size_t> table_token_counts(const std::vector<QAExample>& examples,
                                            const Tokenizer& tokenizer,
                                            ExecPolicy policy = ExecPolicy::kParallel);

// Keeps examples whose category bounds admit their table token count.
// Categories without bounds pass through. Order preserved.
std::vector<QAExample> filter_by_length(const std::vector<QAExample>& examples,
                                        const std::map<Category, LengthBounds>& bounds,
                                        const Tokenizer& tokenizer,
                                        ExecPolicy policy = ExecPolicy::kParallel);

// Uniform selection of `quota` examples without replacement, input order
// kept. Throws Error("need Q, have N") when the pool is too small.
std::vector<QAExample> sample_quota(const std::vector<QAExample>& pool, std::size_t quota,
                                    std::uint64_t seed);

class ShortfallError : public Error {
 public:
  ShortfallError(Category category, const std::string& what)
      : Error(std::string(to_string(category)) + ": " + what), category_(category) {}
  Category category() const { return category_; }

 private:
  Category category_;
};

struct CategoryStats {
  std::size_t count = 0;
  double mean_tokens = 0.0;
};

struct StatsReport {
  std::map<Category, CategoryStats> per_category;
  std::size_t total = 0;
  double mean_tokens = 0.0;
  std::string tokenizer;
  std::uint64_t seed = 0;
};

struct Benchmark {
  std::vector<QAExample> examples;  // SpreadSheet, then Encyclopedia, then Structured
  StatsReport report;
};

// Filters and samples each category's pool; every emitted example takes
// the category of the pool it came from. Throws ShortfallError.
Benchmark assemble(const BenchConfig& cfg, const std::map<Category, std::vector<QAExample>>& pools,
                   const Tokenizer& tokenizer);
// Loads cfg.inputs and the configured tokenizer, then assembles.
Benchmark assemble(const BenchConfig& cfg);

StatsReport compute_stats(const std::vector<QAExample>& examples, const Tokenizer& tokenizer);
Json stats_to_json(const StatsReport& report);

}  // namespace tqk
