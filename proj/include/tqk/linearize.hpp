#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tqk/table.hpp"

namespace tqk {

// Counts tokens for length budgets. The default rule counts maximal
// alphanumeric runs plus each other non-whitespace character; bytes >= 0x80
// (UTF-8 sequences) count as alphanumeric. A plugged vocabulary instead
// greedily matches the longest vocabulary entry within each
// whitespace-delimited chunk, falling back to one UTF-8 character per token.
class Tokenizer {
 public:
  // Default rule.
  Tokenizer();
  // Vocabulary file: one token per line, UTF-8. Throws Error when unreadable.
  static Tokenizer from_vocab_file(const std::string& path);
  static Tokenizer from_vocab(std::vector<std::string> vocab, std::string label = "plugged");

  std::size_t count(std::string_view text) const;
  // "default" or "plugged:<path>"; stamped into reports.
  const std::string& label() const { return label_; }
  bool is_default() const { return vocab_ == nullptr; }

 private:
  struct Vocab;
  std::shared_ptr<const Vocab> vocab_;
  std::string label_ = "default";
};

std::size_t count_tokens(std::string_view text, const Tokenizer& tokenizer = Tokenizer());

struct TokenBudget {
  std::size_t max_tokens = 4096;
  Tokenizer tokenizer;
};

enum class InputFormat { kMarkdown, kFlatten };

// "| h1 | h2 |\n| --- | --- |\n| a | b |". Multi-row headers are joined
// per column with " / " (empty parts dropped); "|" in cells is escaped.
std::string to_markdown(const UnifiedTable& table);

// One line per body row: "row k: H1 is v1 ; H2 is v2". Empty cells read
// "-"; a column without header text is called "column j".
std::string to_flatten(const UnifiedTable& table);
// The flatten sentence for a single body row (0-based body index).
std::string flatten_row(const UnifiedTable& table, std::size_t body_index);

std::string render(const UnifiedTable& table, InputFormat format);

// Keeps the header and the longest prefix of body rows whose rendering
// fits the budget. Throws Error("budget too small") when even the header
// alone does not fit.
UnifiedTable truncate_rows(const UnifiedTable& table, const TokenBudget& budget,
                           InputFormat format = InputFormat::kMarkdown);

}  // namespace tqk
