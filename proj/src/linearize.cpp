#include "tqk/linearize.hpp"

#include <cctype>
#include <fstream>
#include <unordered_set>

#include "tqk/error.hpp"
#include "tqk/numeric.hpp"

namespace tqk {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

std::size_t utf8_length(unsigned char lead) {
  if (lead >= 0xF0) return 4;
  if (lead >= 0xE0) return 3;
  if (lead >= 0xC0) return 2;
  return 1;
}

// Cell text on a single line.
std::string one_line(std::string_view s) {
  std::string out(trim(s));
  for (char& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

std::string escape_pipes(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

std::string markdown_row(const std::vector<std::string>& cells) {
  std::string out = "|";
  for (const auto& c : cells) {
    out += ' ';
    out += escape_pipes(c);
    out += " |";
  }
  return out;
}

std::vector<std::string> body_cells(const UnifiedTable& t, std::size_t body_index) {
  std::vector<std::string> out;
  out.reserve(t.cols());
  for (std::size_t c = 0; c < t.cols(); ++c) {
    out.push_back(one_line(t.cell(t.header_rows() + body_index, c).text));
  }
  return out;
}

std::vector<std::string> header_lines(const UnifiedTable& t) {
  std::vector<std::string> headers;
  for (const auto& h : t.column_headers()) headers.push_back(one_line(h));
  std::string sep = "|";
  for (std::size_t c = 0; c < t.cols(); ++c) sep += " --- |";
  return {markdown_row(headers), sep};
}

}  // namespace

struct Tokenizer::Vocab {
  std::unordered_set<std::string> entries;
  std::size_t max_len = 0;
};

Tokenizer::Tokenizer() = default;

Tokenizer Tokenizer::from_vocab(std::vector<std::string> vocab, std::string label) {
  auto v = std::make_shared<Vocab>();
  for (auto& entry : vocab) {
    std::string token(trim(entry));
    if (token.empty()) continue;
    v->max_len = std::max(v->max_len, token.size());
    v->entries.insert(std::move(token));
  }
  Tokenizer t;
  t.vocab_ = std::move(v);
  t.label_ = std::move(label);
  return t;
}

Tokenizer Tokenizer::from_vocab_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read vocabulary file " + path);
  std::vector<std::string> vocab;
  for (std::string line; std::getline(in, line);) vocab.push_back(line);
  return from_vocab(std::move(vocab), "plugged:" + path);
}

std::size_t Tokenizer::count(std::string_view text) const {
  std::size_t n = 0;
  std::size_t i = 0;
  const std::size_t size = text.size();
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };

  if (!vocab_) {
    while (i < size) {
      unsigned char c = byte(i);
      if (is_space(c)) {
        ++i;
      } else if (is_word_byte(c)) {
        ++n;
        while (i < size && is_word_byte(byte(i))) ++i;
      } else {
        ++n;
        ++i;
      }
    }
    return n;
  }

  while (i < size) {
    if (is_space(byte(i))) {
      ++i;
      continue;
    }
    std::size_t chunk_end = i;
    while (chunk_end < size && !is_space(byte(chunk_end))) ++chunk_end;
    while (i < chunk_end) {
      std::size_t len = std::min(vocab_->max_len, chunk_end - i);
      for (; len > 0; --len) {
        if (vocab_->entries.count(std::string(text.substr(i, len)))) break;
      }
      if (len == 0) len = std::min(utf8_length(byte(i)), chunk_end - i);
      i += len;
      ++n;
    }
  }
  return n;
}

std::size_t count_tokens(std::string_view text, const Tokenizer& tokenizer) {
  return tokenizer.count(text);
}

std::string to_markdown(const UnifiedTable& table) {
  auto lines = header_lines(table);
  std::string out = lines[0] + "\n" + lines[1];
  for (std::size_t b = 0; b < table.body_rows(); ++b) {
    out += '\n';
    out += markdown_row(body_cells(table, b));
  }
  return out;
}

std::string flatten_row(const UnifiedTable& table, std::size_t body_index) {
  std::string out = "row " + std::to_string(body_index + 1) + ":";
  const auto cells = body_cells(table, body_index);
  for (std::size_t c = 0; c < table.cols(); ++c) {
    std::string header = one_line(table.column_header(c));
    if (header.empty()) header = "column " + std::to_string(c + 1);
    out += c == 0 ? " " : " ; ";
    out += header;
    out += " is ";
    out += cells[c].empty() ? "-" : cells[c];
  }
  return out;
}

std::string to_flatten(const UnifiedTable& table) {
  std::string out;
  for (std::size_t b = 0; b < table.body_rows(); ++b) {
    if (b) out += '\n';
    out += flatten_row(table, b);
  }
  return out;
}

std::string render(const UnifiedTable& table, InputFormat format) {
  return format == InputFormat::kMarkdown ? to_markdown(table) : to_flatten(table);
}

UnifiedTable truncate_rows(const UnifiedTable& table, const TokenBudget& budget,
                           InputFormat format) {
  // Rendered lines are whitespace-separated, so counts add up line by line.
  const Tokenizer& tok = budget.tokenizer;
  std::size_t used = 0;
  if (format == InputFormat::kMarkdown) {
    for (const auto& line : header_lines(table)) used += tok.count(line);
  }
  if (used > budget.max_tokens) throw Error("budget too small");
  std::size_t keep = 0;
  for (; keep < table.body_rows(); ++keep) {
    std::string line = format == InputFormat::kMarkdown ? markdown_row(body_cells(table, keep))
                                                        : flatten_row(table, keep);
    std::size_t cost = tok.count(line);
    if (used + cost > budget.max_tokens) break;
    used += cost;
  }
  if (keep == table.body_rows()) return table;
  return table.with_body_prefix(keep);
}

}  // namespace tqk
