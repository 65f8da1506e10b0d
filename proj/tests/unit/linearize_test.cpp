#include <gtest/gtest.h>

#include "generators.hpp"
#include "tqk/error.hpp"
#include "tqk/linearize.hpp"

using namespace tqk;

namespace {

UnifiedTable people() {
  return normalize_table(std::vector<std::vector<std::string>>{
      {"Name", "Age"}, {"Ann", "36"}, {"Bo", ""}, {"C|D", "41"}});
}

// Counts tokens by the default rule, written independently: runs of
// [A-Za-z0-9] or bytes >= 0x80 form one token, other visible bytes are one
// token each.
std::size_t oracle_count(const std::string& s) {
  std::size_t n = 0;
  bool in_word = false;
  for (unsigned char c : s) {
    bool wordish = std::isalnum(c) || c >= 0x80;
    if (wordish) {
      if (!in_word) ++n;
      in_word = true;
    } else {
      in_word = false;
      if (!std::isspace(c)) ++n;
    }
  }
  return n;
}

}  // namespace

TEST(Markdown, Layout) {
  EXPECT_EQ(to_markdown(people()),
            "| Name | Age |\n| --- | --- |\n| Ann | 36 |\n| Bo |  |\n| C\\|D | 41 |");
}

TEST(Flatten, Layout) {
  EXPECT_EQ(flatten_row(people(), 1), "row 2: Name is Bo ; Age is -");
  EXPECT_EQ(to_flatten(people()).substr(0, 28), "row 1: Name is Ann ; Age is ");
}

TEST(Tokens, DefaultRuleMatchesOracle) {
  testgen::Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    auto s = testgen::messy_text(rng, 40);
    EXPECT_EQ(count_tokens(s), oracle_count(s)) << s;
  }
  EXPECT_EQ(count_tokens("| Name | Age |"), 5u);
  EXPECT_EQ(count_tokens("row 1: x is 3.5"), 8u);  // row 1 : x is 3 . 5
}

TEST(Tokens, LinesAreAdditive) {
  testgen::Rng rng(9);
  Tokenizer plugged = Tokenizer::from_vocab({"ab", "abc", "c", "|", "--"});
  for (int i = 0; i < 200; ++i) {
    auto a = testgen::messy_text(rng, 20), b = testgen::messy_text(rng, 20);
    EXPECT_EQ(count_tokens(a + "\n" + b), count_tokens(a) + count_tokens(b));
    EXPECT_EQ(plugged.count(a + "\n" + b), plugged.count(a) + plugged.count(b));
  }
}

TEST(Tokens, PluggedVocabGreedyLongest) {
  Tokenizer t = Tokenizer::from_vocab({"ab", "abc", "d"}, "plugged:v");
  EXPECT_EQ(t.count("abcd"), 2u);   // abc + d
  EXPECT_EQ(t.count("abxd"), 3u);   // ab + x + d
  EXPECT_EQ(t.count("\xc3\xa9"), 1u);  // one UTF-8 character
  EXPECT_EQ(t.label(), "plugged:v");
  EXPECT_EQ(Tokenizer().label(), "default");
}

TEST(Truncate, KeepsLongestFittingPrefix) {
  auto t = people();
  const std::size_t full = count_tokens(to_markdown(t));
  EXPECT_EQ(truncate_rows(t, {full, Tokenizer()}).body_rows(), 3u);
  const std::size_t header = count_tokens(to_markdown(t.with_body_prefix(0)));
  auto cut = truncate_rows(t, {header, Tokenizer()});
  EXPECT_EQ(cut.body_rows(), 0u);
  EXPECT_THROW(truncate_rows(t, {header - 1, Tokenizer()}), Error);
}

TEST(Truncate, RespectsBudgetForBothFormats) {
  testgen::Rng rng(10);
  for (int i = 0; i < 200; ++i) {
    auto g = testgen::string_grid(rng, testgen::uniform(rng, 2, 12), testgen::uniform(rng, 1, 5), 0.2);
    auto t = normalize_table(g);
    for (auto fmt : {InputFormat::kMarkdown, InputFormat::kFlatten}) {
      std::size_t budget = testgen::uniform(rng, 10, 120);
      try {
        auto cut = truncate_rows(t, {budget, Tokenizer()}, fmt);
        EXPECT_LE(count_tokens(render(cut, fmt)), budget);
        if (cut.body_rows() < t.body_rows()) {
          EXPECT_GT(count_tokens(render(t.with_body_prefix(cut.body_rows() + 1), fmt)), budget);
        }
      } catch (const Error&) {
        EXPECT_GT(count_tokens(render(t.with_body_prefix(0), fmt)), budget);
      }
    }
  }
}
