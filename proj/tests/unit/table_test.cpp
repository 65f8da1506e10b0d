#include <gtest/gtest.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "tqk/error.hpp"
#include "tqk/table.hpp"

using namespace tqk;

namespace {

UnifiedTable grid_table(const std::vector<std::vector<std::string>>& rows) {
  Grid g;
  for (const auto& r : rows) {
    std::vector<Cell> cells;
    for (const auto& t : r) cells.push_back({t, {}, {}});
    g.push_back(cells);
  }
  return UnifiedTable("t", g, 1);
}

}  // namespace

TEST(HeaderFinder, SingleHeaderRow) {
  EXPECT_EQ(find_header_rows(grid_table({{"Item", "Qty"}, {"a", "1"}, {"b", "2"}})), 2u);
}

TEST(HeaderFinder, TwoLevelHeader) {
  auto t = grid_table({{"", "Q1", "Q2"}, {"Item", "2019", "2020"}, {"Rev", "10", "20"}});
  EXPECT_EQ(find_header_rows(t), 3u);
  EXPECT_EQ(effective_header_rows(t), 2u);
}

TEST(HeaderFinder, DegenerateFallsBackToOne) {
  auto t = grid_table({{"", "a"}, {"b", ""}, {"", "c"}, {"d", ""}});
  EXPECT_EQ(find_header_rows(t), 5u);
  EXPECT_EQ(effective_header_rows(t), 1u);
}

TEST(HeaderFinder, EmptyTableThrows) {
  EXPECT_THROW(find_header_rows(UnifiedTable()), Error);
}

TEST(HeaderFinder, MatchesPseudocodeOnRandomGrids) {
  testgen::Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    auto g = testgen::string_grid(rng, testgen::uniform(rng, 1, 8), testgen::uniform(rng, 1, 6), 0.3);
    auto t = normalize_table(g);
    // normalize_table keeps texts when there are no merged regions.
    ASSERT_EQ(find_header_rows(t), oracle::header_finder(g));
    const auto h = effective_header_rows(t);
    EXPECT_GE(h, 1u);
    EXPECT_LE(h, t.rows());
  }
}

TEST(Normalize, PadsRaggedRows) {
  auto t = normalize_table(std::vector<std::vector<std::string>>{{"a", "b"}, {"c"}});
  ASSERT_EQ(t.cols(), 2u);
  EXPECT_EQ(t.cell(1, 1).text, "");
  EXPECT_EQ(t.cell(1, 0).text, "c");
}

TEST(Normalize, MergedAnchorIsCopied) {
  auto t = normalize_table(std::vector<std::vector<std::string>>{{"Year", ""}, {"2019", "2020"}},
                           {Region{0, 0, 0, 1}});
  EXPECT_EQ(t.cell(0, 0).text, "Year");
  EXPECT_EQ(t.cell(0, 1).text, "Year");
}

TEST(Normalize, TwoLevelFinancialHeader) {
  auto t = normalize_table(std::vector<std::vector<std::string>>{
      {"", "Q1", "Q2"}, {"Item", "2019", "2020"}, {"Rev", "10", "20"}});
  EXPECT_EQ(t.header_rows(), 2u);
  EXPECT_EQ(t.column_header(1), "Q1 / 2019");
  EXPECT_EQ(t.column_header(0), "Item");
}

TEST(Normalize, Idempotent) {
  testgen::Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    auto g = testgen::string_grid(rng, testgen::uniform(rng, 1, 6), testgen::uniform(rng, 1, 5), 0.3);
    auto once = normalize_table(g);
    EXPECT_EQ(normalize_table(once), once);
  }
}

TEST(UnifiedTable, RejectsBadRegions) {
  Grid g(2, std::vector<Cell>(2));
  EXPECT_THROW(UnifiedTable("t", g, 1, {Region{0, 0, 2, 0}}), Error);
  EXPECT_THROW(UnifiedTable("t", g, 1, {Region{0, 0, 1, 1}, Region{1, 1, 1, 1}}), Error);
  EXPECT_THROW(UnifiedTable("t", g, 3), Error);
}

TEST(UnifiedTable, BodySelectionsClipRegions) {
  Grid g(4, std::vector<Cell>(2));
  UnifiedTable t("t", g, 1, {Region{1, 0, 3, 0}});
  auto prefix = t.with_body_prefix(1);
  EXPECT_EQ(prefix.rows(), 2u);
  ASSERT_EQ(prefix.merged_regions().size(), 1u);
  auto picked = t.with_body_rows({2});
  EXPECT_EQ(picked.rows(), 2u);
}

TEST(Validate, CleanExampleHasNoViolations) {
  testgen::Rng rng(3);
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(validate_example(testgen::valid_example(rng, i)).empty());
}

TEST(Validate, DanglingLinkAndMissingDerivation) {
  QAExample ex;
  ex.question = "q";
  Grid g{{Cell{"a", {"p9"}, {}}}};
  ex.table = UnifiedTable("t", g, 1);
  auto v = validate_example(ex);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], "dangling passage id p9");

  ex.table = UnifiedTable("t", Grid{{Cell{"a", {}, {}}}}, 1);
  ex.answer.format = AnswerFormat::kProgram;
  v = validate_example(ex);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], "missing derivation");
}

TEST(Validate, EmptyQuestionAndTable) {
  QAExample ex;
  auto v = validate_example(ex);
  EXPECT_NE(std::find(v.begin(), v.end(), "empty question"), v.end());
  EXPECT_NE(std::find(v.begin(), v.end(), "empty table"), v.end());
}
