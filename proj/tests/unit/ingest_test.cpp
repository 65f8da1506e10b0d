#include <gtest/gtest.h>

#include "generators.hpp"
#include "tempdir.hpp"
#include "tqk/error.hpp"
#include "tqk/ingest.hpp"

using namespace tqk;
using tqk::testing::TempDir;

TEST(UnifiedJson, RoundTripRandomExamples) {
  testgen::Rng rng(99);
  for (int i = 0; i < 300; ++i) {
    auto ex = testgen::valid_example(rng, i);
    EXPECT_EQ(example_from_json(to_json(ex)), ex);
    EXPECT_EQ(example_from_json(Json::parse(to_jsonl_line(ex))), ex);
  }
}

TEST(UnifiedJson, SaveLoadIdentity) {
  TempDir dir;
  testgen::Rng rng(7);
  std::vector<QAExample> examples;
  for (int i = 0; i < 50; ++i) examples.push_back(testgen::valid_example(rng, i));
  const auto path = dir.file("x.jsonl");
  EXPECT_EQ(save_unified(examples, path), 50u);
  EXPECT_EQ(load_unified(path), examples);
}

TEST(UnifiedJson, HeaderRowsComputedWhenAbsent) {
  Json j = Json::parse(R"({"cells": [[{"text": ""}, {"text": "Q1"}], [{"text": "Item"}, {"text": "2019"}],
                                      [{"text": "Rev"}, {"text": "10"}]]})");
  EXPECT_EQ(table_from_json(j).header_rows(), 2u);
}

TEST(UnifiedReader, ReportsLineNumbers) {
  TempDir dir;
  testgen::Rng rng(1);
  std::string good = to_jsonl_line(testgen::valid_example(rng, 0));
  auto path = dir.write("bad.jsonl", good + "\n\n" + R"({"id": "x"})" + "\n");
  try {
    load_unified(path);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(UnifiedReader, RejectsInvalidExample) {
  testgen::Rng rng(2);
  auto ex = testgen::valid_example(rng, 0);
  auto j = to_json(ex);
  j["question"] = "   ";
  EXPECT_THROW(parse_unified(j.dump()), Error);
  j = to_json(ex);
  j["answer"]["format"] = "Program";
  j["answer"]["derivation"] = nullptr;
  EXPECT_THROW(parse_unified(j.dump()), Error);
}

TEST(Delimited, QuotesNewlinesAndBom) {
  auto rows = parse_delimited("\xEF\xBB\xBF" "a,\"b,c\",\"d\"\"e\"\n1,\"x\ny\",3\n", ',');
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"a", "b,c", "d\"e"}));
  EXPECT_EQ(rows[1][1], "x\ny");
}

TEST(Delimited, CrLfAndTabs) {
  auto rows = parse_delimited("a\tb\r\n1\t2\r\n", '\t');
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1], (std::vector<std::string>{"1", "2"}));
}

TEST(Delimited, BadQuotingIsParseError) {
  EXPECT_THROW(parse_delimited("a,\"b\n", ','), ParseError);
  EXPECT_THROW(parse_delimited("a,\"b\"x\n", ','), ParseError);
}

TEST(Delimited, WriteThenReadIsSameGrid) {
  testgen::Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    auto ex = testgen::valid_example(rng, i);
    std::vector<std::vector<std::string>> grid;
    for (const auto& row : ex.table.cells()) {
      std::vector<std::string> r;
      for (const auto& c : row) r.push_back(c.text);
      grid.push_back(r);
    }
    auto back = parse_delimited(write_delimited(ex.table, ','), ',');
    // Rows made only of empty cells come back as one empty field per column.
    ASSERT_EQ(back.size(), grid.size()) << write_delimited(ex.table, ',');
    EXPECT_EQ(back, grid);
  }
}

TEST(Delimited, TableWithHeader) {
  auto t = table_from_delimited("Name,Age\nAnn,36\nBo,12\n", ',', true);
  EXPECT_EQ(t.header_rows(), 1u);
  EXPECT_EQ(t.body_rows(), 2u);
  EXPECT_EQ(t.column_header(1), "Age");
}
