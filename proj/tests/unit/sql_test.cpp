#include <gtest/gtest.h>

#include "generators.hpp"
#include "oracles.hpp"
#include "tqk/derivation.hpp"
#include "tqk/error.hpp"
#include "tqk/sql.hpp"

using namespace tqk;

namespace {

UnifiedTable ages() {
  return normalize_table(std::vector<std::vector<std::string>>{
      {"Name", "Age"}, {"Ann", "36"}, {"Bo", "12"}, {"Cy", "41"}});
}

std::vector<std::vector<std::string>> body_of(const UnifiedTable& t) {
  std::vector<std::vector<std::string>> body;
  for (std::size_t r = t.header_rows(); r < t.rows(); ++r) {
    std::vector<std::string> row;
    for (std::size_t c = 0; c < t.cols(); ++c) row.push_back(t.cell(r, c).text);
    body.push_back(row);
  }
  return body;
}

}  // namespace

TEST(Sql, Examples) {
  EXPECT_EQ(exec_sql(parse_sql("SELECT COUNT(Name) WHERE Age > 30"), ages()), "2");
  EXPECT_EQ(exec_sql(parse_sql("SELECT Name WHERE Age = 99"), ages()), "");
  EXPECT_EQ(exec_sql(parse_sql("SELECT MAX(Age)"), ages()), "41");
  EXPECT_EQ(exec_sql(parse_sql("SELECT Name FROM t WHERE Age < 40"), ages()), "Ann, Bo");
  EXPECT_EQ(exec_sql(parse_sql("select avg(age) where name = 'Ann'"), ages()), "36");
  EXPECT_EQ(exec_sql(parse_sql("SELECT COUNT(Name) WHERE Age > 99"), ages()), "0");
}

TEST(Sql, Errors) {
  EXPECT_THROW(exec_sql(parse_sql("SELECT Height"), ages()), ExecError);
  EXPECT_THROW(exec_sql(parse_sql("SELECT SUM(Name)"), ages()), ExecError);
  EXPECT_THROW(exec_sql(parse_sql("SELECT MAX(Age) WHERE Age > 99"), ages()), ExecError);
  EXPECT_THROW(parse_sql("SELECT"), ParseError);
  EXPECT_THROW(parse_sql("SELECT a WHERE b ~ 1"), ParseError);
  EXPECT_THROW(parse_sql("UPDATE t"), ParseError);
}

TEST(Sql, CanonicalRoundTrip) {
  auto q = parse_sql("select count([Name]) from t where `Age` > 30 and Name = 'Bo'");
  const std::string canon = print_sql(q);
  EXPECT_EQ(canon, "SELECT COUNT(\"Name\") FROM t WHERE \"Age\" > '30' AND \"Name\" = 'Bo'");
  EXPECT_EQ(parse_sql(canon), q);
  EXPECT_EQ(print_sql(parse_sql(canon)), canon);
}

TEST(Sql, MatchesBruteForce) {
  testgen::Rng rng(2024);
  for (int i = 0; i < 500; ++i) {
    auto t = testgen::sql_table(rng, testgen::uniform(rng, 0, 20), testgen::uniform(rng, 1, 6));
    auto body = body_of(t);
    auto c = testgen::random_sql(rng, t.cols(), body);
    std::string got;
    try {
      got = exec_sql(parse_sql(c.text), t);
    } catch (const ExecError&) {
      got = "ERROR";
    }
    ASSERT_EQ(got, oracle::sql(body, c.spec)) << c.text;
  }
}

TEST(Derivation, DetectsAndExecutes) {
  EXPECT_EQ(detect_derivation("subtract(5, 3)"), AnswerFormat::kProgram);
  EXPECT_EQ(detect_derivation("SELECT MAX(Age)"), AnswerFormat::kSql);
  EXPECT_EQ(detect_derivation("(5 - 3) / 2"), AnswerFormat::kMathExpr);
  EXPECT_FALSE(detect_derivation("hello").has_value());
  EXPECT_EQ(execute_derivation("subtract(5, 3)", ages()), "2");
  EXPECT_EQ(execute_derivation("SELECT MAX(Age)", ages()), "41");
  EXPECT_EQ(execute_derivation("(5 - 3) / 2", ages()), "1");
  EXPECT_EQ(canonicalize_derivation("subtract( 5,3 )"), "subtract(5, 3)");
}
