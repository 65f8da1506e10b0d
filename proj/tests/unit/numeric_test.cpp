#include <gtest/gtest.h>

#include "tqk/numeric.hpp"

using namespace tqk;

TEST(ParseNumber, PlainAndDecorated) {
  EXPECT_DOUBLE_EQ(*parse_number("42"), 42);
  EXPECT_DOUBLE_EQ(*parse_number("  -3.5 "), -3.5);
  EXPECT_DOUBLE_EQ(*parse_number("$1,200"), 1200);
  EXPECT_DOUBLE_EQ(*parse_number("1,234,567.5"), 1234567.5);
  EXPECT_DOUBLE_EQ(*parse_number("1e3"), 1000);
}

TEST(ParseNumber, PercentRules) {
  EXPECT_DOUBLE_EQ(*parse_number("12%"), 0.12);
  EXPECT_DOUBLE_EQ(*parse_number("12%", PercentRule::kStrip), 12);
}

TEST(ParseNumber, Rejects) {
  for (const char* s : {"", "abc", "1,2", "12a", "1..2", "$", "%", "1,2345", "--1"}) {
    EXPECT_FALSE(parse_number(s).has_value()) << s;
  }
}

TEST(FormatNumber, IntegralAndShortest) {
  EXPECT_EQ(format_number(41.0), "41");
  EXPECT_EQ(format_number(-2.0), "-2");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.5), "2.5");
  // Round trip for awkward values.
  for (double v : {1.0 / 3.0, 1e-7, 123456.789, -0.000123}) {
    EXPECT_EQ(*parse_number(format_number(v)), v);
  }
}

TEST(Strings, TrimLowerIequals) {
  EXPECT_EQ(trim("  a b \t\n"), "a b");
  EXPECT_EQ(to_lower("AbC"), "abc");
  EXPECT_TRUE(iequals("Name", "nAME"));
  EXPECT_FALSE(iequals("Name", "Names"));
}
