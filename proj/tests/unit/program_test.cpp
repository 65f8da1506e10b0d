#include <gtest/gtest.h>

#include "generators.hpp"
#include "tqk/error.hpp"
#include "tqk/program.hpp"

using namespace tqk;

namespace {
std::string run(const std::string& text) { return value_to_string(eval_program(parse_program(text))); }
}  // namespace

TEST(Program, EvaluatesSteps) {
  EXPECT_EQ(run("subtract(5, 3)"), "2");
  EXPECT_EQ(run("subtract(14, 10), divide(#0, 10)"), "0.4");
  EXPECT_EQ(run("exp(2, 10)"), "1024");
  EXPECT_EQ(run("add(1, 2), greater(#0, 2)"), "yes");
  EXPECT_EQ(run("greater(1, 2)"), "no");
  EXPECT_EQ(run("multiply(const_100, 0.5)"), "50");
  EXPECT_EQ(run("add(const_m1, 3)"), "2");
}

TEST(Program, NestedCallsFlatten) {
  auto p = parse_program("divide(subtract(14, 10), 10)");
  EXPECT_EQ(print_program(p), "subtract(14, 10), divide(#0, 10)");
}

TEST(Program, CanonicalRoundTrip) {
  for (const char* s : {"add(1, 2)", "subtract(14, 10), divide(#0, 10)", "add(1.5, -2), multiply(#0, #0)",
                        "add(1, 2), greater(#0, 2)"}) {
    EXPECT_EQ(print_program(parse_program(s)), s);
  }
}

TEST(Program, ParseErrors) {
  auto message = [](const char* s) {
    try {
      parse_program(s);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("add(#1, 2)").find("forward reference"), std::string::npos);
  EXPECT_NE(message("foo(1, 2)").find("unknown op"), std::string::npos);
  EXPECT_NE(message("add(1)").find("expects 2 arguments"), std::string::npos);
  EXPECT_NE(message("add(1, 2) x").find("trailing garbage"), std::string::npos);
  EXPECT_NE(message("").find("at offset"), std::string::npos);
}

TEST(Program, ExecErrors) {
  EXPECT_THROW(eval_program(parse_program("divide(1, 0)")), ExecError);
  EXPECT_THROW(eval_program(parse_program("greater(1, 2), add(#0, 1)")), Error);
}

TEST(Program, Equivalence) {
  EXPECT_TRUE(programs_equivalent(parse_program("add(100, 2)"), parse_program("add(const_100, 2)")));
  EXPECT_FALSE(programs_equivalent(parse_program("add(2, 1)"), parse_program("add(1, 2)")));
  EXPECT_TRUE(programs_equivalent(parse_program("add(1, 2)"), parse_program("add(1.0000000000001, 2)")));
}

TEST(Program, FuzzNeverCrashes) {
  testgen::Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    std::string s = testgen::messy_text(rng, 30);
    if (testgen::coin(rng, 0.5)) s = "add(" + s;
    try {
      auto p = parse_program(s);
      EXPECT_EQ(parse_program(print_program(p)), p);
    } catch (const ParseError&) {
    }
  }
}
