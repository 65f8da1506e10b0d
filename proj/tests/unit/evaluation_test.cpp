#include <gtest/gtest.h>

#include <map>

#include "generators.hpp"
#include "tempdir.hpp"
#include "tqk/error.hpp"
#include "tqk/evaluation.hpp"

using namespace tqk;
using tqk::testgen::Rng;

namespace {

QAExample gold(std::string id, std::string value, AnswerFormat fmt = AnswerFormat::kDirect,
               std::optional<std::string> derivation = std::nullopt) {
  QAExample ex;
  ex.id = std::move(id);
  ex.dataset = "t";
  ex.question = "q?";
  ex.table = normalize_table(std::vector<std::vector<std::string>>{{"a", "b"}, {"1", "2"}});
  ex.answer = Answer{fmt, std::move(value), std::move(derivation)};
  return ex;
}

// Random short answers over a tiny vocabulary so overlaps are common.
std::string random_answer(Rng& rng) {
  static const char* words[] = {"the", "a", "cat", "sat", "Dog", "dog.", "1,200", "$5", "an", "red", "42"};
  std::string s;
  std::size_t n = testgen::uniform(rng, 0, 5);
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.empty()) s += testgen::coin(rng, 0.2) ? "  " : " ";
    s += words[testgen::uniform(rng, 0, 10)];
  }
  return s;
}

}  // namespace

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize_answer("The Eagles."), "eagles");
  EXPECT_EQ(normalize_answer("$1,200.0"), "1200");
  // "a" is an article, so only the whitespace part of the rule shows here
  EXPECT_EQ(normalize_answer("  a  b "), "b");
  EXPECT_EQ(normalize_answer("  x  y "), "x y");
}

TEST(Metrics, Fixtures) {
  EXPECT_EQ(exact_match("42", "42"), 1);
  EXPECT_EQ(token_f1("42", "42"), 1.0);
  EXPECT_EQ(exact_match("the cat sat", "cat sat down"), 0);
  // P = 2/2, R = 2/3 -> 2PR/(P+R) = 0.8
  EXPECT_NEAR(token_f1("the cat sat", "cat sat down"), 0.8, 1e-12);
  EXPECT_EQ(token_f1("red dog", "blue cat"), 0.0);
  EXPECT_EQ(exact_match("", ""), 1);
  EXPECT_EQ(token_f1("", ""), 1.0);
  EXPECT_EQ(token_f1("x", ""), 0.0);
  EXPECT_EQ(token_f1("", "x"), 0.0);
}

TEST(Metrics, MultisetOverlap) {
  // pred {x,x,y}, gold {x,y,y}: common = min counts = 1 + 1 = 2
  EXPECT_NEAR(token_f1("x x y", "x y y"), 2.0 * 2 / 6, 1e-12);
}

TEST(Metrics, PropertySymmetryAndEmImpliesF1) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    std::string a = random_answer(rng), b = random_answer(rng);
    double f = token_f1(a, b);
    EXPECT_EQ(f, token_f1(b, a)) << a << " | " << b;
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
    EXPECT_LE(exact_match(a, b), f);
    if (exact_match(a, b)) EXPECT_EQ(f, 1.0);
    EXPECT_EQ(exact_match(a, a), 1);
  }
}

TEST(ExecAcc, Examples) {
  UnifiedTable t = normalize_table(std::vector<std::vector<std::string>>{{"a"}, {"1"}});
  EXPECT_EQ(exec_acc("subtract(5,3)", "2", t).score, 1);
  EXPECT_EQ(exec_acc("divide(1,3)", "0.3333", t).score, 1);
  MetricResult bad = exec_acc("subtract(5,", "2", t);
  EXPECT_EQ(bad.score, 0);
  EXPECT_EQ(bad.flag, "unparseable");
  EXPECT_EQ(exec_acc("subtract(5,3)", "3", t).score, 0);
}

TEST(ExecAcc, WhitespaceInvariant) {
  UnifiedTable t = normalize_table(std::vector<std::vector<std::string>>{{"a"}, {"1"}});
  const char* preds[] = {"add(2,3), multiply(#0,4)", "divide(7,2)", "3 * (4 - 1)"};
  const char* golds[] = {"20", "3.5", "9"};
  for (int i = 0; i < 3; ++i) {
    std::string spaced;
    for (char c : std::string(preds[i])) {
      spaced += c;
      if (c == ',' || c == '(') spaced += "  ";
    }
    EXPECT_EQ(exec_acc(preds[i], golds[i], t).score, 1) << preds[i];
    EXPECT_EQ(exec_acc(spaced, golds[i], t).score, 1) << spaced;
  }
}

TEST(AnswersMatch, PercentReadings) {
  EXPECT_TRUE(answers_match("12.5", "12.5%"));
  EXPECT_TRUE(answers_match("0.125", "12.5%"));
  EXPECT_FALSE(answers_match("1.25", "12.5%"));
  EXPECT_TRUE(answers_match("Paris", "paris."));
}

TEST(ProgramAcc, Examples) {
  EXPECT_EQ(program_acc("add(1,2)", "add( 1 , 2 )").score, 1);
  EXPECT_EQ(program_acc("add(1,2)", "add(2,1)").score, 0);
  EXPECT_EQ(program_acc("add(2,3), multiply(#0,4)", "add(2,3), multiply(#0,4)").score, 1);
  MetricResult r = program_acc("add(1,", "add(1,2)");
  EXPECT_EQ(r.score, 0);
  EXPECT_EQ(r.flag, "unparseable");
}

TEST(ParseMetrics, NamesAndErrors) {
  auto m = parse_metrics("em,f1,exe,prog");
  ASSERT_EQ(m.size(), 4u);
  EXPECT_EQ(m[0], Metric::kEm);
  EXPECT_EQ(m[3], Metric::kProg);
  try {
    parse_metrics("em,bleu");
    FAIL();
  } catch (const Error& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("bleu"), std::string::npos);
    EXPECT_NE(msg.find("em"), std::string::npos);
    EXPECT_NE(msg.find("prog"), std::string::npos);
  }
}

TEST(Predictions, DuplicateIdsRejected) {
  EXPECT_THROW(parse_predictions("{\"id\":\"a\",\"answer\":\"1\"}\n{\"id\":\"a\",\"answer\":\"2\"}\n"), Error);
  auto p = parse_predictions("{\"id\":\"a\",\"answer\":\"1\",\"derivation\":\"add(1,0)\"}\n\n");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(*p[0].derivation, "add(1,0)");
}

TEST(Evaluate, PerfectPredictions) {
  std::vector<QAExample> g = {gold("1", "Paris"), gold("2", "2", AnswerFormat::kProgram, "subtract(5,3)")};
  std::vector<Prediction> p = {{"1", "paris", std::nullopt}, {"2", "2", "subtract(5, 3)"}};
  auto metrics = parse_metrics("em,f1,exe,prog");
  EvalReport r = evaluate(g, p, metrics);
  for (Metric m : metrics) EXPECT_EQ(r.aggregate.at(m), 1.0) << to_string(m);
  EXPECT_EQ(r.counts.missing, 0u);
  // exe/prog are only defined where the gold carries a derivation
  EXPECT_FALSE(r.per_example[0].exe_acc.has_value());
  EXPECT_TRUE(r.per_example[1].prog_acc.has_value());
}

TEST(Evaluate, MissingHalvesEm) {
  std::vector<QAExample> g;
  std::vector<Prediction> p;
  for (int i = 0; i < 10; ++i) {
    g.push_back(gold(std::to_string(i), "v" + std::to_string(i)));
    if (i % 2 == 0) p.push_back({std::to_string(i), "v" + std::to_string(i), std::nullopt});
  }
  EvalReport r = evaluate(g, p, {Metric::kEm});
  EXPECT_EQ(r.aggregate.at(Metric::kEm), 0.5);
  EXPECT_EQ(r.counts.missing, 5u);
  EXPECT_EQ(r.counts.predicted, 5u);
}

TEST(Evaluate, ExtraPredictionsCounted) {
  std::vector<QAExample> g = {gold("1", "x")};
  std::vector<Prediction> p = {{"1", "x", std::nullopt}, {"zz", "y", std::nullopt}};
  EvalReport r = evaluate(g, p, {Metric::kEm});
  EXPECT_EQ(r.counts.extra, 1u);
}

TEST(Evaluate, AggregatesMatchRecomputeAndParallel) {
  Rng rng(5);
  std::vector<QAExample> g;
  std::vector<Prediction> p;
  for (std::size_t i = 0; i < 400; ++i) {
    QAExample ex = testgen::valid_example(rng, i);
    g.push_back(ex);
    if (testgen::coin(rng, 0.8)) {
      Prediction pr{ex.id, testgen::coin(rng, 0.5) ? ex.answer.value : random_answer(rng), ex.answer.derivation};
      p.push_back(pr);
    }
  }
  auto metrics = parse_metrics("em,f1,exe,prog");
  EvalReport serial = evaluate(g, p, metrics, ExecPolicy::kSerial);
  EvalReport parallel = evaluate(g, p, metrics, ExecPolicy::kParallel);
  EXPECT_EQ(serial.aggregate, parallel.aggregate);
  EXPECT_EQ(report_to_json(serial).dump(), report_to_json(parallel).dump());
  EXPECT_EQ(recompute_aggregate(serial), serial.aggregate);
}

TEST(Evaluate, DatasetFilesAndReport) {
  tqk::testing::TempDir dir;
  std::vector<QAExample> g = {gold("1", "Paris"), gold("2", "Rome")};
  std::string gp = dir.file("gold.jsonl");
  save_unified(g, gp);
  std::string pp = dir.write("pred.jsonl", "{\"id\":\"1\",\"answer\":\"Paris\"}\n");
  EvalReport r = evaluate_dataset(pp, gp, {Metric::kEm, Metric::kF1});
  EXPECT_EQ(r.aggregate.at(Metric::kEm), 0.5);
  Json j = report_to_json(r);
  EXPECT_TRUE(j.contains("aggregate"));
  EXPECT_EQ(j["per_example"].size(), 2u);
  std::string text = report_to_text(r);
  EXPECT_NE(text.find("em"), std::string::npos);
}
