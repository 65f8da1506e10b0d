#include <gtest/gtest.h>

#include <set>

#include "generators.hpp"
#include "tempdir.hpp"
#include "tqk/benchmark.hpp"

using namespace tqk;

namespace {

// One-column table with `n` body rows "w". Markdown:
//   "| <header> |" + "| --- |" (1 + 3 + 1 tokens) + n * "| w |" (3 tokens)
QAExample column_example(std::string id, Category cat, std::size_t n, std::string header = "h") {
  std::vector<std::vector<std::string>> g{{header}};
  for (std::size_t i = 0; i < n; ++i) g.push_back({"w"});
  QAExample ex;
  ex.id = std::move(id);
  ex.dataset = "d";
  ex.category = cat;
  ex.question = "q?";
  ex.table = normalize_table(g);
  ex.answer = Answer{AnswerFormat::kDirect, "w", std::nullopt};
  return ex;
}

std::vector<QAExample> pool(Category cat, std::size_t n, std::size_t rows = 2) {
  std::vector<QAExample> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(column_example(std::string(to_string(cat)) + std::to_string(i), cat, rows));
  return out;
}

std::vector<std::string> ids(const std::vector<QAExample>& xs) {
  std::vector<std::string> out;
  for (const auto& x : xs) out.push_back(x.id);
  return out;
}

}  // namespace

TEST(Bench, TokenCountsByHand) {
  Tokenizer tok;
  EXPECT_EQ(table_tokens(column_example("a", Category::kEncyclopedia, 2164), tok), 6500u);
  EXPECT_EQ(table_tokens(column_example("b", Category::kStructured, 497, "h h"), tok), 1500u);
}

TEST(Bench, LengthFilter) {
  Tokenizer tok;
  BenchConfig cfg;
  std::vector<QAExample> xs = {column_example("long", Category::kEncyclopedia, 2164),
                               column_example("ok", Category::kEncyclopedia, 100),
                               column_example("short", Category::kStructured, 497, "h h"),
                               column_example("ss", Category::kSpreadSheet, 1)};
  auto kept = filter_by_length(xs, cfg.bounds, tok);
  EXPECT_EQ(ids(kept), (std::vector<std::string>{"ok", "ss"}));
  // no bounds at all: unchanged
  EXPECT_EQ(ids(filter_by_length(xs, {}, tok)), ids(xs));
}

TEST(Bench, BoundsAreExclusive) {
  LengthBounds b{2000, 6000};
  EXPECT_FALSE(b.admits(2000));
  EXPECT_TRUE(b.admits(2001));
  EXPECT_TRUE(b.admits(5999));
  EXPECT_FALSE(b.admits(6000));
  EXPECT_TRUE(LengthBounds{}.admits(0));
}

TEST(Bench, SampleQuota) {
  auto p = pool(Category::kSpreadSheet, 10);
  EXPECT_EQ(ids(sample_quota(p, 10, 1)), ids(p));
  auto a = sample_quota(p, 4, 99), b = sample_quota(p, 4, 99);
  EXPECT_EQ(ids(a), ids(b));
  EXPECT_EQ(a.size(), 4u);
  // order preserved: selected ids appear in pool order
  std::size_t last = 0;
  for (const auto& x : a) {
    std::size_t pos = std::stoul(x.id.substr(std::string("SpreadSheet").size()));
    EXPECT_GE(pos, last);
    last = pos;
  }
  try {
    sample_quota(pool(Category::kSpreadSheet, 5), 8, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("need 8, have 5"), std::string::npos);
  }
}

TEST(Bench, SamplingIsRoughlyUniform) {
  auto p = pool(Category::kSpreadSheet, 20);
  std::map<std::string, int> hits;
  for (std::uint64_t s = 0; s < 2000; ++s)
    for (const auto& x : sample_quota(p, 5, s)) ++hits[x.id];
  // expected 500 each; 5 sigma is about 97
  for (const auto& [id, n] : hits) EXPECT_NEAR(n, 500, 100) << id;
  EXPECT_EQ(hits.size(), 20u);
}

TEST(Bench, AssembleDeterministic) {
  BenchConfig cfg;
  cfg.quotas = {{Category::kSpreadSheet, 3}, {Category::kEncyclopedia, 2}, {Category::kStructured, 4}};
  cfg.bounds = {};
  cfg.seed = 7;
  std::map<Category, std::vector<QAExample>> pools{{Category::kSpreadSheet, pool(Category::kSpreadSheet, 6)},
                                                   {Category::kEncyclopedia, pool(Category::kEncyclopedia, 6)},
                                                   {Category::kStructured, pool(Category::kStructured, 6)}};
  // a pool member filed under the wrong category is recategorized
  pools[Category::kStructured][0].category = Category::kEncyclopedia;
  Tokenizer tok;
  Benchmark a = assemble(cfg, pools, tok), b = assemble(cfg, pools, tok);
  EXPECT_EQ(ids(a.examples), ids(b.examples));
  ASSERT_EQ(a.examples.size(), 9u);
  EXPECT_EQ(a.report.total, 9u);
  EXPECT_EQ(a.report.per_category.at(Category::kStructured).count, 4u);
  for (std::size_t i = 5; i < 9; ++i) EXPECT_EQ(a.examples[i].category, Category::kStructured);
  std::set<std::string> uniq;
  for (const auto& x : a.examples) uniq.insert(x.id);
  EXPECT_EQ(uniq.size(), 9u);
  cfg.seed = 8;
  Benchmark c = assemble(cfg, pools, tok);
  EXPECT_NE(ids(a.examples), ids(c.examples));
}

TEST(Bench, ShortfallNamesCategory) {
  BenchConfig cfg;
  cfg.quotas = {{Category::kEncyclopedia, 3}};
  std::map<Category, std::vector<QAExample>> pools{
      {Category::kEncyclopedia,
       {column_example("a", Category::kEncyclopedia, 10), column_example("b", Category::kEncyclopedia, 10),
        column_example("c", Category::kEncyclopedia, 2164)}}};
  try {
    assemble(cfg, pools, Tokenizer());
    FAIL();
  } catch (const ShortfallError& e) {
    EXPECT_EQ(e.category(), Category::kEncyclopedia);
    EXPECT_EQ(std::string(e.what()).rfind("Encyclopedia:", 0), 0u);
  }
}

TEST(Bench, Stats) {
  std::vector<QAExample> xs = {column_example("a", Category::kSpreadSheet, 1),   // 11 tokens
                               column_example("b", Category::kSpreadSheet, 3),   // 17
                               column_example("c", Category::kStructured, 2)};   // 14
  StatsReport r = compute_stats(xs, Tokenizer());
  EXPECT_EQ(r.total, 3u);
  EXPECT_DOUBLE_EQ(r.per_category.at(Category::kSpreadSheet).mean_tokens, 14.0);
  EXPECT_DOUBLE_EQ(r.mean_tokens, 14.0);
  Json j = stats_to_json(r);
  EXPECT_EQ(j["categories"]["SpreadSheet"]["count"], 2);
  EXPECT_EQ(j["tokenizer"], "default");
}

TEST(Bench, ConfigParsing) {
  BenchConfig cfg = parse_bench_config(
      "# demo\nseed = 42\n[SpreadSheet]\nquota = 5\ninputs = a.jsonl, b.jsonl\n"
      "[Encyclopedia]\nmax_tokens = none\nmin_tokens = 10\n",
      "/data");
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.quotas.at(Category::kSpreadSheet), 5u);
  EXPECT_EQ(cfg.quotas.at(Category::kStructured), 400u);
  ASSERT_EQ(cfg.inputs.at(Category::kSpreadSheet).size(), 2u);
  EXPECT_EQ(cfg.inputs.at(Category::kSpreadSheet)[1], "/data/b.jsonl");
  EXPECT_FALSE(cfg.bounds.at(Category::kEncyclopedia).max_tokens.has_value());
  EXPECT_EQ(*cfg.bounds.at(Category::kEncyclopedia).min_tokens, 10u);
  try {
    parse_bench_config("seed = 1\n[Nope]\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_bench_config("[Structured]\nmin_tokens = 10\nmax_tokens = 5\n"), Error);
}

TEST(Bench, AssembleFromFiles) {
  tqk::testing::TempDir dir;
  save_unified(pool(Category::kSpreadSheet, 4), dir.file("ss.jsonl"));
  std::string cfg_path =
      dir.write("bench.cfg", "seed = 3\n[SpreadSheet]\nquota = 2\ninputs = ss.jsonl\n"
                             "[Encyclopedia]\nquota = 0\n[Structured]\nquota = 0\n");
  Benchmark b = assemble(load_bench_config(cfg_path));
  EXPECT_EQ(b.examples.size(), 2u);
}

TEST(Bench, SerialParallelCountsAgree) {
  testgen::Rng rng(3);
  std::vector<QAExample> xs;
  for (std::size_t i = 0; i < 300; ++i) xs.push_back(testgen::valid_example(rng, i));
  Tokenizer tok;
  EXPECT_EQ(table_token_counts(xs, tok, ExecPolicy::kSerial), table_token_counts(xs, tok, ExecPolicy::kParallel));
}
