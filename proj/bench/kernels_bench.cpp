// Serial reference vs OpenMP path for the three bulk kernels.

#include <benchmark/benchmark.h>

#include <random>

#include "tqk/benchmark.hpp"
#include "tqk/evaluation.hpp"
#include "tqk/retrieval.hpp"

using namespace tqk;

namespace {

std::string word(std::mt19937_64& rng) {
  static const char* words[] = {"alpha", "beta", "gamma", "delta", "north", "south", "2019", "2020", "41.5", "total"};
  return words[rng() % 10];
}

std::vector<QAExample> corpus(std::size_t n, std::size_t rows) {
  std::mt19937_64 rng(7);
  std::vector<QAExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::vector<std::string>> g{{"Name", "Region", "Year", "Value"}};
    for (std::size_t r = 0; r < rows; ++r) g.push_back({word(rng), word(rng), word(rng), std::to_string(rng() % 1000)});
    QAExample ex;
    ex.id = "b" + std::to_string(i);
    ex.question = "What is the value for " + word(rng) + " " + word(rng) + "?";
    ex.table = normalize_table(g);
    ex.answer = Answer{AnswerFormat::kProgram, "3", "subtract(" + std::to_string(i % 50 + 3) + ", " + std::to_string(i % 50) + ")"};
    out.push_back(std::move(ex));
  }
  return out;
}

ExecPolicy policy(const benchmark::State& state) {
  return state.range(0) == 0 ? ExecPolicy::kSerial : ExecPolicy::kParallel;
}

void BM_Evaluate(benchmark::State& state) {
  auto gold = corpus(2000, 4);
  std::vector<Prediction> preds;
  for (const auto& ex : gold) preds.push_back({ex.id, "the answer is 3", ex.answer.derivation});
  auto metrics = parse_metrics("em,f1,exe,prog");
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(gold, preds, metrics, policy(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(gold.size()));
}

void BM_RetrieveBatch(benchmark::State& state) {
  auto xs = corpus(500, 60);
  RetrieverConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(retrieve_batch(xs, cfg, policy(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}

void BM_TableTokenCounts(benchmark::State& state) {
  auto xs = corpus(500, 200);
  Tokenizer tok;
  for (auto _ : state) benchmark::DoNotOptimize(table_token_counts(xs, tok, policy(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}

}  // namespace

// Arg 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_Evaluate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RetrieveBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TableTokenCounts)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
