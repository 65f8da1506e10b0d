#include "tqk/benchmark.hpp"

#include <charconv>
#include <filesystem>
#include <random>

#include "tqk/error.hpp"
#include "tqk/numeric.hpp"

namespace tqk {

namespace {

constexpr Category kOrder[] = {Category::kSpreadSheet, Category::kEncyclopedia,
                               Category::kStructured};

std::uint64_t parse_u64(std::string_view v, std::size_t line) {
  std::uint64_t out = 0;
  auto t = trim(v);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) {
    throw Error("line " + std::to_string(line) + ": expected a non-negative integer, got '" +
                std::string(t) + "'");
  }
  return out;
}

std::optional<std::size_t> parse_bound(std::string_view v, std::size_t line) {
  auto t = trim(v);
  if (t.empty() || iequals(t, "none")) return std::nullopt;
  return static_cast<std::size_t>(parse_u64(t, line));
}

std::uint64_t category_seed(std::uint64_t seed, Category c) {
  return seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(c) + 1);
}

}  // namespace

std::size_t BenchConfig::total() const {
  std::size_t n = 0;
  for (const auto& [c, q] : quotas) n += q;
  return n;
}

void BenchConfig::validate() const {
  for (const auto& [c, b] : bounds) {
    if (b.min_tokens && b.max_tokens && *b.min_tokens >= *b.max_tokens) {
      throw Error(std::string(to_string(c)) + ": min_tokens " + std::to_string(*b.min_tokens) +
                  " must be below max_tokens " + std::to_string(*b.max_tokens));
    }
  }
}

BenchConfig parse_bench_config(std::string_view text, const std::string& base_dir) {
  BenchConfig cfg;
  std::optional<Category> section;
  auto resolve = [&](std::string_view p) {
    std::filesystem::path path{std::string(p)};
    if (path.is_relative() && !base_dir.empty()) path = std::filesystem::path(base_dir) / path;
    return path.string();
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::string_view line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw Error("line " + std::to_string(line_no) + ": unterminated section");
      auto name = trim(line.substr(1, line.size() - 2));
      section = category_from_string(name);
      if (!section) {
        throw Error("line " + std::to_string(line_no) + ": unknown category '" + std::string(name) +
                    "' (valid: SpreadSheet, Encyclopedia, Structured)");
      }
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = to_lower(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));

    if (!section) {
      if (key == "seed") {
        cfg.seed = parse_u64(value, line_no);
      } else if (key == "tokenizer_vocab") {
        cfg.tokenizer_vocab = value.empty() ? std::nullopt : std::optional(resolve(value));
      } else {
        throw Error("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      }
      continue;
    }
    if (key == "quota") {
      cfg.quotas[*section] = static_cast<std::size_t>(parse_u64(value, line_no));
    } else if (key == "min_tokens") {
      cfg.bounds[*section].min_tokens = parse_bound(value, line_no);
    } else if (key == "max_tokens") {
      cfg.bounds[*section].max_tokens = parse_bound(value, line_no);
    } else if (key == "inputs") {
      auto& list = cfg.inputs[*section];
      list.clear();
      std::size_t start = 0;
      while (start <= value.size()) {
        auto comma = value.find(',', start);
        auto item = trim(value.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (!item.empty()) list.push_back(resolve(item));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
    } else {
      throw Error("line " + std::to_string(line_no) + ": unknown key '" + key + "' in section " +
                  std::string(to_string(*section)));
    }
  }
  cfg.validate();
  return cfg;
}

BenchConfig load_bench_config(const std::string& path) {
  return parse_bench_config(read_file(path), std::filesystem::path(path).parent_path().string());
}

std::size_t table_tokens(const QAExample& ex, const Tokenizer& tokenizer) {
  return tokenizer.count(to_markdown(ex.table));
}

std::vector<std::size_t> table_token_counts(const std::vector<QAExample>& examples,
                                            const Tokenizer& tokenizer, ExecPolicy policy) {
  std::vector<std::size_t> counts(examples.size());
  const auto n = static_cast<std::ptrdiff_t>(examples.size());
  if (policy == ExecPolicy::kSerial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) counts[i] = table_tokens(examples[i], tokenizer);
  } else {
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i) counts[i] = table_tokens(examples[i], tokenizer);
  }
  return counts;
}

std::vector<QAExample> filter_by_length(const std::vector<QAExample>& examples,
                                        const std::map<Category, LengthBounds>& bounds,
                                        const Tokenizer& tokenizer, ExecPolicy policy) {
  if (bounds.empty()) return examples;
  auto counts = table_token_counts(examples, tokenizer, policy);
  std::vector<QAExample> out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto it = bounds.find(examples[i].category);
    if (it == bounds.end() || it->second.admits(counts[i])) out.push_back(examples[i]);
  }
  return out;
}

std::vector<QAExample> sample_quota(const std::vector<QAExample>& pool, std::size_t quota,
                                    std::uint64_t seed) {
  if (pool.size() < quota) {
    throw Error("need " + std::to_string(quota) + ", have " + std::to_string(pool.size()));
  }
  // Selection sampling: each candidate is taken with probability
  // (still needed) / (still left), which keeps input order.
  std::mt19937_64 rng(seed);
  std::vector<QAExample> out;
  out.reserve(quota);
  const std::size_t n = pool.size();
  for (std::size_t i = 0; i < n && out.size() < quota; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (static_cast<double>(n - i) * u < static_cast<double>(quota - out.size())) {
      out.push_back(pool[i]);
    }
  }
  return out;
}

StatsReport compute_stats(const std::vector<QAExample>& examples, const Tokenizer& tokenizer) {
  StatsReport r;
  r.tokenizer = tokenizer.label();
  r.total = examples.size();
  auto counts = table_token_counts(examples, tokenizer);
  std::map<Category, double> sums;
  double total = 0;
  for (auto c : kOrder) r.per_category[c] = {};
  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto c = examples[i].category;
    r.per_category[c].count++;
    sums[c] += static_cast<double>(counts[i]);
    total += static_cast<double>(counts[i]);
  }
  for (auto& [c, s] : r.per_category) {
    if (s.count) s.mean_tokens = sums[c] / static_cast<double>(s.count);
  }
  if (r.total) r.mean_tokens = total / static_cast<double>(r.total);
  return r;
}

Benchmark assemble(const BenchConfig& cfg, const std::map<Category, std::vector<QAExample>>& pools,
                   const Tokenizer& tokenizer) {
  cfg.validate();
  Benchmark out;
  for (auto c : kOrder) {
    auto q = cfg.quotas.find(c);
    if (q == cfg.quotas.end() || q->second == 0) continue;

    std::vector<QAExample> pool;
    if (auto p = pools.find(c); p != pools.end()) pool = p->second;
    for (auto& ex : pool) ex.category = c;

    auto b = cfg.bounds.find(c);
    if (b != cfg.bounds.end()) pool = filter_by_length(pool, {{c, b->second}}, tokenizer);

    std::vector<QAExample> picked;
    try {
      picked = sample_quota(pool, q->second, category_seed(cfg.seed, c));
    } catch (const Error& e) {
      throw ShortfallError(c, std::string(e.what()) + " after length filtering");
    }
    for (auto& ex : picked) out.examples.push_back(std::move(ex));
  }
  out.report = compute_stats(out.examples, tokenizer);
  out.report.seed = cfg.seed;
  return out;
}

Benchmark assemble(const BenchConfig& cfg) {
  Tokenizer tokenizer = cfg.tokenizer_vocab ? Tokenizer::from_vocab_file(*cfg.tokenizer_vocab) : Tokenizer();
  std::map<Category, std::vector<QAExample>> pools;
  for (const auto& [c, paths] : cfg.inputs) {
    auto& pool = pools[c];
    for (const auto& p : paths) {
      auto loaded = load_unified(p);
      pool.insert(pool.end(), std::make_move_iterator(loaded.begin()),
                  std::make_move_iterator(loaded.end()));
    }
  }
  return assemble(cfg, pools, tokenizer);
}

Json stats_to_json(const StatsReport& report) {
  Json j;
  Json cats = Json::object();
  for (auto c : kOrder) {
    auto it = report.per_category.find(c);
    CategoryStats s = it == report.per_category.end() ? CategoryStats{} : it->second;
    cats[std::string(to_string(c))] = {{"count", s.count}, {"mean_table_tokens", s.mean_tokens}};
  }
  j["categories"] = std::move(cats);
  j["total"] = report.total;
  j["mean_table_tokens"] = report.mean_tokens;
  j["tokenizer"] = report.tokenizer;
  j["seed"] = report.seed;
  return j;
}

}  // namespace tqk
