#include "tqk/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "tqk/error.hpp"
#include "tqk/ingest.hpp"
#include "tqk/linearize.hpp"
#include "tqk/numeric.hpp"

namespace tqk {

namespace {

std::string header_or_default(const UnifiedTable& t, std::size_t c) {
  std::string h = t.column_header(c);
  return h.empty() ? "column " + std::to_string(c + 1) : h;
}

std::size_t parse_index(std::string_view s, std::string_view whole) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error("malformed locator " + std::string(whole));
  }
  return v;
}

}  // namespace

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::kRow: return "row";
    case Granularity::kColumn: return "column";
    case Granularity::kCell: return "cell";
    case Granularity::kPassage: return "passage";
  }
  return "?";
}

std::optional<Granularity> granularity_from_string(std::string_view s) {
  for (auto g : {Granularity::kRow, Granularity::kColumn, Granularity::kCell, Granularity::kPassage}) {
    if (iequals(to_string(g), s)) return g;
  }
  return std::nullopt;
}

std::string locator_to_string(const Locator& loc) {
  return std::visit(
      [](const auto& l) -> std::string {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, RowLoc>) return "r" + std::to_string(l.row);
        if constexpr (std::is_same_v<T, ColumnLoc>) return "c" + std::to_string(l.column);
        if constexpr (std::is_same_v<T, CellLoc>) {
          return "r" + std::to_string(l.row) + "c" + std::to_string(l.column);
        }
        if constexpr (std::is_same_v<T, PassageLoc>) return "p:" + l.id;
      },
      loc);
}

Locator locator_from_string(std::string_view s) {
  if (s.starts_with("p:")) return PassageLoc{std::string(s.substr(2))};
  if (s.starts_with("c")) return ColumnLoc{parse_index(s.substr(1), s)};
  if (s.starts_with("r")) {
    auto c = s.find('c');
    if (c == std::string_view::npos) return RowLoc{parse_index(s.substr(1), s)};
    return CellLoc{parse_index(s.substr(1, c - 1), s), parse_index(s.substr(c + 1), s)};
  }
  throw Error("malformed locator " + std::string(s));
}

void validate(const RetrieverConfig& cfg) {
  if (!(cfg.k1 > 0)) throw Error("k1 must be positive");
  if (!(cfg.b >= 0 && cfg.b <= 1)) throw Error("b must lie in [0, 1]");
  if (cfg.top_k == 0) throw Error("top_k must be positive");
}

std::vector<RetrievalUnit> extract_units(const QAExample& ex, Granularity granularity,
                                         bool include_passages) {
  const UnifiedTable& t = ex.table;
  std::vector<RetrievalUnit> units;
  auto add = [&](Granularity kind, Locator loc, std::string text) {
    units.push_back({kind, std::move(loc), std::move(text), units.size()});
  };
  switch (granularity) {
    case Granularity::kRow:
      for (std::size_t b = 0; b < t.body_rows(); ++b) add(Granularity::kRow, RowLoc{b}, flatten_row(t, b));
      break;
    case Granularity::kColumn:
      for (std::size_t c = 0; c < t.cols(); ++c) {
        std::string text = header_or_default(t, c) + ":";
        bool first = true;
        for (std::size_t b = 0; b < t.body_rows(); ++b) {
          const Cell& cell = t.cell(t.header_rows() + b, c);
          if (cell.empty()) continue;
          text += first ? " " : "; ";
          text += trim(cell.text);
          first = false;
        }
        add(Granularity::kColumn, ColumnLoc{c}, std::move(text));
      }
      break;
    case Granularity::kCell:
      for (std::size_t b = 0; b < t.body_rows(); ++b) {
        for (std::size_t c = 0; c < t.cols(); ++c) {
          const Cell& cell = t.cell(t.header_rows() + b, c);
          if (cell.empty()) continue;
          add(Granularity::kCell, CellLoc{b, c}, header_or_default(t, c) + ": " + std::string(trim(cell.text)));
        }
      }
      break;
    case Granularity::kPassage:
      include_passages = true;
      break;
  }
  if (include_passages) {
    for (const auto& p : ex.passages) {
      std::string text = p.title.empty() ? p.text : p.title + ": " + p.text;
      if (trim(text).empty()) continue;
      add(Granularity::kPassage, PassageLoc{p.id}, std::move(text));
    }
  }
  return units;
}

std::vector<std::string> retrieval_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Bm25Scorer::Bm25Scorer(double k1, double b) : k1_(k1), b_(b) {
  if (!(k1 > 0)) throw Error("k1 must be positive");
  if (!(b >= 0 && b <= 1)) throw Error("b must lie in [0, 1]");
}

std::vector<double> Bm25Scorer::score(const std::vector<RetrievalUnit>& units,
                                      std::string_view query) const {
  const std::size_t n = units.size();
  std::vector<std::unordered_map<std::string, std::size_t>> tf(n);
  std::vector<std::size_t> length(n);
  std::unordered_map<std::string, std::size_t> df;
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& tok : retrieval_tokens(units[i].text)) {
      if (tf[i][tok]++ == 0) ++df[tok];
      ++length[i];
    }
    total += static_cast<double>(length[i]);
  }
  const double avgdl = n ? total / static_cast<double>(n) : 0.0;

  std::vector<double> scores(n, 0.0);
  for (const auto& term : retrieval_tokens(query)) {
    auto d = df.find(term);
    if (d == df.end()) continue;
    const double docs = static_cast<double>(n);
    const double with = static_cast<double>(d->second);
    const double idf = std::max(0.0, std::log((docs - with + 0.5) / (with + 0.5)));
    if (idf == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      auto f = tf[i].find(term);
      if (f == tf[i].end()) continue;
      const double freq = static_cast<double>(f->second);
      const double norm = avgdl > 0 ? 1 - b_ + b_ * static_cast<double>(length[i]) / avgdl : 1.0;
      scores[i] += idf * freq * (k1_ + 1) / (freq + k1_ * norm);
    }
  }
  return scores;
}

ExternalScorer ExternalScorer::from_text(std::string_view jsonl) {
  auto table = std::make_shared<std::map<std::string, std::map<std::string, double>>>();
  std::size_t line_no = 0, start = 0;
  while (start <= jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      auto& scores = (*table)[j.at("id").get<std::string>()];
      for (const auto& [loc, v] : j.at("scores").items()) {
        scores[locator_to_string(locator_from_string(loc))] = v.get<double>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error("score file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  ExternalScorer s;
  s.table_ = std::move(table);
  return s;
}

ExternalScorer ExternalScorer::from_file(const std::string& path) { return from_text(read_file(path)); }

ExternalScorer ExternalScorer::for_example(const std::string& example_id) const {
  ExternalScorer s = *this;
  s.example_id_ = example_id;
  return s;
}

std::vector<double> ExternalScorer::score(const std::vector<RetrievalUnit>& units,
                                          std::string_view) const {
  std::vector<double> out(units.size(), 0.0);
  if (!table_) return out;
  auto ex = table_->find(example_id_);
  if (ex == table_->end()) return out;
  for (std::size_t i = 0; i < units.size(); ++i) {
    auto it = ex->second.find(locator_to_string(units[i].locator));
    if (it != ex->second.end()) out[i] = it->second;
  }
  return out;
}

std::vector<Ranked> rank(std::vector<RetrievalUnit> units, const std::vector<double>& scores,
                         std::size_t top_k) {
  if (scores.size() != units.size()) throw Error("scorer returned wrong number of scores");
  std::vector<Ranked> ranked;
  ranked.reserve(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) ranked.push_back({std::move(units[i]), scores[i]});
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.unit.ordinal < b.unit.ordinal;
  });
  if (ranked.size() > top_k) ranked.resize(top_k);
  return ranked;
}

std::vector<Ranked> retrieve(const QAExample& ex, const RetrieverConfig& cfg,
                             std::string_view question, const Scorer& scorer) {
  validate(cfg);
  auto units = extract_units(ex, cfg.granularity, cfg.include_passages);
  if (units.empty()) throw Error("nothing to index");
  auto scores = scorer.score(units, question);
  return rank(std::move(units), scores, cfg.top_k);
}

std::vector<Ranked> retrieve(const QAExample& ex, const RetrieverConfig& cfg,
                             std::string_view question) {
  return retrieve(ex, cfg, question, Bm25Scorer(cfg.k1, cfg.b));
}

std::vector<std::vector<Ranked>> retrieve_batch(const std::vector<QAExample>& examples,
                                                const RetrieverConfig& cfg, ExecPolicy policy) {
  validate(cfg);
  const Bm25Scorer scorer(cfg.k1, cfg.b);
  std::vector<std::vector<Ranked>> out(examples.size());
  const long n = static_cast<long>(examples.size());
  if (policy == ExecPolicy::kSerial) {
    for (long i = 0; i < n; ++i) out[i] = retrieve(examples[i], cfg, examples[i].question, scorer);
    return out;
  }
  // Exceptions cannot cross the parallel region; the first one is rethrown.
  std::vector<std::exception_ptr> errors(examples.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = retrieve(examples[i], cfg, examples[i].question, scorer);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

double recall_at_k(const std::vector<Ranked>& ranked, const std::vector<Locator>& gold,
                   std::size_t k) {
  if (k == 0) throw Error("k must be at least 1");
  std::set<Locator> wanted(gold.begin(), gold.end());
  if (wanted.empty()) throw Error("no gold units");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    if (wanted.erase(ranked[i].unit.locator)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(std::set<Locator>(gold.begin(), gold.end()).size());
}

}  // namespace tqk
