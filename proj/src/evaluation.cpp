#include "tqk/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tqk/derivation.hpp"
#include "tqk/error.hpp"
#include "tqk/math_expr.hpp"
#include "tqk/numeric.hpp"
#include "tqk/program.hpp"
#include "tqk/sql.hpp"

namespace tqk {

namespace {

bool is_article(std::string_view w) { return w == "a" || w == "an" || w == "the"; }

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> normalized_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (std::string& tok : split_ws(to_lower(s))) {
    std::string_view numeric = tok;
    while (!numeric.empty() && std::string_view(".,;:!?").find(numeric.back()) != std::string_view::npos) {
      numeric.remove_suffix(1);
    }
    if (auto v = parse_number(numeric, PercentRule::kStrip)) {
      out.push_back(format_number(*v));
      continue;
    }
    std::string word;
    for (char c : tok) {
      if (!std::ispunct(static_cast<unsigned char>(c))) word.push_back(c);
    }
    if (word.empty() || is_article(word)) continue;
    out.push_back(std::move(word));
  }
  return out;
}

bool close_enough(double p, double g) { return std::fabs(p - g) <= 1e-4 * std::max(1.0, std::fabs(g)); }

bool sql_equivalent(const SqlQuery& a, const SqlQuery& b) {
  if (a.agg != b.agg || !iequals(trim(a.select_column), trim(b.select_column))) return false;
  if (a.conditions.size() != b.conditions.size()) return false;
  for (std::size_t i = 0; i < a.conditions.size(); ++i) {
    const auto& x = a.conditions[i];
    const auto& y = b.conditions[i];
    if (x.op != y.op || !iequals(trim(x.column), trim(y.column))) return false;
    auto nx = parse_number(x.literal);
    auto ny = parse_number(y.literal);
    if (nx && ny) {
      if (std::fabs(*nx - *ny) > 1e-9 * std::max({1.0, std::fabs(*nx), std::fabs(*ny)})) return false;
    } else if (trim(x.literal) != trim(y.literal)) {
      return false;
    }
  }
  return true;
}

// Programs and math expressions compare in program form.
std::optional<Program> as_program(std::string_view text, AnswerFormat format) {
  if (format == AnswerFormat::kProgram) return parse_program(text);
  if (format == AnswerFormat::kMathExpr) {
    MathExpr e = parse_math_expr(text);
    if (e.root().is_literal) return std::nullopt;
    return expr_to_program(e);
  }
  return std::nullopt;
}

}  // namespace

std::string normalize_answer(std::string_view s) {
  std::string out;
  for (const auto& t : normalized_tokens(s)) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

int exact_match(std::string_view pred, std::string_view gold) {
  return normalize_answer(pred) == normalize_answer(gold) ? 1 : 0;
}

double token_f1(std::string_view pred, std::string_view gold) {
  auto p = normalized_tokens(pred);
  auto g = normalized_tokens(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::unordered_map<std::string, int> counts;
  for (const auto& t : g) ++counts[t];
  std::size_t common = 0;
  for (const auto& t : p) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  // Same as 2PR/(P+R), without the rounding of the intermediate ratios.
  return 2.0 * static_cast<double>(common) / static_cast<double>(p.size() + g.size());
}

bool answers_match(std::string_view pred_value, std::string_view gold_value) {
  auto p = parse_number(pred_value, PercentRule::kStrip);
  auto g = parse_number(gold_value, PercentRule::kStrip);
  if (p && g) {
    if (close_enough(*p, *g)) return true;
    auto g_fraction = parse_number(gold_value, PercentRule::kFraction);
    return g_fraction && close_enough(*p, *g_fraction);
  }
  return normalize_answer(pred_value) == normalize_answer(gold_value);
}

MetricResult exec_acc(std::string_view pred_derivation, std::string_view gold_value,
                      const UnifiedTable& table) {
  std::string value;
  try {
    value = execute_derivation(pred_derivation, table);
  } catch (const ParseError&) {
    return {0, "unparseable"};
  } catch (const Error& e) {
    return {0, std::string("execution error: ") + e.what()};
  }
  return {answers_match(value, gold_value) ? 1 : 0, {}};
}

MetricResult program_acc(std::string_view pred_derivation, std::string_view gold_derivation,
                         AnswerFormat gold_format) {
  if (gold_format == AnswerFormat::kDirect) {
    auto detected = detect_derivation(gold_derivation);
    if (!detected) return {0, "gold unparseable"};
    gold_format = *detected;
  }
  try {
    if (gold_format == AnswerFormat::kSql) {
      SqlQuery gold = parse_sql(gold_derivation);
      try {
        return {sql_equivalent(parse_sql(pred_derivation), gold) ? 1 : 0, {}};
      } catch (const ParseError&) {
        return {0, "unparseable"};
      }
    }
    auto gold = as_program(gold_derivation, gold_format);
    if (!gold) return {0, "gold unparseable"};
    auto pred_format = detect_derivation(pred_derivation);
    if (!pred_format || *pred_format == AnswerFormat::kSql) return {0, "unparseable"};
    auto pred = as_program(pred_derivation, *pred_format);
    if (!pred) return {0, {}};
    return {programs_equivalent(*pred, *gold, 1e-9) ? 1 : 0, {}};
  } catch (const ParseError&) {
    return {0, "gold unparseable"};
  } catch (const Error& e) {
    return {0, e.what()};
  }
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::kEm: return "em";
    case Metric::kF1: return "f1";
    case Metric::kExe: return "exe";
    case Metric::kProg: return "prog";
  }
  return "?";
}

std::vector<Metric> parse_metrics(std::string_view list) {
  std::vector<Metric> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    std::string name = to_lower(trim(list.substr(start, end - start)));
    start = end + 1;
    if (name.empty()) continue;
    std::optional<Metric> m;
    for (auto cand : {Metric::kEm, Metric::kF1, Metric::kExe, Metric::kProg}) {
      if (to_string(cand) == name) m = cand;
    }
    if (!m) throw Error("unknown metric " + name + " (valid: em, f1, exe, prog)");
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  if (out.empty()) throw Error("no metrics requested (valid: em, f1, exe, prog)");
  return out;
}

std::vector<Prediction> parse_predictions(std::string_view jsonl) {
  std::vector<Prediction> out;
  std::set<std::string> seen;
  std::size_t line_no = 0, start = 0;
  while (start <= jsonl.size()) {
    std::size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = "predictions line " + std::to_string(line_no) + ": ";
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(where + "malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object() || !j.contains("id")) throw Error(where + "missing field id");
    Prediction p;
    p.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    if (auto a = j.find("answer"); a != j.end() && !a->is_null()) {
      p.answer = a->is_string() ? a->get<std::string>() : a->dump();
    }
    if (auto d = j.find("derivation"); d != j.end() && !d->is_null()) {
      if (!d->is_string()) throw Error(where + "field derivation: expected string");
      p.derivation = d->get<std::string>();
    }
    if (!seen.insert(p.id).second) throw Error("duplicate prediction id " + p.id);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Prediction> load_predictions(const std::string& path) {
  return parse_predictions(read_file(path));
}

ExampleScore score_example(const QAExample& gold, const Prediction* pred,
                           const std::vector<Metric>& metrics) {
  ExampleScore s;
  s.id = gold.id;
  s.predicted = pred != nullptr;
  const bool has_derivation = gold.answer.format != AnswerFormat::kDirect && gold.answer.derivation;
  auto flag = [&](std::string_view metric, const std::string& why) {
    if (!why.empty()) s.flags.push_back(std::string(metric) + ": " + why);
  };
  for (Metric m : metrics) {
    switch (m) {
      case Metric::kEm: s.em = pred ? exact_match(pred->answer, gold.answer.value) : 0; break;
      case Metric::kF1: s.f1 = pred ? token_f1(pred->answer, gold.answer.value) : 0.0; break;
      case Metric::kExe:
        if (!has_derivation) break;
        if (!pred) {
          s.exe_acc = 0;
        } else if (!pred->derivation) {
          s.exe_acc = 0;
          flag("exe", "missing derivation");
        } else {
          auto r = exec_acc(*pred->derivation, gold.answer.value, gold.table);
          s.exe_acc = r.score;
          flag("exe", r.flag);
        }
        break;
      case Metric::kProg:
        if (!has_derivation) break;
        if (!pred) {
          s.prog_acc = 0;
        } else if (!pred->derivation) {
          s.prog_acc = 0;
          flag("prog", "missing derivation");
        } else {
          auto r = program_acc(*pred->derivation, *gold.answer.derivation, gold.answer.format);
          s.prog_acc = r.score;
          flag("prog", r.flag);
        }
        break;
    }
  }
  if (!pred) s.flags.push_back("missing prediction");
  return s;
}

std::map<Metric, double> recompute_aggregate(const EvalReport& report) {
  std::map<Metric, double> out;
  for (Metric m : report.metrics) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : report.per_example) {
      std::optional<double> v;
      switch (m) {
        case Metric::kEm: if (s.em) v = *s.em; break;
        case Metric::kF1: v = s.f1; break;
        case Metric::kExe: if (s.exe_acc) v = *s.exe_acc; break;
        case Metric::kProg: if (s.prog_acc) v = *s.prog_acc; break;
      }
      if (!v) continue;
      sum += *v;
      ++n;
    }
    if (n) out[m] = sum / static_cast<double>(n);
  }
  return out;
}

EvalReport evaluate(const std::vector<QAExample>& gold, const std::vector<Prediction>& preds,
                    const std::vector<Metric>& metrics, ExecPolicy policy) {
  std::unordered_map<std::string, const Prediction*> by_id;
  for (const auto& p : preds) {
    if (!by_id.emplace(p.id, &p).second) throw Error("duplicate prediction id " + p.id);
  }
  EvalReport report;
  report.metrics = metrics;
  report.per_example.resize(gold.size());
  std::vector<const Prediction*> matched(gold.size(), nullptr);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (auto it = by_id.find(gold[i].id); it != by_id.end()) matched[i] = it->second;
  }

  const long n = static_cast<long>(gold.size());
  if (policy == ExecPolicy::kSerial) {
    for (long i = 0; i < n; ++i) report.per_example[i] = score_example(gold[i], matched[i], metrics);
  } else {
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < n; ++i) report.per_example[i] = score_example(gold[i], matched[i], metrics);
  }

  std::set<std::string> gold_ids;
  for (const auto& g : gold) gold_ids.insert(g.id);
  report.counts.gold = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (matched[i]) ++report.counts.predicted;
    else ++report.counts.missing;
    if (!report.per_example[i].flags.empty() && matched[i]) ++report.counts.flagged;
  }
  for (const auto& p : preds) {
    if (!gold_ids.count(p.id)) ++report.counts.extra;
  }
  report.aggregate = recompute_aggregate(report);
  return report;
}

EvalReport evaluate_dataset(const std::string& preds_path, const std::string& gold_path,
                            const std::vector<Metric>& metrics) {
  auto gold = load_unified(gold_path);
  auto preds = load_predictions(preds_path);
  return evaluate(gold, preds, metrics);
}

Json report_to_json(const EvalReport& report, bool include_per_example) {
  Json j;
  Json metrics = Json::array();
  for (Metric m : report.metrics) metrics.push_back(std::string(to_string(m)));
  j["metrics"] = metrics;
  Json agg = Json::object();
  for (Metric m : report.metrics) {
    auto it = report.aggregate.find(m);
    agg[std::string(to_string(m))] = it == report.aggregate.end() ? Json(nullptr) : Json(it->second);
  }
  j["aggregate"] = agg;
  j["counts"] = {{"gold", report.counts.gold},       {"predicted", report.counts.predicted},
                 {"missing", report.counts.missing}, {"extra", report.counts.extra},
                 {"flagged", report.counts.flagged}};
  if (include_per_example) {
    Json rows = Json::array();
    for (const auto& s : report.per_example) {
      Json r;
      r["id"] = s.id;
      r["predicted"] = s.predicted;
      if (s.em) r["em"] = *s.em;
      if (s.f1) r["f1"] = *s.f1;
      if (s.exe_acc) r["exe_acc"] = *s.exe_acc;
      if (s.prog_acc) r["prog_acc"] = *s.prog_acc;
      if (!s.flags.empty()) r["flags"] = s.flags;
      rows.push_back(std::move(r));
    }
    j["per_example"] = std::move(rows);
  }
  return j;
}

std::string report_to_text(const EvalReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(10) << "metric" << std::right << std::setw(10) << "score" << '\n';
  for (Metric m : report.metrics) {
    out << std::left << std::setw(10) << to_string(m) << std::right << std::setw(10);
    if (auto it = report.aggregate.find(m); it != report.aggregate.end()) {
      out << std::fixed << std::setprecision(4) << it->second;
    } else {
      out << "n/a";
    }
    out << '\n';
  }
  out << std::left << std::setw(10) << "gold" << std::right << std::setw(10) << report.counts.gold << '\n'
      << std::left << std::setw(10) << "predicted" << std::right << std::setw(10) << report.counts.predicted << '\n'
      << std::left << std::setw(10) << "missing" << std::right << std::setw(10) << report.counts.missing << '\n'
      << std::left << std::setw(10) << "extra" << std::right << std::setw(10) << report.counts.extra << '\n'
      << std::left << std::setw(10) << "flagged" << std::right << std::setw(10) << report.counts.flagged << '\n';
  return out.str();
}

}  // namespace tqk
