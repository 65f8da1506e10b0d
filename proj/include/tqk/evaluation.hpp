#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tqk/exec_policy.hpp"
#include "tqk/ingest.hpp"
#include "tqk/table.hpp"

namespace tqk {

// Lowercase, numeric tokens canonicalized ("$1,200.0" -> "1200"; "$", ","
// and "%" stripped), punctuation removed, articles a/an/the dropped,
// whitespace collapsed.
std::string normalize_answer(std::string_view s);

int exact_match(std::string_view pred, std::string_view gold);
// Multiset token overlap F1 over normalized tokens. Both empty -> 1,
// exactly one empty -> 0.
double token_f1(std::string_view pred, std::string_view gold);

// Numeric when both sides parse (|p - g| <= 1e-4 * max(1, |g|), with the
// gold read with "%" either stripped or as a fraction); otherwise
// normalized string equality.
bool answers_match(std::string_view pred_value, std::string_view gold_value);

// A 0/1 score plus a flag saying why a prediction could not be scored
// normally ("unparseable", "execution error: ...").
struct MetricResult {
  int score = 0;
  std::string flag;
};

MetricResult exec_acc(std::string_view pred_derivation, std::string_view gold_value,
                      const UnifiedTable& table);
// Strict structural equality of canonical forms (no commutative matching).
// gold_format pins the grammar; kDirect means detect from the gold text.
MetricResult program_acc(std::string_view pred_derivation, std::string_view gold_derivation,
                         AnswerFormat gold_format = AnswerFormat::kDirect);

enum class Metric { kEm, kF1, kExe, kProg };
std::string_view to_string(Metric m);
// "em,f1,exe,prog"; throws Error listing the valid names.
std::vector<Metric> parse_metrics(std::string_view list);

struct Prediction {
  std::string id;
  std::string answer;
  std::optional<std::string> derivation;
};

// JSONL {id, answer, derivation?}; throws Error on duplicate ids.
std::vector<Prediction> parse_predictions(std::string_view jsonl);
std::vector<Prediction> load_predictions(const std::string& path);

struct ExampleScore {
  std::string id;
  bool predicted = false;
  std::optional<int> em;
  std::optional<double> f1;
  std::optional<int> exe_acc;   // defined when the gold carries a derivation
  std::optional<int> prog_acc;  // defined when the gold carries a derivation
  std::vector<std::string> flags;
};

struct EvalCounts {
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t missing = 0;
  std::size_t extra = 0;  // predictions whose id is not in the gold set
  std::size_t flagged = 0;
};

struct EvalReport {
  std::vector<Metric> metrics;
  std::vector<ExampleScore> per_example;  // gold order
  std::map<Metric, double> aggregate;     // mean over examples where defined
  EvalCounts counts;
};

// Scores one gold example against an optional prediction.
ExampleScore score_example(const QAExample& gold, const Prediction* pred,
                           const std::vector<Metric>& metrics);

// Joins predictions to gold by id; missing predictions score 0 on every
// requested metric. The parallel path must agree exactly with the serial one.
EvalReport evaluate(const std::vector<QAExample>& gold, const std::vector<Prediction>& preds,
                    const std::vector<Metric>& metrics, ExecPolicy policy = ExecPolicy::kParallel);
EvalReport evaluate_dataset(const std::string& preds_path, const std::string& gold_path,
                            const std::vector<Metric>& metrics);

// Means recomputed from per_example rows.
std::map<Metric, double> recompute_aggregate(const EvalReport& report);

Json report_to_json(const EvalReport& report, bool include_per_example = true);
// Aligned plain-text table of the aggregates and counts.
std::string report_to_text(const EvalReport& report);

}  // namespace tqk
