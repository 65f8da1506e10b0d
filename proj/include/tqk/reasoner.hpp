#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tqk/linearize.hpp"
#include "tqk/llm_client.hpp"
#include "tqk/retrieval.hpp"
#include "tqk/table.hpp"

namespace tqk {

// Bumped whenever the wording of any template below changes.
inline constexpr std::string_view kPromptTemplateId = "tqk-prompt-v1";

enum class Scheme { kDirect, kCoT, kPoT };
std::string_view to_string(Scheme s);
std::optional<Scheme> scheme_from_string(std::string_view s);
std::optional<InputFormat> input_format_from_string(std::string_view s);
std::string_view to_string(InputFormat f);

struct PromptSpec {
  InputFormat input_format = InputFormat::kMarkdown;
  Scheme scheme = Scheme::kDirect;
  std::vector<QAExample> shots;
  TokenBudget budget;
  // Case-insensitive ECMAScript regex; CoT answers are read after its last match.
  std::string cot_marker = "answer is";
};

struct BuiltPrompt {
  std::string text;
  std::size_t tokens = 0;
  std::size_t shots_used = 0;
  std::size_t body_rows_kept = 0;  // or units kept when retrieved units are given
};

// Sections: instruction, shots, target table (or retrieved units), passages,
// question, cue. Over budget: the target table is cut to a row prefix; while
// a shot is present at least one body row must survive, otherwise the last
// shot is dropped. Throws Error when nothing fits even with zero shots.
BuiltPrompt build_prompt(const QAExample& ex, const PromptSpec& spec,
                         const std::vector<Ranked>* units = nullptr);

// "tqk-prompt-v1:<16 hex digits of FNV-1a over the prompt>"
std::string prompt_id(std::string_view prompt);

struct Extracted {
  std::string answer;
  std::optional<std::string> derivation;
  std::optional<AnswerFormat> derivation_format;
  bool unparseable = false;
  bool fell_back = false;  // CoT marker absent, last line used
};

Extracted extract_answer(std::string_view raw, Scheme scheme,
                         const std::string& cot_marker = "answer is");

struct AskResult {
  Answer answer;
  std::string prompt;
  std::string prompt_id;
  std::string raw;
  int retries = 0;
  std::vector<std::string> flags;  // "unparseable", "execution error: ..."
};

// retrieve (optional) -> build_prompt -> complete -> extract -> execute (PoT).
// Stage failures surface as StageError with stage retrieve, prompt, llm,
// auth or extract. PoT output that cannot be parsed or executed does not
// throw; it yields an empty value and a flag.
AskResult answer_question(const QAExample& ex, const PromptSpec& spec,
                          const std::optional<RetrieverConfig>& retriever, Completer& llm);

}  // namespace tqk
