#include "tqk/reasoner.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <regex>

#include "tqk/derivation.hpp"
#include "tqk/error.hpp"
#include "tqk/math_expr.hpp"
#include "tqk/numeric.hpp"
#include "tqk/program.hpp"
#include "tqk/sql.hpp"

namespace tqk {

namespace {

constexpr std::string_view kTableQuestion =
    "Read the table and answer the question.";

std::string instruction(Scheme scheme) {
  std::string s(kTableQuestion);
  switch (scheme) {
    case Scheme::kDirect:
      s += " Reply with the answer only.";
      break;
    case Scheme::kCoT:
      s += " Think step by step, then finish with \"The answer is <answer>.\"";
      break;
    case Scheme::kPoT:
      s +=
          " Do not compute the answer yourself; write a program whose result is the answer.\n"
          "Program grammar: steps op(arg, arg) separated by \", \" where op is add, subtract, "
          "multiply, divide, exp or greater, and an arg is a number or #k (the result of step k, "
          "counted from 0).\n"
          "For lookups over the table you may instead write SQL: SELECT [MAX|MIN|COUNT|SUM|AVG(]"
          "column[)] WHERE column =|>|< value [AND ...].\n"
          "Reply with the program only.";
      break;
  }
  return s;
}

std::string_view cue(Scheme scheme) {
  switch (scheme) {
    case Scheme::kDirect: return "Answer:";
    case Scheme::kCoT: return "Answer: Let's think step by step.";
    case Scheme::kPoT: return "Program:";
  }
  return "Answer:";
}

std::string pot_derivation(const QAExample& shot) {
  const Answer& a = shot.answer;
  if (!a.derivation) throw Error("shot " + shot.id + " has no derivation for the PoT scheme");
  switch (a.format) {
    case AnswerFormat::kProgram:
    case AnswerFormat::kSql: return *a.derivation;
    case AnswerFormat::kMathExpr:
      try {
        return print_program(expr_to_program(parse_math_expr(*a.derivation)));
      } catch (const Error& e) {
        throw Error("shot " + shot.id + ": " + e.what());
      }
    case AnswerFormat::kDirect: break;
  }
  throw Error("shot " + shot.id + " has no derivation for the PoT scheme");
}

std::string shot_block(const QAExample& shot, const PromptSpec& spec) {
  std::string s = "Table:\n" + render(shot.table, spec.input_format);
  s += "\nQuestion: " + shot.question + "\n";
  switch (spec.scheme) {
    case Scheme::kDirect: s += "Answer: " + shot.answer.value; break;
    case Scheme::kCoT:
      s += "Answer: Let's think step by step.";
      if (shot.answer.derivation) s += " The derivation is " + *shot.answer.derivation + ".";
      s += " The answer is " + shot.answer.value + ".";
      break;
    case Scheme::kPoT: s += "Program: " + pot_derivation(shot); break;
  }
  return s;
}

std::string passages_section(const std::vector<Passage>& passages) {
  if (passages.empty()) return "";
  std::string s = "Passages:";
  for (const auto& p : passages) {
    s += "\n- ";
    if (!p.title.empty()) s += p.title + ": ";
    s += p.text;
  }
  return s;
}

std::string join_sections(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (!out.empty()) out += "\n\n";
    out += p;
  }
  return out;
}

// Rendering of the first k ranked units. All-row selections keep the table
// shape; anything else becomes one line per unit in extraction order.
std::string render_units(const QAExample& ex, const std::vector<Ranked>& units, std::size_t k,
                         InputFormat format) {
  std::vector<const RetrievalUnit*> chosen;
  for (std::size_t i = 0; i < k; ++i) chosen.push_back(&units[i].unit);
  std::sort(chosen.begin(), chosen.end(),
            [](const RetrievalUnit* a, const RetrievalUnit* b) { return a->ordinal < b->ordinal; });
  bool all_rows = std::all_of(chosen.begin(), chosen.end(),
                              [](const RetrievalUnit* u) { return u->kind == Granularity::kRow; });
  std::string s = "Relevant table content:";
  if (all_rows) {
    std::vector<std::size_t> rows;
    for (auto* u : chosen) rows.push_back(std::get<RowLoc>(u->locator).row);
    std::string body = render(ex.table.with_body_rows(rows), format);
    if (!body.empty()) s += "\n" + body;
    return s;
  }
  for (auto* u : chosen) s += "\n" + u->text;
  return s;
}

std::string strip_trailing_period(std::string s) {
  while (!s.empty() && s.back() == '.') s.pop_back();
  return std::string(trim(s));
}

bool parses_as_derivation(std::string_view text, AnswerFormat& format) {
  std::string_view t = trim(text);
  if (t.empty()) return false;
  try {
    if (t.size() >= 6 && iequals(t.substr(0, 6), "select")) {
      parse_sql(t);
      format = AnswerFormat::kSql;
    } else {
      parse_program(t);
      format = AnswerFormat::kProgram;
    }
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::kDirect: return "direct";
    case Scheme::kCoT: return "cot";
    case Scheme::kPoT: return "pot";
  }
  return "direct";
}

std::optional<Scheme> scheme_from_string(std::string_view s) {
  for (auto v : {Scheme::kDirect, Scheme::kCoT, Scheme::kPoT}) {
    if (iequals(s, to_string(v))) return v;
  }
  return std::nullopt;
}

std::string_view to_string(InputFormat f) {
  return f == InputFormat::kMarkdown ? "markdown" : "flatten";
}

std::optional<InputFormat> input_format_from_string(std::string_view s) {
  if (iequals(s, "markdown") || iequals(s, "md")) return InputFormat::kMarkdown;
  if (iequals(s, "flatten")) return InputFormat::kFlatten;
  return std::nullopt;
}

BuiltPrompt build_prompt(const QAExample& ex, const PromptSpec& spec,
                         const std::vector<Ranked>* units) {
  const Tokenizer& tok = spec.budget.tokenizer;
  const std::size_t budget = spec.budget.max_tokens;

  std::vector<std::string> blocks;
  blocks.reserve(spec.shots.size());
  for (const auto& shot : spec.shots) blocks.push_back(shot_block(shot, spec));

  const std::string instr = instruction(spec.scheme);
  const std::string passages = units ? "" : passages_section(ex.passages);
  const std::string question = "Question: " + ex.question;
  const std::string cue_line(cue(spec.scheme));

  for (std::size_t n = blocks.size() + 1; n-- > 0;) {
    std::vector<std::string> parts{instr};
    parts.insert(parts.end(), blocks.begin(), blocks.begin() + static_cast<std::ptrdiff_t>(n));
    const std::size_t table_slot = parts.size();
    parts.emplace_back();
    parts.push_back(passages);
    parts.push_back(question);
    parts.push_back(cue_line);

    // Sections are whitespace separated, so counts add up.
    std::size_t fixed = 0;
    for (const auto& p : parts) fixed += tok.count(p);
    if (fixed > budget) continue;
    const std::size_t room = budget - fixed;

    std::string table_text;
    std::size_t kept = 0;
    std::size_t available = 0;
    if (units) {
      available = units->size();
      for (std::size_t k = units->size() + 1; k-- > 0;) {
        std::string t = render_units(ex, *units, k, spec.input_format);
        if (tok.count(t) <= room) {
          table_text = std::move(t);
          kept = k;
          break;
        }
        if (k == 0) table_text.clear();
      }
      if (table_text.empty()) continue;
    } else {
      available = ex.table.body_rows();
      const std::string label = "Table:";
      if (tok.count(label) > room) continue;
      UnifiedTable cut;
      try {
        cut = truncate_rows(ex.table, TokenBudget{room - tok.count(label), tok}, spec.input_format);
      } catch (const Error&) {
        continue;
      }
      kept = cut.body_rows();
      std::string body = render(cut, spec.input_format);
      table_text = body.empty() ? label : label + "\n" + body;
    }
    if (n > 0 && available > 0 && kept == 0) continue;

    parts[table_slot] = std::move(table_text);
    BuiltPrompt out;
    out.text = join_sections(parts);
    out.tokens = tok.count(out.text);
    out.shots_used = n;
    out.body_rows_kept = kept;
    if (out.tokens > budget) {
      throw Error("prompt of " + std::to_string(out.tokens) + " tokens exceeds budget " +
                  std::to_string(budget));
    }
    return out;
  }
  throw Error("budget of " + std::to_string(budget) +
              " tokens cannot hold the prompt even with zero shots and no table rows");
}

std::string prompt_id(std::string_view prompt) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : prompt) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(kPromptTemplateId) + ":" + buf;
}

Extracted extract_answer(std::string_view raw, Scheme scheme, const std::string& cot_marker) {
  Extracted out;
  const std::string text(trim(raw));
  switch (scheme) {
    case Scheme::kDirect:
      out.answer = text;
      return out;
    case Scheme::kCoT: {
      std::regex re(cot_marker, std::regex::ECMAScript | std::regex::icase);
      std::size_t after = std::string::npos;
      for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator();
           ++it) {
        after = static_cast<std::size_t>(it->position(0) + it->length(0));
      }
      if (after != std::string::npos) {
        std::string rest(trim(std::string_view(text).substr(after)));
        if (!rest.empty() && rest.front() == ':') rest = std::string(trim(rest.substr(1)));
        auto nl = rest.find('\n');
        if (nl != std::string::npos) rest = rest.substr(0, nl);
        out.answer = strip_trailing_period(rest);
        return out;
      }
      out.fell_back = true;
      auto nl = text.rfind('\n');
      out.answer = strip_trailing_period(nl == std::string::npos ? text : text.substr(nl + 1));
      return out;
    }
    case Scheme::kPoT: {
      std::string candidate = text;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < candidate.size(); ++i) {
          AnswerFormat f{};
          std::string_view suffix = std::string_view(candidate).substr(i);
          if (parses_as_derivation(suffix, f)) {
            out.derivation = std::string(trim(suffix));
            out.derivation_format = f;
            return out;
          }
        }
        // Second try without trailing punctuation and code fences.
        while (!candidate.empty() &&
               (candidate.back() == '.' || candidate.back() == '`' || std::isspace(static_cast<unsigned char>(candidate.back())))) {
          candidate.pop_back();
        }
      }
      out.unparseable = true;
      return out;
    }
  }
  return out;
}

AskResult answer_question(const QAExample& ex, const PromptSpec& spec,
                          const std::optional<RetrieverConfig>& retriever, Completer& llm) {
  AskResult result;
  std::vector<Ranked> units;
  if (retriever) {
    try {
      units = retrieve(ex, *retriever, ex.question);
    } catch (const Error& e) {
      throw StageError("retrieve", e.what());
    }
  }

  try {
    result.prompt = build_prompt(ex, spec, retriever ? &units : nullptr).text;
  } catch (const Error& e) {
    throw StageError("prompt", e.what());
  }
  result.prompt_id = prompt_id(result.prompt);

  try {
    Completion c = llm.complete(result.prompt);
    result.raw = std::move(c.text);
    result.retries = c.retries;
  } catch (const LlmError& e) {
    throw StageError(e.kind() == LlmError::Kind::kAuth ? "auth" : "llm", e.what());
  } catch (const Error& e) {
    throw StageError("llm", e.what());
  }

  Extracted x;
  try {
    x = extract_answer(result.raw, spec.scheme, spec.cot_marker);
  } catch (const std::regex_error& e) {
    throw StageError("extract", std::string("bad answer marker: ") + e.what());
  }

  if (spec.scheme != Scheme::kPoT) {
    result.answer = Answer{AnswerFormat::kDirect, x.answer, std::nullopt};
    return result;
  }
  if (x.unparseable) {
    result.answer = Answer{AnswerFormat::kDirect, "", std::nullopt};
    result.flags.push_back("unparseable");
    return result;
  }
  result.answer.format = *x.derivation_format;
  result.answer.derivation = x.derivation;
  try {
    result.answer.value = execute_derivation(*x.derivation, ex.table, *x.derivation_format);
  } catch (const Error& e) {
    result.flags.push_back(std::string("execution error: ") + e.what());
  }
  return result;
}

}  // namespace tqk
