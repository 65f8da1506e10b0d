#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "tqk/table.hpp"

namespace tqk {

// Which grammar a derivation string parses under. Programs are tried
// first, then SQL (text starting with SELECT), then math expressions.
std::optional<AnswerFormat> detect_derivation(std::string_view text);

// Runs a derivation and returns its answer text. `format` pins the
// grammar; kDirect means detect. Throws ParseError / ExecError.
std::string execute_derivation(std::string_view text, const UnifiedTable& table,
                               AnswerFormat format = AnswerFormat::kDirect);

// Canonical printed form under the given (or detected) grammar.
std::string canonicalize_derivation(std::string_view text,
                                    AnswerFormat format = AnswerFormat::kDirect);

}  // namespace tqk
