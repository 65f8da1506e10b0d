#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace tqk {

enum class PercentRule {
  kFraction,  // "x%" reads as x/100
  kStrip,     // "x%" reads as x
};

// Parses a numeric literal the way cell values and math expressions are
// read: surrounding whitespace ignored, "$" and thousands commas stripped,
// a trailing "%" handled per `percent`. Returns nullopt for anything else.
std::optional<double> parse_number(std::string_view text,
                                   PercentRule percent = PercentRule::kFraction);

// Shortest text that round-trips `value`; integral values print without a
// fractional part ("41", not "41.0").
std::string format_number(double value);

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

}  // namespace tqk
