#include "tqk/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>

namespace tqk {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Accepts "1234" or properly grouped "1,234,567"; returns digits only.
std::optional<std::string> strip_grouping(std::string_view integer_part) {
  if (integer_part.find(',') == std::string_view::npos) return std::string(integer_part);
  std::string digits;
  std::size_t group = 0;
  bool first_group = true;
  for (char c : integer_part) {
    if (c == ',') {
      if (group == 0 || (first_group && group > 3) || (!first_group && group != 3)) {
        return std::nullopt;
      }
      first_group = false;
      group = 0;
      continue;
    }
    digits.push_back(c);
    ++group;
  }
  if (group != 3) return std::nullopt;
  return digits;
}

}  // namespace

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::optional<double> parse_number(std::string_view text, PercentRule percent) {
  std::string_view s = trim(text);
  bool negative = false;
  bool dollar = false;
  // Sign and currency may appear in either order: "-$5", "$-5".
  for (int i = 0; i < 2 && !s.empty(); ++i) {
    if (!dollar && s.front() == '$') {
      dollar = true;
      s.remove_prefix(1);
    } else if (s.front() == '-' || s.front() == '+') {
      if (i == 1 && !dollar) break;
      negative = s.front() == '-';
      s.remove_prefix(1);
    }
  }
  bool is_percent = false;
  if (!s.empty() && s.back() == '%') {
    is_percent = true;
    s.remove_suffix(1);
  }
  if (s.empty() || !(is_digit(s.front()) || s.front() == '.')) return std::nullopt;

  std::size_t int_end = s.find_first_not_of("0123456789,");
  std::string_view int_part = s.substr(0, int_end);
  std::string_view rest = int_end == std::string_view::npos ? std::string_view{} : s.substr(int_end);
  auto digits = strip_grouping(int_part);
  if (!digits) return std::nullopt;
  std::string number = *digits;
  number.append(rest);
  if (number.empty() || number == ".") return std::nullopt;
  if (!std::all_of(number.begin(), number.end(), [](char c) {
        return is_digit(c) || c == '.' || c == 'e' || c == 'E' || c == '-' || c == '+';
      })) {
    return std::nullopt;
  }

  double value = 0.0;
  const char* begin = number.data();
  const char* end = begin + number.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  if (negative) value = -value;
  if (is_percent && percent == PercentRule::kFraction) value /= 100.0;
  return value;
}

std::string format_number(double value) {
  if (std::isfinite(value) && std::trunc(value) == value && std::fabs(value) < 1e15) {
    long long whole = static_cast<long long>(value);
    return std::to_string(whole);
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

}  // namespace tqk
