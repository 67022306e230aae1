#include "tsync/units.hpp"

#include <array>
#include <cctype>
#include <limits>
#include <utility>

#include "tsync/error.hpp"

namespace tsync {

namespace {

constexpr std::array<std::pair<std::string_view, Nanos>, 4> kUnits{{
    {"ns", kNanosecond},
    {"us", kMicrosecond},
    {"ms", kMillisecond},
    {"s", kSecond},
}};

[[noreturn]] void reject(std::string_view text, const char* why) {
  throw DomainError("invalid duration '" + std::string(text) + "': " + why);
}

}  // namespace

Nanos parse_duration(std::string_view text) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
    negative = text[pos] == '-';
    ++pos;
  }
  std::string_view whole_digits;
  std::string_view frac_digits;
  const std::size_t whole_begin = pos;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
  whole_digits = text.substr(whole_begin, pos - whole_begin);
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    const std::size_t frac_begin = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    frac_digits = text.substr(frac_begin, pos - frac_begin);
    if (frac_digits.empty()) reject(text, "missing digits after '.'");
  }
  if (whole_digits.empty() && frac_digits.empty()) reject(text, "missing number");

  const std::string_view unit = text.substr(pos);
  if (unit.empty()) reject(text, "missing unit (use ns, us, ms or s)");
  Nanos scale = 0;
  for (const auto& [name, factor] : kUnits) {
    if (unit == name) scale = factor;
  }
  if (scale == 0) reject(text, "unknown unit (use ns, us, ms or s)");

  // Exact decimal: value = (whole * 10^k + frac) * scale / 10^k.
  __int128 mantissa = 0;
  __int128 divisor = 1;
  for (char c : whole_digits) {
    mantissa = mantissa * 10 + (c - '0');
    if (mantissa > std::numeric_limits<std::int64_t>::max()) reject(text, "out of range");
  }
  for (char c : frac_digits) {
    mantissa = mantissa * 10 + (c - '0');
    divisor *= 10;
    if (divisor > __int128{1} << 80) reject(text, "too many fractional digits");
  }
  const __int128 scaled = mantissa * scale;
  if (scaled % divisor != 0) reject(text, "not a whole number of nanoseconds");
  const __int128 value = scaled / divisor;
  if (value > std::numeric_limits<std::int64_t>::max()) reject(text, "out of range");
  return static_cast<Nanos>(negative ? -value : value);
}

std::string format_duration(Nanos value) {
  if (value == 0) return "0ns";
  for (auto it = kUnits.rbegin(); it != kUnits.rend(); ++it) {
    if (value % it->second == 0) {
      return std::to_string(value / it->second) + std::string(it->first);
    }
  }
  return std::to_string(value) + "ns";
}

}  // namespace tsync
