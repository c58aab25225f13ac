#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace harvest::text {

std::string_view trim(std::string_view s);
std::string ascii_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

// Whitespace-delimited words (the token unit used for chunk budgets).
std::vector<std::string_view> words(std::string_view s);
std::size_t word_count(std::string_view s);

// Lowercased alphanumeric runs. Bytes >= 0x80 count as word characters so
// UTF-8 letters stay inside their token; "Israel-Hamas" -> {"israel", "hamas"}.
std::vector<std::string> match_tokens(std::string_view s);

// Calls fn(std::string_view token) for each match token without allocating
// per token; `scratch` holds the lowercased copy of s.
template <typename Fn>
void for_each_match_token(std::string_view s, std::string& scratch, Fn&& fn) {
  scratch.assign(s);
  std::size_t i = 0;
  const std::size_t n = scratch.size();
  auto is_word = [](unsigned char c) {
    return c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
           (c >= 'A' && c <= 'Z');
  };
  while (i < n) {
    while (i < n && !is_word(static_cast<unsigned char>(scratch[i]))) ++i;
    const std::size_t start = i;
    while (i < n && is_word(static_cast<unsigned char>(scratch[i]))) {
      char& c = scratch[i];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      ++i;
    }
    if (i > start) fn(std::string_view(scratch).substr(start, i - start));
  }
}

// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

// Days since 1970-01-01 for a UTC epoch-seconds timestamp.
std::int64_t utc_day(std::int64_t epoch_seconds);
// "YYYY-MM-DD" for a day number.
std::string format_day(std::int64_t day);

std::uint64_t fnv1a64(std::string_view s);

}  // namespace harvest::text
