#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace saber::util {

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
std::string_view trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);
bool starts_with_ci(std::string_view s, std::string_view prefix);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
void replace_all(std::string& s, std::string_view from, std::string_view to);

/// Lower-cased runs of ASCII letters and digits; every other byte separates.
std::vector<std::string> word_tokens(std::string_view s);

/// Number of UTF-8 code points (continuation bytes are not counted).
std::size_t display_width(std::string_view s);

/// Quotes s as a SQL string literal, doubling embedded single quotes.
std::string sql_quote(std::string_view s);

} // namespace saber::util
