#include "saber/util/strings.hpp"
#include <algorithm>
#include <cctype>

namespace saber::util {

std::string to_lower(std::string_view s) {
   std::string out(s);
   std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
   return out;
}

std::string to_upper(std::string_view s) {
   std::string out(s);
   std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
   return out;
}

std::string_view trim(std::string_view s) {
   auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
   while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
   while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
   return s;
}

bool iequals(std::string_view a, std::string_view b) {
   if (a.size() != b.size()) return false;
   for (std::size_t i = 0; i < a.size(); ++i)
      if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) return false;
   return true;
}

bool icontains(std::string_view haystack, std::string_view needle) {
   return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
   return s.size() >= prefix.size() && iequals(s.substr(0, prefix.size()), prefix);
}

std::vector<std::string> split(std::string_view s, char sep) {
   std::vector<std::string> out;
   std::size_t start = 0;
   while (true) {
      auto pos = s.find(sep, start);
      if (pos == std::string_view::npos) {
         out.emplace_back(s.substr(start));
         return out;
      }
      out.emplace_back(s.substr(start, pos - start));
      start = pos + 1;
   }
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
   std::string out;
   for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) out += sep;
      out += parts[i];
   }
   return out;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
   if (from.empty()) return;
   std::size_t pos = 0;
   while ((pos = s.find(from, pos)) != std::string::npos) {
      s.replace(pos, from.size(), to);
      pos += to.size();
   }
}

std::vector<std::string> word_tokens(std::string_view s) {
   std::vector<std::string> out;
   std::string cur;
   for (unsigned char c : s) {
      if (std::isalnum(c)) {
         cur += static_cast<char>(std::tolower(c));
      } else if (!cur.empty()) {
         out.push_back(std::move(cur));
         cur.clear();
      }
   }
   if (!cur.empty()) out.push_back(std::move(cur));
   return out;
}

std::size_t display_width(std::string_view s) {
   return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](unsigned char c) { return (c & 0xC0) != 0x80; }));
}

std::string sql_quote(std::string_view s) {
   std::string out = "'";
   for (char c : s) {
      if (c == '\'') out += '\'';
      out += c;
   }
   out += '\'';
   return out;
}

} // namespace saber::util
