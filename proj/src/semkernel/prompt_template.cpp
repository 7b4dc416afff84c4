#include "saber/semkernel/prompt_template.hpp"
#include "saber/error.hpp"
#include <algorithm>
#include <cctype>

namespace saber {

namespace {

bool ident_start(char c) {
   return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
   return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

/// Parses "a" or "a.b" exactly; nullopt otherwise.
std::optional<ColumnName> parse_dotted(std::string_view s) {
   std::vector<std::string> parts;
   std::string cur;
   for (char c : s) {
      if (c == '.') {
         parts.push_back(cur);
         cur.clear();
      } else {
         cur += c;
      }
   }
   parts.push_back(cur);
   if (parts.size() > 2) return std::nullopt;
   for (const auto& p : parts) {
      if (p.empty() || !ident_start(p[0])) return std::nullopt;
      if (!std::all_of(p.begin(), p.end(), ident_char)) return std::nullopt;
   }
   if (parts.size() == 1) return ColumnName{"", parts[0]};
   return ColumnName{parts[0], parts[1]};
}

std::string_view trim_spaces(std::string_view s) {
   while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
   while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
   return s;
}

} // namespace

std::vector<Placeholder> extract_placeholders(std::string_view prompt) {
   std::vector<Placeholder> out;
   std::size_t i = 0;
   while (i < prompt.size()) {
      if (prompt[i] != '{') {
         ++i;
         continue;
      }
      if (i + 1 < prompt.size() && prompt[i + 1] == '{') {
         auto close = prompt.find("}}", i + 2);
         if (close != std::string_view::npos) {
            auto inner = trim_spaces(prompt.substr(i + 2, close - i - 2));
            if (inner.substr(0, 6) == "input.") {
               if (auto col = parse_dotted(inner.substr(6))) {
                  out.push_back({i, close + 2, *col, Placeholder::Style::InputMustache});
                  i = close + 2;
                  continue;
               }
            }
         }
         i += 2;
         continue;
      }
      auto close = prompt.find('}', i + 1);
      if (close == std::string_view::npos) break;
      if (auto col = parse_dotted(prompt.substr(i + 1, close - i - 1))) {
         out.push_back({i, close + 1, *col, Placeholder::Style::Brace});
         i = close + 1;
         continue;
      }
      ++i;
   }
   return out;
}

std::string strip_placeholders(std::string_view prompt) {
   std::string out;
   std::size_t pos = 0;
   for (const auto& ph : extract_placeholders(prompt)) {
      out.append(prompt.substr(pos, ph.begin - pos));
      pos = ph.end;
   }
   out.append(prompt.substr(pos));
   return out;
}

std::vector<std::size_t> placeholder_columns(std::string_view prompt, const Schema& schema) {
   std::vector<std::size_t> cols;
   for (const auto& ph : extract_placeholders(prompt)) {
      auto idx = schema.try_resolve(ph.column.qualifier, ph.column.name);
      if (!idx) throw BindingError("placeholder {" + ph.column.to_string() + "} does not match any input column");
      cols.push_back(*idx);
   }
   std::sort(cols.begin(), cols.end());
   cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
   return cols;
}

std::string prompt_context(std::string_view prompt, const Schema& schema, const Tuple& row) {
   auto cols = placeholder_columns(prompt, schema);
   if (cols.empty()) return render_row(schema, row);
   return render_row(schema, row, cols);
}

} // namespace saber
