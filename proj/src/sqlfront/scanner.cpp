#include "saber/sqlfront/semcall.hpp"
#include "saber/util/strings.hpp"
#include <charconv>

namespace saber::sql {

namespace {

struct KindName {
   SemCallKind kind;
   const char* name;
};

constexpr KindName kNames[] = {
   {SemCallKind::Where, "SEM_WHERE"},
   {SemCallKind::Select, "SEM_SELECT"},
   {SemCallKind::Join, "SEM_JOIN"},
   {SemCallKind::Distinct, "SEM_DISTINCT"},
   {SemCallKind::ExceptAll, "SEM_EXCEPT_ALL"},
   {SemCallKind::IntersectAll, "SEM_INTERSECT_ALL"},
   {SemCallKind::GroupBy, "SEM_GROUP_BY"},
   {SemCallKind::Agg, "SEM_AGG"},
   {SemCallKind::OrderBy, "SEM_ORDER_BY"},
};

bool query_valued(SemCallKind k) {
   return k == SemCallKind::Distinct || k == SemCallKind::ExceptAll || k == SemCallKind::IntersectAll;
}

[[noreturn]] void fail(const std::string& msg, const Token& at) {
   throw SyntaxError(msg, at.pos());
}

std::string raw(std::string_view sql, const std::vector<Token>& t, std::pair<std::size_t, std::size_t> a) {
   return std::string(util::trim(sql.substr(t[a.first].begin, t[a.second - 1].end - t[a.first].begin)));
}

bool single_string(const std::vector<Token>& t, std::pair<std::size_t, std::size_t> a) {
   return a.second - a.first == 1 && t[a.first].kind == TokenKind::String;
}

std::optional<ColumnName> dotted(const std::vector<Token>& t, std::pair<std::size_t, std::size_t> a) {
   auto n = a.second - a.first;
   if (n == 1 && t[a.first].kind == TokenKind::Ident) return ColumnName{"", t[a.first].text};
   if (n == 3 && t[a.first].kind == TokenKind::Ident && t[a.first + 1].is_symbol(".") && t[a.first + 2].kind == TokenKind::Ident)
      return ColumnName{t[a.first].text, t[a.first + 2].text};
   return std::nullopt;
}

} // namespace

const char* to_string(SemCallKind kind) {
   for (const auto& kn : kNames)
      if (kn.kind == kind) return kn.name;
   return "SEM_?";
}

std::optional<SemCallKind> sem_call_kind(std::string_view name) {
   for (const auto& kn : kNames)
      if (util::iequals(name, kn.name)) return kn.kind;
   return std::nullopt;
}

namespace detail {

bool is_sem_name(const Token& t) {
   return t.kind == TokenKind::Ident && util::starts_with_ci(t.text, "SEM_");
}

CallTokens read_call(std::string_view, const std::vector<Token>& tokens, std::size_t i) {
   const Token& name = tokens[i];
   auto kind = sem_call_kind(name.text);
   if (!kind) fail("unsupported semantic operator '" + name.text + "'", name);
   if (!tokens[i + 1].is_symbol("(")) fail(std::string(to_string(*kind)) + " must be followed by '('", tokens[i + 1]);

   CallTokens ct;
   ct.name = i;
   bool query_args = query_valued(*kind);
   std::size_t depth = 0;
   std::size_t start = i + 2;
   for (std::size_t j = i + 1; j < tokens.size(); ++j) {
      const Token& t = tokens[j];
      if (t.kind == TokenKind::End) fail("unbalanced parenthesis: " + std::string(to_string(*kind)) + " call is never closed", tokens[i + 1]);
      if (t.is_symbol("(")) {
         ++depth;
      } else if (t.is_symbol(")")) {
         if (--depth == 0) {
            if (start == j) {
               if (!ct.args.empty()) fail("empty argument", t);
            } else {
               ct.args.emplace_back(start, j);
            }
            ct.close = j;
            return ct;
         }
      } else if (t.is_symbol(",") && depth == 1) {
         bool split = true;
         if (query_args) {
            const Token& next = tokens[j + 1];
            split = next.is_word("SELECT") || next.is_symbol("(") || is_sem_name(next) ||
                    (next.kind == TokenKind::String && tokens[j + 2].is_symbol(")"));
         }
         if (split) {
            if (start == j) fail("empty argument", t);
            ct.args.emplace_back(start, j);
            start = j + 1;
         }
      }
   }
   fail("unbalanced parenthesis", tokens[i + 1]);
}

SemCall describe_call(std::string_view sql, const std::vector<Token>& t, const CallTokens& ct) {
   SemCall c;
   c.kind = *sem_call_kind(t[ct.name].text);
   c.span = {t[ct.name].begin, t[ct.close].end};
   for (const auto& a : ct.args) {
      c.args.push_back(raw(sql, t, a));
      c.arg_spans.push_back({t[a.first].begin, t[a.second - 1].end});
   }
   const std::string fname = to_string(c.kind);
   const auto& args = ct.args;
   auto arity_error = [&](const char* shape) { fail(fname + " expects " + shape, t[ct.name]); };
   auto set_template = [&](std::size_t idx) {
      if (!single_string(t, args[idx])) fail(fname + ": the instruction must be a string literal", t[args[idx].first]);
      c.template_text = t[args[idx].first].text;
      c.template_span = Span{t[args[idx].first].begin, t[args[idx].first].end};
      c.backend_insert = t[args[idx].first].end;
   };
   auto set_backend = [&](std::size_t idx) {
      if (!single_string(t, args[idx])) fail(fname + ": the backend tag must be a string literal", t[args[idx].first]);
      c.backend = t[args[idx].first].text;
      c.backend_span = Span{t[args[idx].first].begin, t[args[idx].first].end};
   };
   auto set_attribute = [&](std::size_t idx) {
      auto col = dotted(t, args[idx]);
      if (!col) fail(fname + ": expected a column name", t[args[idx].first]);
      c.attribute = col;
   };
   auto after_arg = [&](std::size_t idx) { return t[args[idx].second - 1].end; };

   switch (c.kind) {
      case SemCallKind::Where:
      case SemCallKind::Select:
         if (args.empty() || args.size() > 2) arity_error("('instruction'[, 'backend'])");
         set_template(0);
         if (args.size() == 2) set_backend(1);
         break;
      case SemCallKind::Agg:
      case SemCallKind::OrderBy: {
         if (args.empty() || args.size() > 3) arity_error("([attribute,] 'instruction'[, 'backend'])");
         std::size_t next = 0;
         if (!single_string(t, args[0])) {
            set_attribute(0);
            next = 1;
         }
         if (next >= args.size()) arity_error("([attribute,] 'instruction'[, 'backend'])");
         set_template(next);
         if (next + 1 < args.size()) set_backend(next + 1);
         if (next + 2 < args.size()) arity_error("([attribute,] 'instruction'[, 'backend'])");
         break;
      }
      case SemCallKind::Join: {
         if (args.size() < 3 || args.size() > 4) arity_error("(table [AS alias], table [AS alias], 'instruction'[, 'backend'])");
         for (std::size_t a = 0; a < 2; ++a) {
            auto [first, last] = args[a];
            if (t[first].kind != TokenKind::Ident) fail(fname + ": expected a table name", t[first]);
            TableRef ref{t[first].text, t[first].text};
            std::size_t n = last - first;
            if (n == 3 && t[first + 1].is_word("AS") && t[first + 2].kind == TokenKind::Ident) ref.alias = t[first + 2].text;
            else if (n == 2 && t[first + 1].kind == TokenKind::Ident) ref.alias = t[first + 1].text;
            else if (n != 1) fail(fname + ": expected 'table [AS alias]'", t[first]);
            c.tables.push_back(ref);
         }
         set_template(2);
         if (args.size() == 4) set_backend(3);
         break;
      }
      case SemCallKind::Distinct:
         if (args.empty() || args.size() > 2) arity_error("(attribute | query[, 'backend'])");
         if (auto col = dotted(t, args[0])) c.attribute = col;
         c.backend_insert = after_arg(0);
         if (args.size() == 2) set_backend(1);
         break;
      case SemCallKind::ExceptAll:
      case SemCallKind::IntersectAll:
         if (args.size() < 2 || args.size() > 3) arity_error("(query, query[, 'backend'])");
         c.backend_insert = after_arg(1);
         if (args.size() == 3) set_backend(2);
         break;
      case SemCallKind::GroupBy: {
         if (args.size() < 2 || args.size() > 3) arity_error("(attribute, k[, 'backend'])");
         set_attribute(0);
         const Token& k = t[args[1].first];
         std::int64_t value = 0;
         auto [p, ec] = std::from_chars(k.text.data(), k.text.data() + k.text.size(), value);
         if (args[1].second - args[1].first != 1 || k.kind != TokenKind::Number || ec != std::errc() || p != k.text.data() + k.text.size())
            fail(fname + ": k must be an integer literal", k);
         c.k = value;
         c.backend_insert = after_arg(1);
         if (args.size() == 3) set_backend(2);
         break;
      }
   }
   if (c.backend && util::trim(*c.backend).empty()) fail(fname + ": empty backend tag", t[ct.name]);

   std::size_t after = ct.close + 1;
   if (t[after].is_word("AS") && t[after + 1].kind == TokenKind::Ident) c.alias = t[after + 1].text;
   return c;
}

} // namespace detail

std::vector<SemCall> scan_semantic_calls(std::string_view sql) {
   auto tokens = tokenize(sql);
   // Global balance check first so the error points at the offending token.
   std::vector<std::size_t> open;
   for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].is_symbol("(")) open.push_back(i);
      else if (tokens[i].is_symbol(")")) {
         if (open.empty()) fail("unbalanced parenthesis: unexpected ')'", tokens[i]);
         open.pop_back();
      }
   }
   if (!open.empty()) fail("unbalanced parenthesis: '(' is never closed", tokens[open.back()]);

   std::vector<SemCall> out;
   for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!detail::is_sem_name(tokens[i]) || !tokens[i + 1].is_symbol("(")) continue;
      auto ct = detail::read_call(sql, tokens, i);
      out.push_back(detail::describe_call(sql, tokens, ct));
      i = ct.close;
   }
   return out;
}

} // namespace saber::sql
