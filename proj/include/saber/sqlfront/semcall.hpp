#pragma once

#include "saber/algebra/expr.hpp"
#include "saber/sqlfront/lexer.hpp"
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace saber::sql {

enum class SemCallKind { Where, Select, Join, Distinct, ExceptAll, IntersectAll, GroupBy, Agg, OrderBy };

/// SQL spelling, e.g. "SEM_WHERE".
const char* to_string(SemCallKind kind);
std::optional<SemCallKind> sem_call_kind(std::string_view name);

/// Half-open byte range in the SQL text.
struct Span {
   std::size_t begin = 0;
   std::size_t end = 0;

   std::size_t size() const { return end - begin; }
   auto operator<=>(const Span&) const = default;
};

/// A table argument of SEM_JOIN.
struct TableRef {
   std::string table;
   std::string alias;
};

/// One semantic UDF invocation found in the SQL text.
struct SemCall {
   SemCallKind kind = SemCallKind::Where;
   /// "SEM_X( ... )" including the closing parenthesis.
   Span span;
   /// Raw text of each argument, trimmed, and the matching spans.
   std::vector<std::string> args;
   std::vector<Span> arg_spans;

   /// Instruction text (unescaped) and the span of its literal, quotes included.
   std::string template_text;
   std::optional<Span> template_span;
   /// Backend tag and its literal span, when given.
   std::optional<std::string> backend;
   std::optional<Span> backend_span;
   /// Where ", 'tag'" is inserted when the call has no backend argument.
   std::size_t backend_insert = 0;

   /// Output name given by "AS alias" after the call (SEM_SELECT, SEM_AGG,
   /// SEM_DISTINCT items).
   std::string alias;
   /// Attribute argument (SEM_DISTINCT, SEM_GROUP_BY, SEM_AGG, SEM_ORDER_BY).
   std::optional<ColumnName> attribute;
   /// SEM_GROUP_BY group count.
   std::int64_t k = 0;
   /// SEM_JOIN tables.
   std::vector<TableRef> tables;

   /// Index of the enclosing call in ParsedQuery::sem_calls; unset at top level.
   std::optional<std::size_t> parent;
};

/// Top-level semantic calls of sql in source order. Query arguments of
/// SEM_EXCEPT_ALL / SEM_INTERSECT_ALL / SEM_DISTINCT stay unparsed text.
/// Throws SyntaxError for unbalanced quotes or parentheses, unknown SEM_*
/// names and malformed argument lists.
std::vector<SemCall> scan_semantic_calls(std::string_view sql);

namespace detail {

/// Token-index bounds of one call: tokens[name] is the SEM_* identifier,
/// tokens[close] the matching ')'. Each argument is [first, last).
struct CallTokens {
   std::size_t name = 0;
   std::size_t close = 0;
   std::vector<std::pair<std::size_t, std::size_t>> args;
};

/// Finds the argument structure of the call whose name token is at index i.
/// Query-valued calls split only at commas that start a new query or a
/// string argument, so unparenthesized subqueries may contain commas.
CallTokens read_call(std::string_view sql, const std::vector<Token>& tokens, std::size_t i);

/// Fills the SemCall fields derivable from tokens alone (everything except
/// parent). alias is read from an "AS name" right after the call.
SemCall describe_call(std::string_view sql, const std::vector<Token>& tokens, const CallTokens& ct);

/// True when t names a SEM_* function (case-insensitive "SEM_" prefix).
bool is_sem_name(const Token& t);

} // namespace detail

} // namespace saber::sql
