#pragma once

#include "saber/algebra/plan.hpp"
#include "saber/sqlfront/semcall.hpp"
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace saber::sql {

struct ParsedQuery {
   PlanPtr plan;
   /// Every semantic call, nested ones included, in source (pre-)order.
   /// PlanNode::source_calls index into this list.
   std::vector<SemCall> sem_calls;
   std::string source;
};

/// Parses SQL into a logical plan.
///
/// One SELECT is planned as
///   From -> WHERE conjuncts (left to right) -> SEM_SELECT columns ->
///   grouping -> Project -> DISTINCT -> ORDER BY -> LIMIT
/// with ORDER BY moved below the projection when its keys are not output
/// columns. catalog is only needed to expand "*" next to other select items.
/// Throws SyntaxError (grammar and placement) or BindingError.
ParsedQuery parse_query(std::string_view sql, const Catalog* catalog = nullptr);

/// Replaces each top-level semantic call with a reference to its
/// materialized table t:
///   SEM_WHERE -> t.keep, SEM_SELECT / SEM_DISTINCT(attr) -> t.value,
///   SEM_AGG -> MAX(t.value), SEM_ORDER_BY -> t.score DESC,
///   SEM_GROUP_BY -> t.group_id, SEM_JOIN -> t,
///   query-valued calls -> SELECT * FROM t.
/// Bytes outside the call spans are copied unchanged. Throws BindingError
/// when a call has no binding.
std::string substitute_materialized(std::string_view sql, const std::map<Span, std::string>& bindings);

/// SQL text for a conventional plan of the shape parse_query produces.
/// Throws BindingError for semantic operators or shapes with no SQL form.
std::string unparse(const PlanPtr& plan);

} // namespace saber::sql
