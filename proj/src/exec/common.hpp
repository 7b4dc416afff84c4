#pragma once

// Pieces shared by the executor and the reference evaluator.

#include "saber/algebra/plan.hpp"
#include "saber/semkernel/backend.hpp"
#include <vector>

namespace saber::exec_detail {

/// Value of one conventional aggregate over rows (SQL rules: NULLs are
/// skipped, SUM/AVG/MIN/MAX of no values is NULL).
Value conventional_aggregate(const AggItem& item, const Schema& schema, const std::vector<const Tuple*>& rows);

/// Inputs handed to backend.aggregate: the attribute's non-null values, or
/// each whole row rendered, in row order.
std::vector<std::string> aggregate_inputs(const AggItem& item, const Schema& schema, const std::vector<const Tuple*>& rows);

/// Context for SemSort: the attribute line when one is given, else the
/// template's placeholder columns (or the whole row).
std::string sort_context(const SemSortArgs& a, const Schema& schema, const Tuple& row);

/// Cosine for grouping seeds: empty texts embed to zero and count as
/// similar only to other empty texts.
double group_similarity(const Embedding& a, const Embedding& b);

/// Comparison behind Sort: true when a sorts before b on keys.
bool sort_less(const std::vector<Value>& a, const std::vector<Value>& b, const std::vector<SortKey>& keys);

} // namespace saber::exec_detail
