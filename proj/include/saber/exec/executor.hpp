#pragma once

#include "saber/algebra/plan.hpp"
#include "saber/exec/database.hpp"
#include "saber/semkernel/backend.hpp"
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace saber {

/// Picks the backend for a node's tag ("" = default).
using BackendResolver = std::function<SemanticBackend&(std::string_view tag)>;

BackendResolver resolver_for(const BackendRegistry& registry);
/// Every tag goes to backend.
BackendResolver resolver_for(SemanticBackend& backend);

struct NodeStats {
   std::size_t id = 0; ///< pre-order index in the plan
   std::size_t depth = 0;
   OpKind kind = OpKind::Scan;
   std::size_t rows_out = 0;
   std::size_t semantic_calls = 0;
   /// Time spent in this node, children excluded.
   double wall_ms = 0;
};

struct ExecReport {
   Relation result;
   /// Pre-order, one entry per plan node.
   std::vector<NodeStats> nodes;
   std::size_t total_calls = 0;
   double wall_ms = 0;

   /// {"columns": [...], "rows": [...], "nodes": [...], "total_calls", "wall_ms"}
   std::string to_json() const;
};

/// Evaluates plan over db. Semantic operators call the backend chosen by
/// their tag; per-row calls inside one operator may run concurrently up to
/// the backend's max_concurrency(), with results identical to in-order
/// evaluation. Throws BindingError on schema problems and BackendError
/// (message prefixed with the failing node) on backend failures.
ExecReport eval(const PlanPtr& plan, const Database& db, const BackendResolver& backends);

/// Reference evaluator following each operator definition literally: set
/// variants are composed from their bag and dedup parts, grouping and
/// matching use plain nested loops. Sequential, no stats. Throws
/// BindingError when db holds more than kOracleRowCap rows in total.
Relation eval_oracle(const PlanPtr& plan, const Database& db, const BackendResolver& backends);
inline constexpr std::size_t kOracleRowCap = 64;

/// {"columns": [{"name", "kind"}], "rows": [[...]]}; numbers stay numbers.
std::string relation_to_json(const Relation& r);

} // namespace saber
