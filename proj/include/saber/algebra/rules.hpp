#pragma once

#include "saber/algebra/plan.hpp"
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace saber {

/// A local plan transformation. apply returns the replacement for node, or
/// nullptr when the rule does not match there.
struct RewriteRule {
   std::string name;
   /// False when the rewritten plan may legally emit rows in another order.
   bool order_preserving = true;
   std::function<PlanPtr(const PlanPtr& node, const Catalog& catalog)> apply;
};

/// select_pushdown, projection_composition, dedup_elimination, topk_merge.
const std::vector<RewriteRule>& shipped_rules();
/// Throws ConfigError for an unknown name.
const RewriteRule& find_rule(std::string_view name);

/// Applies rules bottom-up until nothing changes or max_passes is reached.
/// The output schema and the semantic signature are unchanged.
PlanPtr apply_rules(const PlanPtr& plan, const Catalog& catalog, const std::vector<RewriteRule>& rules, std::size_t max_passes = 16);

/// Intersection built from a semantic projection of every row into one
/// attribute followed by a semantic join on those attributes, for backends
/// that have no native semantic intersection. Output has left's schema; a
/// left row appears once per equivalent right row.
PlanPtr compose_intersection(const PlanPtr& left, const PlanPtr& right, const Catalog& catalog, const std::string& backend = {});

inline constexpr const char* kCombinePrompt = "Combine all attributes of the row into a single description.";
inline constexpr const char* kSameEntityPrompt = "{__lkey} and {__rkey} describe the same entity";

} // namespace saber
