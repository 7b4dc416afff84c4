#pragma once

#include "saber/algebra/plan.hpp"
#include "saber/sqlfront/parser.hpp"
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace saber {

/// Semantic operator families used by the capability matrix.
enum class SemOp { Select, Project, Join, Group, Aggregate, Dedup, Sort, Difference, Intersection };
const char* to_string(SemOp op); // "σ^sem", ...
const char* sem_op_name(SemOp op); // "selection", ...

enum class Support { None, Partial, Full };

enum class PlaceholderStyle {
   Brace,         ///< {alias.column}
   InputMustache, ///< {{ input.alias.column }}
   Plain,         ///< column name inline, no placeholder syntax
};

/// A backend dialect the rewriter can emit.
struct RewriteTarget {
   std::string name;
   PlaceholderStyle style = PlaceholderStyle::Brace;
   /// Appended to predicate instructions that do not already ask for it.
   std::string predicate_framing;
   /// Prefixed to instructions without placeholders ("" = none).
   std::string row_context_block;
   std::map<SemOp, Support> capabilities;

   Support support(SemOp op) const;
};

/// lotus, docetl, palimpzest.
const std::vector<RewriteTarget>& rewrite_targets();
/// Throws ConfigError for an unknown name.
const RewriteTarget& rewrite_target(std::string_view name);

/// Tag given to calls the engine runs itself because the target cannot.
inline constexpr const char* kNativeBackendTag = "saber";

/// Hand-written per-target phrasings for known backend-free instructions.
struct PromptCatalog {
   struct Entry {
      std::string kind; ///< SEM_WHERE, SEM_SELECT, ...
      std::string template_text;
      /// (target name, phrasing) in file order.
      std::vector<std::pair<std::string, std::string>> targets;
   };
   std::string version;
   std::vector<Entry> entries;

   static const PromptCatalog& builtin();
   static PromptCatalog from_json(const std::string& text);
   std::string to_json() const;
   const std::string* find(std::string_view kind, std::string_view template_text, std::string_view target) const;
};

struct Fallback {
   SemOp op;
   std::string strategy;
};

struct RewriteOutcome {
   std::string sql;
   std::vector<Fallback> fallbacks;
   /// Operators left without a fallback; empty when the rewrite succeeded.
   std::vector<SemOp> unsupported;
};

/// Rewrites every placeholder of tmpl into style. Throws BindingError naming
/// the first placeholder that bound cannot resolve.
std::string render_placeholders(std::string_view tmpl, PlaceholderStyle style, const Schema& bound);

/// Backend-specific SQL for query. Each call's instruction is re-phrased
/// (catalog entry, else placeholder re-rendering plus framing) and its tag
/// set to the target; calls the target cannot run are tagged
/// kNativeBackendTag or, for intersection with π^sem and ⋈^sem available,
/// lowered at execution time. Only instruction and tag literals change;
/// every other byte of the source is kept. catalog (optional) enables
/// placeholder binding checks.
RewriteOutcome rewrite_for_backend(const sql::ParsedQuery& query, const RewriteTarget& target, const Catalog* catalog = nullptr,
                                   const PromptCatalog& prompts = PromptCatalog::builtin());

/// Replaces semantic intersections tagged with a target that lacks native
/// intersection but has π^sem and ⋈^sem by compose_intersection (SemDedup on
/// top for the set variant).
PlanPtr lower_intersections(const PlanPtr& plan, const Catalog& catalog);

} // namespace saber
