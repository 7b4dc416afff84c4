#pragma once

#include "saber/algebra/expr.hpp"
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace saber {

/// Operator inventory: the conventional list-algebra operators and their
/// semantic counterparts. Product, BagUnion and TopK deliberately have no
/// semantic variant.
enum class OpKind {
   Scan,
   Select,
   SemSelect,
   Project,
   SemProjectCol,
   Product,
   Join,
   SemJoin,
   SetDiff,
   BagDiff,
   SemSetDiff,
   SemBagDiff,
   SetUnion,
   BagUnion,
   SemSetUnion,
   SetIntersect,
   BagIntersect,
   SemSetIntersect,
   SemBagIntersect,
   Group,
   SemGroup,
   Agg,
   SemAgg,
   Dedup,
   SemDedup,
   Sort,
   SemSort,
   TopK,
};

const char* to_string(OpKind kind);
bool is_semantic(OpKind kind);
bool is_binary(OpKind kind);
bool is_set_operation(OpKind kind);
/// Number of children an operator takes.
std::size_t arity(OpKind kind);

/// Natural-language instruction plus the backend tag that should run it
/// (empty tag = engine default).
struct SemSpec {
   std::string prompt;
   std::string backend;
   friend bool operator==(const SemSpec&, const SemSpec&) = default;
};

struct ScanArgs {
   std::string table;
   std::string alias; ///< qualifier for the scanned columns; defaults to table
};
struct FilterArgs {
   ExprPtr predicate;
};
struct ProjectItem {
   ExprPtr expr;
   std::string alias; ///< empty: keep the column name of a plain reference
};
struct ProjectArgs {
   std::vector<ProjectItem> items;
};
struct SemPredicateArgs {
   SemSpec sem;
};
struct SemColumnArgs {
   SemSpec sem;
   std::string alias;
};
struct EquivArgs {
   std::string backend;
   std::optional<ColumnName> attr; ///< SemDedup only
};
struct GroupArgs {
   std::vector<ColumnName> keys;
};
struct SemGroupArgs {
   ColumnName attr;
   std::int64_t k = 1;
   std::string backend;
};

enum class AggFunc { CountStar, Count, Sum, Avg, Min, Max, Semantic };
const char* to_string(AggFunc f);

struct AggItem {
   AggFunc func = AggFunc::CountStar;
   std::optional<ColumnName> arg;
   SemSpec sem; ///< Semantic only
   std::string alias;
   /// Output column name: alias, else a name derived from the function.
   std::string output_name() const;
};
struct AggArgs {
   std::vector<ColumnName> keys;
   std::vector<AggItem> items;
};
struct SortKey {
   ExprPtr expr;
   bool descending = false;
};
struct SortArgs {
   std::vector<SortKey> keys;
};
struct SemSortArgs {
   std::optional<ColumnName> attr;
   SemSpec sem;
};
struct LimitArgs {
   std::int64_t k = 0;
};

using Payload = std::variant<std::monostate, ScanArgs, FilterArgs, ProjectArgs, SemPredicateArgs, SemColumnArgs, EquivArgs, GroupArgs,
                             SemGroupArgs, AggArgs, SortArgs, SemSortArgs, LimitArgs>;

struct PlanNode;
using PlanPtr = std::shared_ptr<const PlanNode>;

/// Immutable logical plan node. Rewrites build new trees and share unchanged
/// subtrees.
struct PlanNode {
   OpKind kind = OpKind::Scan;
   Payload payload;
   std::vector<PlanPtr> children;
   /// Indexes of the SQL semantic calls this node was built from. Not part of
   /// structural equality.
   std::vector<std::size_t> source_calls;

   template <class T>
   const T& args() const { return std::get<T>(payload); }

   const PlanPtr& child(std::size_t i = 0) const { return children.at(i); }
   /// The semantic instruction carried by this node, if any.
   const SemSpec* sem() const;
   /// Backend tag of a semantic node ("" when untagged or not semantic).
   std::string backend() const;
};

/// Structural equality (kinds, payloads, children), ignoring source_calls.
bool plans_equal(const PlanPtr& a, const PlanPtr& b);

/// Copy of node with new children.
PlanPtr with_children(const PlanNode& node, std::vector<PlanPtr> children);

namespace plan {

PlanPtr scan(std::string table, std::string alias = {});
PlanPtr select(PlanPtr child, ExprPtr predicate);
PlanPtr sem_select(PlanPtr child, SemSpec sem);
PlanPtr project(PlanPtr child, std::vector<ProjectItem> items);
PlanPtr sem_project(PlanPtr child, SemSpec sem, std::string alias);
PlanPtr product(PlanPtr left, PlanPtr right);
PlanPtr join(PlanPtr left, PlanPtr right, ExprPtr on);
PlanPtr sem_join(PlanPtr left, PlanPtr right, SemSpec sem);
/// Any of the difference/union/intersection kinds. backend applies to the
/// semantic ones only.
PlanPtr set_op(OpKind kind, PlanPtr left, PlanPtr right, std::string backend = {});
PlanPtr group(PlanPtr child, std::vector<ColumnName> keys);
PlanPtr sem_group(PlanPtr child, ColumnName attr, std::int64_t k, std::string backend = {});
/// Agg when every item is conventional, SemAgg when any item is semantic.
PlanPtr aggregate(PlanPtr child, std::vector<ColumnName> keys, std::vector<AggItem> items);
PlanPtr dedup(PlanPtr child);
PlanPtr sem_dedup(PlanPtr child, std::optional<ColumnName> attr = std::nullopt, std::string backend = {});
PlanPtr sort(PlanPtr child, std::vector<SortKey> keys);
PlanPtr sem_sort(PlanPtr child, std::optional<ColumnName> attr, SemSpec sem);
PlanPtr topk(PlanPtr child, std::int64_t k);

/// Same node, tagged with the SQL calls it came from.
PlanPtr with_sources(PlanPtr node, std::vector<std::size_t> calls);

} // namespace plan

/// Output name of the group identifier column added by SemGroup.
inline constexpr const char* kGroupIdColumn = "group_id";

using Catalog = std::map<std::string, Schema>;

/// Output schema of plan, computed bottom-up against the table catalog.
/// Throws BindingError for unknown tables or columns, union-incompatible set
/// operations and duplicate output names.
Schema derive_schema(const PlanPtr& plan, const Catalog& catalog);
/// Output schema of a single node given its input schemas. catalog is only
/// consulted by Scan.
Schema node_schema(const PlanNode& node, const std::vector<Schema>& inputs, const Catalog* catalog);

/// Stable, indented one-node-per-line rendering used by EXPLAIN.
std::string explain(const PlanPtr& plan);

/// Visits every node in pre-order.
template <class F>
void walk(const PlanPtr& p, F&& f) {
   f(*p);
   for (const auto& c : p->children) walk(c, f);
}

/// Multiset of (kind, prompt) over the prompt-bearing semantic nodes, sorted.
std::vector<std::pair<OpKind, std::string>> semantic_signature(const PlanPtr& plan);

} // namespace saber
