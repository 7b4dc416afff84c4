#include "saber/algebra/rules.hpp"
#include "saber/error.hpp"
#include "saber/semkernel/prompt_template.hpp"
#include "saber/util/strings.hpp"
#include <algorithm>

namespace saber {

namespace {

enum class Side { Left, Right, Neither };

/// Which join input a set of column references binds to entirely.
Side binding_side(const std::vector<ColumnName>& refs, const Schema& left, const Schema& right) {
   if (refs.empty()) return Side::Neither;
   bool all_left = true, all_right = true;
   for (const auto& r : refs) {
      bool in_l = left.try_resolve(r.qualifier, r.name).has_value();
      bool in_r = right.try_resolve(r.qualifier, r.name).has_value();
      if (in_l && in_r) return Side::Neither; // ambiguous above the join
      all_left = all_left && in_l;
      all_right = all_right && in_r;
   }
   if (all_left) return Side::Left;
   if (all_right) return Side::Right;
   return Side::Neither;
}

/// Column references a selection depends on; nullopt when it reads the whole
/// row (a semantic predicate with no placeholders).
std::optional<std::vector<ColumnName>> selection_refs(const PlanNode& n) {
   if (n.kind == OpKind::Select) {
      return referenced_columns(*n.args<FilterArgs>().predicate);
   }
   std::vector<ColumnName> out;
   for (const auto& ph : extract_placeholders(n.sem()->prompt)) out.push_back(ph.column);
   if (out.empty()) return std::nullopt;
   return out;
}

bool has_positional_refs(const Expr& e) {
   if (e.kind == Expr::Kind::Column && e.column_index) return true;
   return std::any_of(e.args.begin(), e.args.end(), [](const ExprPtr& a) { return has_positional_refs(*a); });
}

PlanPtr select_pushdown(const PlanPtr& node, const Catalog& catalog) {
   if (node->kind != OpKind::Select && node->kind != OpKind::SemSelect) return nullptr;
   if (node->kind == OpKind::Select && has_positional_refs(*node->args<FilterArgs>().predicate)) return nullptr;
   const PlanPtr& child = node->child();
   auto refs = selection_refs(*node);
   if (!refs) return nullptr;
   auto with_input = [&](PlanPtr input) { return with_children(*node, {std::move(input)}); };

   switch (child->kind) {
      case OpKind::Join:
      case OpKind::Product:
      case OpKind::SemJoin: {
         auto ls = derive_schema(child->child(0), catalog);
         auto rs = derive_schema(child->child(1), catalog);
         switch (binding_side(*refs, ls, rs)) {
            case Side::Left: return with_children(*child, {with_input(child->child(0)), child->child(1)});
            case Side::Right: return with_children(*child, {child->child(0), with_input(child->child(1))});
            case Side::Neither: return nullptr;
         }
         return nullptr;
      }
      case OpKind::Sort:
      case OpKind::SemSort: return with_children(*child, {with_input(child->child())});
      case OpKind::SemProjectCol: {
         auto below = derive_schema(child->child(), catalog);
         for (const auto& r : *refs)
            if (!below.try_resolve(r.qualifier, r.name)) return nullptr;
         return with_children(*child, {with_input(child->child())});
      }
      default: return nullptr;
   }
}

ExprPtr substitute_columns(const ExprPtr& e, const Schema& inner_schema, const std::vector<ProjectItem>& inner_items) {
   if (e->kind == Expr::Kind::Column) {
      auto idx = e->column_index ? *e->column_index : e->column.resolve(inner_schema);
      return inner_items.at(idx).expr;
   }
   if (e->args.empty()) return e;
   auto copy = std::make_shared<Expr>(*e);
   for (auto& a : copy->args) a = substitute_columns(a, inner_schema, inner_items);
   return copy;
}

PlanPtr projection_composition(const PlanPtr& node, const Catalog& catalog) {
   if (node->kind != OpKind::Project || node->child()->kind != OpKind::Project) return nullptr;
   const auto& inner = node->child();
   const auto& inner_items = inner->args<ProjectArgs>().items;
   auto inner_schema = derive_schema(inner, catalog);
   std::vector<ProjectItem> items;
   for (const auto& item : node->args<ProjectArgs>().items) {
      if (item.expr->kind == Expr::Kind::Column && item.alias.empty()) {
         auto idx = item.expr->column_index ? *item.expr->column_index : item.expr->column.resolve(inner_schema);
         items.push_back(inner_items.at(idx));
         continue;
      }
      std::string alias = item.alias.empty() ? to_sql(*item.expr) : item.alias;
      items.push_back({substitute_columns(item.expr, inner_schema, inner_items), alias});
   }
   return plan::project(inner->child(), std::move(items));
}

bool set_variant(OpKind k) {
   return k == OpKind::SetUnion || k == OpKind::SetDiff || k == OpKind::SetIntersect;
}

PlanPtr dedup_elimination(const PlanPtr& node, const Catalog&) {
   const auto& child = node->children.empty() ? nullptr : node->child();
   if (node->kind == OpKind::Dedup && (child->kind == OpKind::Dedup || set_variant(child->kind))) return child;
   if (node->kind == OpKind::SemDedup && child->kind == OpKind::SemDedup) {
      const auto& a = node->args<EquivArgs>();
      const auto& b = child->args<EquivArgs>();
      if (a.attr == b.attr && a.backend == b.backend) return child;
   }
   return nullptr;
}

PlanPtr topk_merge(const PlanPtr& node, const Catalog&) {
   if (node->kind != OpKind::TopK || node->child()->kind != OpKind::TopK) return nullptr;
   auto k = std::min(node->args<LimitArgs>().k, node->child()->args<LimitArgs>().k);
   return plan::topk(node->child()->child(), k);
}

PlanPtr rewrite_once(const PlanPtr& p, const Catalog& catalog, const std::vector<RewriteRule>& rules, bool& changed) {
   std::vector<PlanPtr> kids;
   bool kid_changed = false;
   for (const auto& c : p->children) {
      kids.push_back(rewrite_once(c, catalog, rules, kid_changed));
   }
   PlanPtr node = kid_changed ? with_children(*p, kids) : p;
   changed = changed || kid_changed;
   for (const auto& r : rules) {
      if (auto out = r.apply(node, catalog)) {
         changed = true;
         return out;
      }
   }
   return node;
}

} // namespace

const std::vector<RewriteRule>& shipped_rules() {
   static const std::vector<RewriteRule> rules = {
      {"select_pushdown", true, select_pushdown},
      {"projection_composition", true, projection_composition},
      {"dedup_elimination", true, dedup_elimination},
      {"topk_merge", true, topk_merge},
   };
   return rules;
}

const RewriteRule& find_rule(std::string_view name) {
   for (const auto& r : shipped_rules())
      if (util::iequals(r.name, name)) return r;
   throw ConfigError("unknown rewrite rule '" + std::string(name) + "'");
}

PlanPtr apply_rules(const PlanPtr& plan, const Catalog& catalog, const std::vector<RewriteRule>& rules, std::size_t max_passes) {
   PlanPtr p = plan;
   for (std::size_t pass = 0; pass < max_passes; ++pass) {
      bool changed = false;
      p = rewrite_once(p, catalog, rules, changed);
      if (!changed) break;
   }
   return p;
}

PlanPtr compose_intersection(const PlanPtr& left, const PlanPtr& right, const Catalog& catalog, const std::string& backend) {
   auto ls = derive_schema(left, catalog);
   auto rs = derive_schema(right, catalog);
   if (!check_union_compatible(ls, rs)) throw BindingError("intersection inputs are not union-compatible");
   SemSpec combine{kCombinePrompt, backend};
   auto lkey = plan::sem_project(left, combine, "__lkey");
   auto rkey = plan::project(plan::sem_project(right, combine, "__rkey"), {{Expr::make_column_at(rs.arity(), {"", "__rkey"}), ""}});
   auto joined = plan::sem_join(lkey, rkey, {kSameEntityPrompt, backend});
   std::vector<ProjectItem> items;
   for (std::size_t i = 0; i < ls.arity(); ++i) items.push_back({Expr::make_column_at(i, {ls[i].qualifier, ls[i].name}), ""});
   return plan::project(joined, std::move(items));
}

} // namespace saber
