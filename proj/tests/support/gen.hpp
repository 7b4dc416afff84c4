#pragma once

// Random relations and plans for the property suites.

#include "saber/algebra/plan.hpp"
#include "saber/algebra/rules.hpp"
#include "saber/exec/database.hpp"
#include "support/helpers.hpp"
#include <random>
#include <string>
#include <vector>

namespace saber::testing {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) {
   return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline bool coin(Rng& rng, double p = 0.5) {
   return std::bernoulli_distribution(p)(rng);
}

/// Small text alphabet with near-duplicates under the hash embedder
/// (case and the NYC alias) and a few unrelated values.
inline const std::vector<std::string> kTextAlphabet = {"apple", "Apple", "banana", "NYC", "New York City", "apple pie recipe",
                                                       "recipe for apple pie", "carburetor"};

inline Value random_text(Rng& rng) {
   return Value(kTextAlphabet[pick(rng, kTextAlphabet.size())]);
}

inline Value random_int(Rng& rng, bool nulls = true) {
   if (nulls && coin(rng, 0.1)) return Value::null();
   return Value(static_cast<std::int64_t>(pick(rng, 3) + 1));
}

/// Table with columns (text_col Text, int_col Int), qualified with name,
/// 0..max_rows rows.
inline Relation random_table(Rng& rng, const std::string& name, const std::string& text_col, const std::string& int_col,
                             std::size_t max_rows = 5) {
   std::size_t n = pick(rng, max_rows + 1);
   std::vector<Tuple> rows;
   for (std::size_t i = 0; i < n; ++i) rows.push_back({random_text(rng), random_int(rng)});
   return make_relation(name, {{text_col, ValueKind::Text}, {int_col, ValueKind::Int}}, std::move(rows));
}

/// r(a, b), s(c, d) and u(a, b); u is union-compatible with r.
inline Database random_db(Rng& rng) {
   Database db;
   db.add("r", random_table(rng, "r", "a", "b"));
   db.add("s", random_table(rng, "s", "c", "d"));
   db.add("u", random_table(rng, "u", "a", "b"));
   return db;
}

inline ExprPtr col(const char* q, const char* n) {
   return Expr::make_column(q, n);
}

inline ExprPtr lit(std::int64_t v) {
   return Expr::make_literal(Value(v));
}

inline ExprPtr text_lit(const std::string& v) {
   return Expr::make_literal(Value(v));
}

inline PlanPtr r_join_s(Rng& rng) {
   if (coin(rng)) return plan::join(plan::scan("r"), plan::scan("s"), Expr::make_compare("=", col("r", "b"), col("s", "d")));
   return plan::product(plan::scan("r"), plan::scan("s"));
}

/// A predicate over one side of r x s (or only r when right is false).
inline ExprPtr random_predicate(Rng& rng, bool right) {
   static const char* ops[] = {"=", "<>", "<", ">=", ">"};
   const char* q = right && coin(rng) ? "s" : "r";
   bool text = coin(rng);
   const char* name = text ? (q[0] == 'r' ? "a" : "c") : (q[0] == 'r' ? "b" : "d");
   ExprPtr rhs = text ? text_lit(kTextAlphabet[pick(rng, kTextAlphabet.size())]) : lit(static_cast<std::int64_t>(pick(rng, 3) + 1));
   auto e = Expr::make_compare(text ? (coin(rng) ? "=" : "<>") : ops[pick(rng, 5)], col(q, name), rhs);
   if (coin(rng, 0.2)) e = Expr::make_not(e);
   return e;
}

inline SemSpec random_sem_predicate(Rng& rng, bool right) {
   static const char* left_templates[] = {"{r.a} is related to apple", "{a} is related to apple", "{r.a} mentions banana"};
   static const char* right_templates[] = {"{s.c} is related to apple", "{c} is related to apple"};
   if (coin(rng, 0.15)) return {"the row is related to apple", ""};
   if (right && coin(rng)) return {right_templates[pick(rng, 2)], ""};
   return {left_templates[pick(rng, 3)], ""};
}

/// Plans where select_pushdown has something to push.
inline PlanPtr gen_pushdown_plan(Rng& rng) {
   PlanPtr base;
   bool binary = false;
   switch (pick(rng, 4)) {
      case 0:
      case 1:
         base = r_join_s(rng);
         binary = true;
         break;
      case 2: base = plan::sort(plan::scan("r"), {{col("r", "b"), coin(rng)}}); break;
      default: base = plan::sem_project(plan::scan("r"), {"Summarize {r.a}", ""}, "x"); break;
   }
   PlanPtr p = base;
   std::size_t filters = 1 + pick(rng, 2);
   for (std::size_t i = 0; i < filters; ++i) {
      if (coin(rng)) p = plan::select(p, random_predicate(rng, binary));
      else p = plan::sem_select(p, random_sem_predicate(rng, binary));
   }
   if (coin(rng, 0.3)) p = plan::project(p, {{col("r", "a"), ""}, {col("r", "b"), ""}});
   return p;
}

/// Plans of the form π(π(x)).
inline PlanPtr gen_projection_plan(Rng& rng) {
   PlanPtr base = coin(rng, 0.7) ? plan::scan("r") : r_join_s(rng);
   struct Named {
      ExprPtr expr;
      std::string alias;
      std::string out;
      bool numeric;
   };
   std::vector<Named> candidates = {
      {col("r", "a"), "", "a", false},
      {col("r", "b"), "", "b", true},
      {col("r", "a"), "name", "name", false},
      {Expr::make_arith("+", col("r", "b"), lit(1)), "b1", "b1", true},
      {Expr::make_arith("*", col("r", "b"), lit(2)), "b2", "b2", true},
   };
   std::vector<Named> inner;
   for (auto& c : candidates)
      if (coin(rng, 0.6)) inner.push_back(c);
   if (inner.empty()) inner.push_back(candidates[pick(rng, candidates.size())]);
   // Duplicate output names are not allowed.
   std::vector<ProjectItem> inner_items;
   std::vector<Named> visible;
   for (auto& n : inner) {
      bool dup = false;
      for (auto& v : visible) dup = dup || v.out == n.out;
      if (dup) continue;
      inner_items.push_back({n.expr, n.alias});
      visible.push_back(n);
   }
   std::vector<ProjectItem> outer;
   std::vector<std::string> used;
   std::size_t count = 1 + pick(rng, visible.size());
   for (std::size_t i = 0; i < count; ++i) {
      const auto& v = visible[pick(rng, visible.size())];
      ExprPtr ref = Expr::make_column("", v.out);
      std::string alias;
      if (v.numeric && coin(rng, 0.4)) {
         ref = Expr::make_arith(coin(rng) ? "+" : "-", ref, lit(static_cast<std::int64_t>(pick(rng, 3))));
         alias = "e" + std::to_string(i);
      } else if (coin(rng, 0.3)) {
         alias = "o" + std::to_string(i);
      }
      std::string out = alias.empty() ? v.out : alias;
      bool dup = false;
      for (auto& u : used) dup = dup || u == out;
      if (dup) continue;
      used.push_back(out);
      outer.push_back({ref, alias});
   }
   return plan::project(plan::project(base, inner_items), outer);
}

/// Plans with stacked or redundant duplicate elimination.
inline PlanPtr gen_dedup_plan(Rng& rng) {
   auto leaf = [&]() -> PlanPtr { return coin(rng) ? plan::scan("r") : plan::project(plan::scan("r"), {{col("r", "a"), ""}}); };
   switch (pick(rng, 5)) {
      case 0: return plan::dedup(plan::dedup(leaf()));
      case 1: {
         static const OpKind kinds[] = {OpKind::SetUnion, OpKind::SetDiff, OpKind::SetIntersect};
         return plan::dedup(plan::set_op(kinds[pick(rng, 3)], plan::scan("r"), plan::scan("u")));
      }
      case 2: return plan::sem_dedup(plan::sem_dedup(plan::scan("r")));
      case 3: return plan::sem_dedup(plan::sem_dedup(plan::scan("r"), ColumnName{"r", "a"}), ColumnName{"r", "a"});
      default: return plan::dedup(plan::dedup(plan::dedup(leaf())));
   }
}

/// Plans of the form TopK(TopK(x)).
inline PlanPtr gen_topk_plan(Rng& rng) {
   PlanPtr base = coin(rng) ? plan::scan("r") : plan::sort(plan::scan("r"), {{col("r", "a"), coin(rng)}});
   auto k = [&] { return static_cast<std::int64_t>(pick(rng, 7)); };
   PlanPtr p = plan::topk(plan::topk(base, k()), k());
   if (coin(rng, 0.3)) p = plan::topk(p, k());
   return p;
}

inline PlanPtr gen_plan_for_rule(const std::string& rule, Rng& rng) {
   if (rule == "select_pushdown") return gen_pushdown_plan(rng);
   if (rule == "projection_composition") return gen_projection_plan(rng);
   if (rule == "dedup_elimination") return gen_dedup_plan(rng);
   return gen_topk_plan(rng);
}

/// Random single-column relations for the set-operation laws.
inline Relation random_text_relation(Rng& rng, const std::string& name, std::size_t max_rows = 5) {
   std::size_t n = pick(rng, max_rows + 1);
   std::vector<std::string> values;
   for (std::size_t i = 0; i < n; ++i) values.push_back(kTextAlphabet[pick(rng, kTextAlphabet.size())]);
   return text_relation(name, "v", values);
}

} // namespace saber::testing
