#include "doctest.h"
#include "saber/algebra/rules.hpp"
#include "saber/error.hpp"
#include "saber/sqlfront/parser.hpp"
#include "support/gen.hpp"

using namespace saber;
using namespace saber::testing;

namespace {

Catalog movie_catalog() {
   return movie_db().catalog();
}

PlanPtr movie_join() {
   return plan::join(plan::scan("movies", "m"), plan::scan("directors", "d"),
                     Expr::make_compare("=", col("m", "nmconst"), col("d", "nmconst")));
}

} // namespace

TEST_SUITE("algebra") {
   TEST_CASE("operator arity and inventory") {
      CHECK(arity(OpKind::Scan) == 0);
      for (auto k : {OpKind::Product, OpKind::Join, OpKind::SemJoin, OpKind::SetDiff, OpKind::BagDiff, OpKind::SemSetDiff, OpKind::SemBagDiff,
                     OpKind::SetUnion, OpKind::BagUnion, OpKind::SemSetUnion, OpKind::SetIntersect, OpKind::BagIntersect,
                     OpKind::SemSetIntersect, OpKind::SemBagIntersect})
         CHECK(arity(k) == 2);
      for (auto k : {OpKind::Select, OpKind::SemSelect, OpKind::Project, OpKind::SemProjectCol, OpKind::Group, OpKind::SemGroup, OpKind::Agg,
                     OpKind::SemAgg, OpKind::Dedup, OpKind::SemDedup, OpKind::Sort, OpKind::SemSort, OpKind::TopK})
         CHECK(arity(k) == 1);
      CHECK_FALSE(is_semantic(OpKind::Product));
      CHECK_FALSE(is_semantic(OpKind::BagUnion));
      CHECK_FALSE(is_semantic(OpKind::TopK));
      CHECK(is_semantic(OpKind::SemSetUnion));
   }

   TEST_CASE("join schema is the qualified concatenation") {
      auto s = derive_schema(movie_join(), movie_catalog());
      REQUIRE(s.arity() == 9);
      CHECK(s[0].qualified_name() == "m.tconst");
      CHECK(s[5].qualified_name() == "m.nmconst");
      CHECK(s[6].qualified_name() == "d.nmconst");
      CHECK(s[8].qualified_name() == "d.biography");
   }

   TEST_CASE("semantic column appends a Text column") {
      auto p = plan::sem_project(movie_join(), {"Summarize biography", ""}, "director_summary");
      auto s = derive_schema(p, movie_catalog());
      REQUIRE(s.arity() == 10);
      CHECK(s[9].name == "director_summary");
      CHECK(s[9].kind == ValueKind::Text);
   }

   TEST_CASE("set operations require union compatibility") {
      Catalog c{{"x", Schema({{"x", ValueKind::Int, "x"}})}, {"y", Schema({{"y", ValueKind::Text, "y"}})}};
      CHECK_THROWS_AS(derive_schema(plan::set_op(OpKind::SetDiff, plan::scan("x"), plan::scan("y")), c), BindingError);
      CHECK_THROWS_AS(derive_schema(plan::set_op(OpKind::SemBagIntersect, plan::scan("x"), plan::scan("y")), c), BindingError);
      CHECK_THROWS_AS(derive_schema(plan::scan("nope"), c), BindingError);
   }

   TEST_CASE("group id column and aggregate schemas") {
      auto p = plan::sem_group(plan::scan("movies"), ColumnName{"", "plot"}, 3);
      auto s = derive_schema(p, movie_catalog());
      CHECK(s[s.arity() - 1].name == kGroupIdColumn);
      CHECK(s[s.arity() - 1].kind == ValueKind::Int);
      auto a = plan::aggregate(plan::scan("movies"), {}, {{AggFunc::Semantic, ColumnName{"", "plot"}, {"summarize", ""}, "s", }});
      CHECK(a->kind == OpKind::SemAgg);
      CHECK(derive_schema(a, movie_catalog())[0].kind == ValueKind::Text);
   }

   TEST_CASE("semantic selection over left columns is pushed below the join") {
      auto p = plan::sem_select(movie_join(), {"{d.biography} mentions hardship", ""});
      auto out = apply_rules(p, movie_catalog(), {find_rule("select_pushdown")});
      REQUIRE(out->kind == OpKind::Join);
      CHECK(out->child(0)->kind == OpKind::Scan);
      REQUIRE(out->child(1)->kind == OpKind::SemSelect);
      CHECK(out->child(1)->child()->args<ScanArgs>().alias == "d");
   }

   TEST_CASE("whole-row semantic selection stays above the join") {
      auto p = plan::sem_select(movie_join(), {"the director overcame challenges", ""});
      CHECK(plans_equal(apply_rules(p, movie_catalog(), shipped_rules()), p));
   }

   TEST_CASE("selection referencing both sides stays above the join") {
      auto p = plan::sem_select(movie_join(), {"{m.plot} fits {d.biography}", ""});
      CHECK(plans_equal(apply_rules(p, movie_catalog(), shipped_rules()), p));
   }

   TEST_CASE("projection composition") {
      Catalog c{{"r", Schema({{"a", ValueKind::Int, "r"}, {"b", ValueKind::Int, "r"}})}};
      auto inner = plan::project(plan::scan("r"), {{col("r", "a"), ""}, {col("r", "b"), ""}});
      auto p = plan::project(inner, {{Expr::make_column("", "a"), ""}});
      auto out = apply_rules(p, c, {find_rule("projection_composition")});
      CHECK(plans_equal(out, plan::project(plan::scan("r"), {{col("r", "a"), ""}})));
   }

   TEST_CASE("nested semantic dedup collapses") {
      Catalog c{{"r", Schema({{"a", ValueKind::Text, "r"}})}};
      auto p = plan::sem_dedup(plan::sem_dedup(plan::scan("r")));
      CHECK(plans_equal(apply_rules(p, c, shipped_rules()), plan::sem_dedup(plan::scan("r"))));
      // Different backends are not merged.
      auto q = plan::sem_dedup(plan::sem_dedup(plan::scan("r"), std::nullopt, "embedding"));
      CHECK(plans_equal(apply_rules(q, c, shipped_rules()), q));
   }

   TEST_CASE("nested top-k keeps the smaller k") {
      Catalog c{{"r", Schema({{"a", ValueKind::Text, "r"}})}};
      auto p = plan::topk(plan::topk(plan::scan("r"), 2), 5);
      CHECK(plans_equal(apply_rules(p, c, shipped_rules()), plan::topk(plan::scan("r"), 2)));
   }

   TEST_CASE("apply_rules reaches a fixpoint") {
      Rng rng(5);
      for (int i = 0; i < 50; ++i) {
         auto db = random_db(rng);
         auto p = gen_pushdown_plan(rng);
         auto once = apply_rules(p, db.catalog(), shipped_rules());
         CHECK(plans_equal(apply_rules(once, db.catalog(), shipped_rules()), once));
      }
   }

   TEST_CASE("compose_intersection shape") {
      Catalog c{{"l", Schema({{"v", ValueKind::Text, "l"}})}, {"r", Schema({{"v", ValueKind::Text, "r"}})}};
      auto p = compose_intersection(plan::scan("l"), plan::scan("r"), c);
      REQUIRE(p->kind == OpKind::Project);
      auto join = p->child();
      REQUIRE(join->kind == OpKind::SemJoin);
      CHECK(join->sem()->prompt == kSameEntityPrompt);
      CHECK(join->child(0)->kind == OpKind::SemProjectCol);
      CHECK(join->child(0)->sem()->prompt == kCombinePrompt);
      auto s = derive_schema(p, c);
      CHECK(s.arity() == 1);
      CHECK(s[0].name == "v");
   }

   TEST_CASE("explain output is one node per line") {
      auto text = explain(sql::parse_query("SELECT a FROM t WHERE SEM_WHERE('{a} x') LIMIT 1").plan);
      CHECK(text == "TopK k=1\n  Project a\n    SemSelect '{a} x'\n      Scan t\n");
   }
}
