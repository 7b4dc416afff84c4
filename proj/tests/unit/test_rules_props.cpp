#include "doctest.h"
#include "saber/algebra/rules.hpp"
#include "saber/semkernel/embedding.hpp"
#include "support/clusters.hpp"

using namespace saber;
using namespace saber::testing;

TEST_SUITE("rules") {
   TEST_CASE("property: every shipped rule is sound and conserves semantic nodes") {
      for (const auto& rule : shipped_rules()) {
         CAPTURE(rule.name);
         Rng rng(std::hash<std::string>{}(rule.name));
         MockHarness h;
         int changed = 0;
         for (int i = 0; i < 100; ++i) {
            auto db = random_db(rng);
            auto p = gen_plan_for_rule(rule.name, rng);
            auto catalog = db.catalog();
            auto q = apply_rules(p, catalog, {rule});
            CAPTURE(explain(p));
            CAPTURE(explain(q));
            if (!plans_equal(p, q)) ++changed;
            CHECK(semantic_signature(p) == semantic_signature(q));
            auto expected = eval_oracle(p, db, h.resolver());
            auto got = eval(q, db, h.resolver()).result;
            if (rule.order_preserving) CHECK(got.same_rows(expected));
            else CHECK(got.same_multiset(expected));
         }
         // The generators target each rule; most plans must actually change.
         CHECK(changed >= 50);
      }
   }

   TEST_CASE("property: the full rule set is sound on mixed plans") {
      Rng rng(41);
      MockHarness h;
      for (int i = 0; i < 200; ++i) {
         auto db = random_db(rng);
         const auto& rules = shipped_rules();
         auto p = gen_plan_for_rule(rules[pick(rng, rules.size())].name, rng);
         if (coin(rng, 0.3)) p = plan::topk(plan::dedup(p), static_cast<std::int64_t>(pick(rng, 4) + 1));
         auto q = apply_rules(p, db.catalog(), rules);
         CHECK(semantic_signature(p) == semantic_signature(q));
         CHECK(eval(q, db, h.resolver()).result.same_rows(eval_oracle(p, db, h.resolver())));
      }
   }

   TEST_CASE("cluster fixture: equivalence is transitive within clusters") {
      HashEmbedder e;
      const auto& cl = equivalence_clusters();
      for (std::size_t a = 0; a < cl.size(); ++a)
         for (std::size_t b = 0; b < cl.size(); ++b)
            for (const auto& x : cl[a])
               for (const auto& y : cl[b]) {
                  bool eq = x == y || e.similarity(x, y) >= 0.8;
                  CAPTURE(x);
                  CAPTURE(y);
                  CHECK(eq == (a == b));
               }
   }

   TEST_CASE("compose_intersection equals semantic bag intersection up to dedup") {
      MockHarness h;
      auto pairs = cluster_pairs(50, 43);
      for (const auto& pr : pairs) {
         Database db;
         db.add("l", pr.left);
         db.add("r", pr.right);
         auto catalog = db.catalog();
         auto composed = plan::sem_dedup(compose_intersection(plan::scan("l"), plan::scan("r"), catalog));
         auto native = plan::sem_dedup(plan::set_op(OpKind::SemBagIntersect, plan::scan("l"), plan::scan("r")));
         auto a = eval(composed, db, h.resolver()).result;
         auto b = eval(native, db, h.resolver()).result;
         CHECK(a.same_multiset(b));
      }
   }

   TEST_CASE("compose_intersection over an empty left input is empty") {
      MockHarness h;
      Database db;
      db.add("l", text_relation("l", "v", {}));
      db.add("r", text_relation("r", "v", {"NYC"}));
      auto p = compose_intersection(plan::scan("l"), plan::scan("r"), db.catalog());
      CHECK(eval(p, db, h.resolver()).result.empty());
   }

   TEST_CASE("compose_intersection on two-column rows") {
      MockHarness h;
      Database db;
      db.add("l", make_relation("l", {{"city", ValueKind::Text}, {"n", ValueKind::Int}},
                                {{Value("NYC"), Value(1)}, {Value("Boston"), Value(2)}, {Value("Paris"), Value(1)}}));
      db.add("r", make_relation("r", {{"city", ValueKind::Text}, {"n", ValueKind::Int}},
                                {{Value("New York City"), Value(1)}, {Value("Boston"), Value(3)}}));
      auto p = compose_intersection(plan::scan("l"), plan::scan("r"), db.catalog());
      auto out = eval(p, db, h.resolver()).result;
      auto native = eval(plan::set_op(OpKind::SemBagIntersect, plan::scan("l"), plan::scan("r")), db, h.resolver()).result;
      CHECK(out.same_multiset(native));
      REQUIRE(out.size() == 1);
      CHECK(out.rows()[0][0].as_text() == "NYC");
   }
}
