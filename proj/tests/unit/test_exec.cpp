#include "doctest.h"
#include "saber/algebra/rules.hpp"
#include "saber/error.hpp"
#include "saber/sqlfront/parser.hpp"
#include "support/gen.hpp"
#include <algorithm>
#include <map>

using namespace saber;
using namespace saber::testing;

namespace {

Relation run(const PlanPtr& p, const Database& db, MockHarness& h) {
   return eval(p, db, h.resolver()).result;
}

Relation run_sql(const std::string& sql, const Database& db, MockHarness& h) {
   auto catalog = db.catalog();
   return run(sql::parse_query(sql, &catalog).plan, db, h);
}

std::map<std::string, int> counts(const Relation& r) {
   std::map<std::string, int> m;
   for (const auto& row : r.rows()) ++m[canonical_text(row)];
   return m;
}

/// Random plan mixing conventional and semantic operators over r, s, u.
PlanPtr gen_semantic_plan(Rng& rng, int depth = 0) {
   auto leaf = [&]() -> PlanPtr { return coin(rng) ? plan::scan("r") : plan::scan("u"); };
   if (depth >= 2) return leaf();
   auto sub = [&] { return gen_semantic_plan(rng, depth + 1); };
   switch (pick(rng, 12)) {
      case 0: return plan::sem_select(sub(), random_sem_predicate(rng, false));
      case 1: return plan::select(sub(), Expr::make_compare(">=", col("", "b"), lit(static_cast<std::int64_t>(pick(rng, 3)))));
      case 2: {
         static const OpKind kinds[] = {OpKind::SemSetDiff, OpKind::SemBagDiff, OpKind::SemSetUnion, OpKind::SemSetIntersect,
                                        OpKind::SemBagIntersect, OpKind::BagDiff, OpKind::SetDiff, OpKind::SetIntersect, OpKind::BagUnion};
         return plan::set_op(kinds[pick(rng, 9)], sub(), sub());
      }
      case 3: return plan::sem_dedup(sub(), coin(rng) ? std::optional<ColumnName>(ColumnName{"", "a"}) : std::nullopt);
      case 4: return plan::dedup(sub());
      case 5: return plan::sem_sort(sub(), coin(rng) ? std::optional<ColumnName>(ColumnName{"", "a"}) : std::nullopt, {"how much {a} is about apple", ""});
      case 6: return plan::topk(plan::sort(sub(), {{col("", "b"), coin(rng)}, {col("", "a"), false}}), static_cast<std::int64_t>(pick(rng, 6)));
      case 7: {
         auto g = plan::sem_group(sub(), ColumnName{"", "a"}, static_cast<std::int64_t>(1 + pick(rng, 3)));
         return plan::project(g, {{col("", "a"), ""}, {col("", "b"), ""}});
      }
      case 8: {
         auto p = plan::sem_join(plan::scan("r"), plan::scan("s"), {"{r.a} matches {s.c}", ""});
         return plan::project(p, {{col("r", "a"), ""}, {col("s", "d"), "b"}});
      }
      case 9: {
         auto p = plan::sem_project(sub(), {"Summarize {a}", ""}, "x");
         return plan::project(p, {{col("", "x"), "a"}, {col("", "b"), ""}});
      }
      case 10: {
         auto g = plan::group(sub(), {ColumnName{"", "a"}});
         auto agg = plan::aggregate(g, {ColumnName{"", "a"}}, {{AggFunc::Max, ColumnName{"", "b"}, {}, "b"}});
         return agg;
      }
      default: return sub();
   }
}

} // namespace

TEST_SUITE("exec") {
   TEST_CASE("apple query returns the most expensive apple product with three predicate calls") {
      MockHarness h;
      auto db = product_db();
      auto catalog = db.catalog();
      auto report = eval(sql::parse_query(kAppleQuery, &catalog).plan, db, h.resolver());
      REQUIRE(report.result.size() == 1);
      CHECK(report.result.rows()[0][0].as_text() == "Apple iPhone case");
      CHECK(report.result.rows()[0][1].as_int() == 15);
      CHECK(report.total_calls == 3);
      CHECK(h.log->count(Capability::Predicate) == 3);
   }

   TEST_CASE("semantic bag difference with an empty right side") {
      MockHarness h;
      Database db;
      db.add("r", text_relation("r", "v", {"apple", "NYC", "apple"}));
      db.add("e", text_relation("e", "v", {}));
      auto report = eval(plan::set_op(OpKind::SemBagDiff, plan::scan("r"), plan::scan("e")), db, h.resolver());
      CHECK(report.result.same_rows(db.get("r")));
      CHECK(report.total_calls == 0);
      CHECK(h.log->count() == 0);
   }

   TEST_CASE("semantic dedup keeps the first of NYC / New York City") {
      MockHarness h;
      Database db;
      db.add("c", text_relation("c", "city", {"NYC", "New York City", "Boston"}));
      auto out = run(plan::sem_dedup(plan::scan("c")), db, h);
      CHECK(column_text(out, 0) == std::vector<std::string>{"NYC", "Boston"});
   }

   TEST_CASE("movie query over the fixture") {
      MockHarness h;
      auto db = movie_db();
      auto out = run_sql(slurp(source_path("queries/resilient_movies.sql")), db, h);

      // Oracle: join by hand, keyword-check both texts, sort by rating.
      const auto& movies = db.get("movies");
      const auto& directors = db.get("directors");
      std::vector<std::pair<double, std::string>> expected;
      for (const auto& m : movies.rows()) {
         for (const auto& d : directors.rows()) {
            if (m[5].as_text() != d[0].as_text()) continue;
            bool challenged = has_word(d[2].as_text(), kChallengeWords) || has_word(m[1].as_text() + " " + m[4].as_text(), kChallengeWords);
            bool resilient = has_word(m[4].as_text(), kResilienceWords) || has_word(m[1].as_text() + " " + d[2].as_text(), kResilienceWords);
            if (challenged && resilient) expected.emplace_back(m[3].as_float(), m[1].as_text());
         }
      }
      std::stable_sort(expected.begin(), expected.end(), [](auto& a, auto& b) { return a.first > b.first; });
      REQUIRE(expected.size() >= 5);
      expected.resize(5);

      REQUIRE(out.size() == 5);
      for (std::size_t i = 0; i < 5; ++i) CHECK(out.rows()[i][0].as_text() == expected[i].second);
      CHECK(column_text(out, 0) == std::vector<std::string>{"The Shawshank Redemption", "One Flew Over the Cuckoo's Nest",
                                                            "It's a Wonderful Life", "The Pianist", "The Great Dictator"});
      for (std::size_t i = 1; i < 5; ++i) CHECK(out.rows()[i - 1][3].as_float() > out.rows()[i][3].as_float());
      CHECK(out.schema()[4].name == "director_summary");
   }

   TEST_CASE("call counts: SemJoin n*m, SemSelect n") {
      MockHarness h;
      Database db;
      db.add("l", text_relation("l", "a", {"apple", "banana", "NYC", "carburetor"}));
      db.add("r", text_relation("r", "b", {"apple", "Boston", "pear"}));
      auto report = eval(plan::sem_join(plan::scan("l"), plan::scan("r"), {"{l.a} matches {r.b}", ""}), db, h.resolver());
      CHECK(report.total_calls == 12);
      CHECK(h.log->count(Capability::Predicate) == 12);

      std::vector<std::string> ten;
      for (int i = 0; i < 10; ++i) ten.push_back(i % 3 ? "apple" : "pear");
      db.add("t", text_relation("t", "a", ten));
      h.log->clear();
      report = eval(plan::sem_select(plan::scan("t"), {"{a} is related to apple", ""}), db, h.resolver());
      CHECK(report.total_calls == 10);
      CHECK(h.log->count(Capability::Predicate) == 10);
      CHECK(report.result.size() == 6);
   }

   TEST_CASE("semantic grouping seeds by farthest point") {
      MockHarness h;
      Database db;
      db.add("t", text_relation("t", "a", {"NYC", "apple", "New York City", "carburetor", "banana"}));
      auto out = run(plan::sem_group(plan::scan("t"), ColumnName{"", "a"}, 3), db, h);
      REQUIRE(out.size() == 5);
      CHECK(column_text(out, 0) == std::vector<std::string>{"NYC", "New York City", "carburetor", "apple", "banana"});
      CHECK(column_text(out, 1) == std::vector<std::string>{"0", "0", "0", "1", "2"});
      // All rows identical: one group even when more are requested.
      db.put("t", text_relation("t", "a", {"x", "x", "x"}));
      out = run(plan::sem_group(plan::scan("t"), ColumnName{"", "a"}, 3), db, h);
      CHECK(column_text(out, 1) == std::vector<std::string>{"0", "0", "0"});
   }

   TEST_CASE("semantic sort is stable and descending") {
      MockHarness h;
      Database db;
      db.add("t", text_relation("t", "a", {"pear", "apple pie", "apple", "plum"}));
      auto out = run(plan::sem_sort(plan::scan("t"), ColumnName{"", "a"}, {"how much is it about apple", ""}), db, h);
      CHECK(column_text(out, 0) == std::vector<std::string>{"apple pie", "apple", "pear", "plum"});
   }

   TEST_CASE("conventional aggregates") {
      MockHarness h;
      Database db;
      db.add("t", make_relation("t", {{"k", ValueKind::Text}, {"v", ValueKind::Int}},
                                {{Value("a"), Value(1)}, {Value("b"), Value(5)}, {Value("a"), Value::null()}, {Value("a"), Value(3)}}));
      auto out = run_sql("SELECT k, COUNT(*) AS n, COUNT(v) AS c, SUM(v) AS s, AVG(v) AS m, MIN(v) AS lo, MAX(v) AS hi FROM t GROUP BY k", db, h);
      REQUIRE(out.size() == 2);
      CHECK(canonical_text(out.rows()[0]) == "a, 3, 2, 4, 2.0, 1, 3");
      CHECK(canonical_text(out.rows()[1]) == "b, 1, 1, 5, 5.0, 5, 5");
      out = run_sql("SELECT COUNT(*) AS n, SUM(v) AS s FROM t WHERE v > 100", db, h);
      REQUIRE(out.size() == 1);
      CHECK(canonical_text(out.rows()[0]) == "0, NULL");
   }

   TEST_CASE("semantic aggregate returns text") {
      MockHarness h;
      Database db;
      db.add("t", text_relation("t", "a", {"x", "y"}));
      auto out = run_sql("SELECT SEM_AGG(a, 'count the items') AS n FROM t", db, h);
      REQUIRE(out.size() == 1);
      CHECK(out.schema()[0].kind == ValueKind::Text);
      CHECK(out.rows()[0][0].as_text() == "2");
   }

   TEST_CASE("backend errors name the failing node") {
      MockHarness h;
      Database db;
      db.add("t", text_relation("t", "a", {"x"}));
      try {
         run(plan::sem_select(plan::scan("t"), {" ", ""}), db, h);
         FAIL("expected a backend error");
      } catch (const BackendError& e) {
         CHECK(std::string(e.what()).find("SemSelect") != std::string::npos);
         CHECK(e.reason() == BackendError::Reason::EmptyTemplate);
      }
   }

   TEST_CASE("execution report") {
      MockHarness h;
      auto db = product_db();
      auto catalog = db.catalog();
      auto report = eval(sql::parse_query(kAppleQuery, &catalog).plan, db, h.resolver());
      REQUIRE(report.nodes.size() == 5);
      CHECK(report.nodes[0].kind == OpKind::TopK);
      CHECK(report.nodes[3].kind == OpKind::SemSelect);
      CHECK(report.nodes[3].semantic_calls == 3);
      CHECK(report.nodes[4].rows_out == 3);
      auto j = report.to_json();
      CHECK(j.find("\"total_calls\": 3") != std::string::npos);
   }

   TEST_CASE("oracle refuses large inputs") {
      MockHarness h;
      Database db;
      std::vector<std::string> many(kOracleRowCap + 1, "x");
      db.add("t", text_relation("t", "a", many));
      CHECK_THROWS_AS(eval_oracle(plan::scan("t"), db, h.resolver()), BindingError);
   }

   TEST_CASE("property: top-k is the first min(k, n) rows") {
      Rng rng(21);
      MockHarness h;
      for (int i = 0; i < 100; ++i) {
         auto db = random_db(rng);
         auto k = static_cast<std::int64_t>(pick(rng, 8));
         auto out = run(plan::topk(plan::scan("r"), k), db, h);
         const auto& r = db.get("r");
         REQUIRE(out.size() == std::min<std::size_t>(k, r.size()));
         for (std::size_t j = 0; j < out.size(); ++j) CHECK(tuples_identical(out.rows()[j], r.rows()[j]));
      }
   }

   TEST_CASE("property: filters, differences and dedups keep input order") {
      Rng rng(23);
      MockHarness h;
      auto is_subsequence = [](const Relation& out, const Relation& in) {
         std::size_t j = 0;
         for (const auto& row : in.rows())
            if (j < out.size() && tuples_identical(out.rows()[j], row)) ++j;
         return j == out.size();
      };
      for (int i = 0; i < 100; ++i) {
         auto db = random_db(rng);
         const auto& r = db.get("r");
         std::vector<PlanPtr> plans = {
            plan::sem_select(plan::scan("r"), {"{a} is related to apple", ""}),
            plan::select(plan::scan("r"), Expr::make_compare(">", col("r", "b"), lit(1))),
            plan::set_op(OpKind::BagDiff, plan::scan("r"), plan::scan("u")),
            plan::set_op(OpKind::SemBagDiff, plan::scan("r"), plan::scan("u")),
            plan::set_op(OpKind::SemSetDiff, plan::scan("r"), plan::scan("u")),
            plan::set_op(OpKind::BagIntersect, plan::scan("r"), plan::scan("u")),
            plan::set_op(OpKind::SemBagIntersect, plan::scan("r"), plan::scan("u")),
            plan::set_op(OpKind::SemSetIntersect, plan::scan("r"), plan::scan("u")),
            plan::dedup(plan::scan("r")),
            plan::sem_dedup(plan::scan("r")),
         };
         for (const auto& p : plans) CHECK(is_subsequence(run(p, db, h), r));
      }
   }

   TEST_CASE("property: conventional bag difference multiplicity law") {
      const std::vector<std::string> symbols = {"a", "b"};
      std::vector<std::vector<std::string>> lists = {{}};
      for (std::size_t len = 1; len <= 3; ++len) {
         std::vector<std::vector<std::string>> next;
         for (const auto& l : lists)
            if (l.size() == len - 1)
               for (const auto& s : symbols) {
                  auto c = l;
                  c.push_back(s);
                  next.push_back(c);
               }
         lists.insert(lists.end(), next.begin(), next.end());
      }
      REQUIRE(lists.size() == 15);
      MockHarness h;
      for (const auto& rl : lists)
         for (const auto& sl : lists) {
            Database db;
            db.add("r", text_relation("r", "v", rl));
            db.add("s", text_relation("s", "v", sl));
            auto out = counts(run(plan::set_op(OpKind::BagDiff, plan::scan("r"), plan::scan("s")), db, h));
            for (const auto& sym : symbols) {
               int cr = static_cast<int>(std::count(rl.begin(), rl.end(), sym));
               int cs = static_cast<int>(std::count(sl.begin(), sl.end(), sym));
               CHECK(out[sym] == std::max(0, cr - cs));
            }
         }
   }

   TEST_CASE("property: set operation composition laws") {
      Rng rng(29);
      MockHarness h;
      for (int i = 0; i < 200; ++i) {
         Database db;
         db.add("r", random_text_relation(rng, "r"));
         db.add("s", random_text_relation(rng, "s"));
         auto r = plan::scan("r"), s = plan::scan("s");
         CHECK(run(plan::set_op(OpKind::SemSetDiff, r, s), db, h).same_rows(run(plan::sem_dedup(plan::set_op(OpKind::SemBagDiff, r, s)), db, h)));
         CHECK(run(plan::set_op(OpKind::SemSetUnion, r, s), db, h).same_rows(run(plan::sem_dedup(plan::set_op(OpKind::BagUnion, r, s)), db, h)));
         CHECK(run(plan::set_op(OpKind::SemSetIntersect, r, s), db, h)
                  .same_rows(run(plan::sem_dedup(plan::set_op(OpKind::SemBagIntersect, r, s)), db, h)));
         CHECK(run(plan::set_op(OpKind::SetDiff, r, s), db, h).same_rows(run(plan::dedup(plan::set_op(OpKind::BagDiff, r, s)), db, h)));
      }
   }

   TEST_CASE("property: semantic dedup is idempotent") {
      Rng rng(31);
      MockHarness h;
      for (int i = 0; i < 200; ++i) {
         Database db;
         db.add("r", random_text_relation(rng, "r", 8));
         auto once = run(plan::sem_dedup(plan::scan("r")), db, h);
         auto twice = run(plan::sem_dedup(plan::sem_dedup(plan::scan("r"))), db, h);
         CHECK(once.same_rows(twice));
      }
   }

   TEST_CASE("property: executor agrees with the reference evaluator") {
      Rng rng(37);
      MockHarness h;
      int compared = 0;
      for (int i = 0; i < 300; ++i) {
         auto db = random_db(rng);
         auto p = gen_semantic_plan(rng);
         Relation fast, slow;
         try {
            derive_schema(p, db.catalog());
         } catch (const BindingError&) {
            continue; // ill-typed combination, e.g. a set operation after a projection rename
         }
         fast = run(p, db, h);
         slow = eval_oracle(p, db, h.resolver());
         CAPTURE(explain(p));
         CHECK(fast.same_rows(slow));
         ++compared;
      }
      CHECK(compared >= 100);
   }

   TEST_CASE("conventional plans: executor, oracle and hand-computed results agree") {
      MockHarness h;
      Database db;
      db.add("r", text_relation("r", "v", {"a", "b", "a", "c"}));
      db.add("s", text_relation("s", "v", {"a", "c", "d"}));
      auto r = plan::scan("r"), s = plan::scan("s");
      struct Case {
         PlanPtr plan;
         std::vector<std::string> expected;
      } cases[] = {
         {plan::set_op(OpKind::BagDiff, r, s), {"b", "a"}},
         {plan::set_op(OpKind::SetDiff, r, s), {"b", "a"}},
         {plan::set_op(OpKind::BagIntersect, r, s), {"a", "c"}},
         {plan::set_op(OpKind::SetUnion, r, s), {"a", "b", "c", "d"}},
         {plan::set_op(OpKind::BagUnion, r, s), {"a", "b", "a", "c", "a", "c", "d"}},
         {plan::dedup(r), {"a", "b", "c"}},
         {plan::topk(plan::sort(r, {{col("r", "v"), true}}), 2), {"c", "b"}},
      };
      for (auto& c : cases) {
         CAPTURE(explain(c.plan));
         CHECK(column_text(run(c.plan, db, h), 0) == c.expected);
         CHECK(column_text(eval_oracle(c.plan, db, h.resolver()), 0) == c.expected);
      }
   }
}
