#include "doctest.h"
#include "saber/error.hpp"
#include "saber/ingest/ingest.hpp"
#include "saber/relmodel/relation.hpp"
#include "support/gen.hpp"

using namespace saber;
using namespace saber::testing;

TEST_SUITE("relmodel") {
   TEST_CASE("union compatibility is positional") {
      Schema xi({{"x", ValueKind::Int, ""}});
      Schema yi({{"y", ValueKind::Int, ""}});
      CHECK(check_union_compatible(xi, yi));
      Schema xt({{"x", ValueKind::Int, ""}, {"y", ValueKind::Text, ""}});
      Schema af({{"a", ValueKind::Float, ""}, {"b", ValueKind::Text, ""}});
      CHECK(check_union_compatible(xt, af));
      Schema xy({{"x", ValueKind::Int, ""}, {"y", ValueKind::Int, ""}});
      CHECK_FALSE(check_union_compatible(xi, xy));
      Schema t({{"x", ValueKind::Text, ""}});
      CHECK_FALSE(check_union_compatible(xi, t));
   }

   TEST_CASE("union compatibility agrees with a pairwise coercibility check") {
      const ValueKind kinds[] = {ValueKind::Bool, ValueKind::Int, ValueKind::Float, ValueKind::Text};
      auto coercible = [](ValueKind a, ValueKind b) {
         auto numeric = [](ValueKind k) { return k == ValueKind::Int || k == ValueKind::Float; };
         return a == b || (numeric(a) && numeric(b));
      };
      for (auto a1 : kinds)
         for (auto a2 : kinds)
            for (auto b1 : kinds)
               for (auto b2 : kinds) {
                  Schema a({{"p", a1, ""}, {"q", a2, ""}});
                  Schema b({{"r", b1, ""}, {"s", b2, ""}});
                  CHECK(check_union_compatible(a, b) == (coercible(a1, b1) && coercible(a2, b2)));
               }
   }

   TEST_CASE("tuple_concat") {
      CHECK(tuples_identical(tuple_concat({Value(1)}, {Value("a")}), Tuple{Value(1), Value("a")}));
      CHECK(tuples_identical(tuple_concat({}, {Value(2)}), Tuple{Value(2)}));
      CHECK(tuples_identical(tuple_concat({Value(1), Value(2)}, {Value(3)}), Tuple{Value(1), Value(2), Value(3)}));
   }

   TEST_CASE("numeric comparison coerces Int to Float") {
      CHECK(compare(Value(1), Value(1.0)) == std::partial_ordering::equivalent);
      CHECK(compare(Value(2), Value(1.5)) == std::partial_ordering::greater);
      CHECK(sql_equals(Value(3), Value(3.0)));
   }

   TEST_CASE("Null is unequal to everything, including Null") {
      CHECK_FALSE(sql_equals(Value::null(), Value::null()));
      CHECK_FALSE(sql_equals(Value::null(), Value(1)));
      CHECK_FALSE(sql_equals(Value("a"), Value::null()));
      CHECK(compare(Value::null(), Value(1)) == std::partial_ordering::unordered);
   }

   TEST_CASE("cross-kind comparison other than Null equality is an error") {
      CHECK_THROWS_AS(compare(Value("1"), Value(1)), BindingError);
      CHECK_THROWS_AS(compare(Value(true), Value(1)), BindingError);
   }

   TEST_CASE("identical treats Null as matching Null") {
      CHECK(Value::null().identical(Value::null()));
      CHECK(Value(1).identical(Value(1.0)));
      CHECK(Value(1).hash() == Value(1.0).hash());
      CHECK_FALSE(Value("1").identical(Value(1)));
   }

   TEST_CASE("sort order places Null first") {
      CHECK(sort_order(Value::null(), Value(0)) == std::weak_ordering::less);
      CHECK(sort_order(Value(1), Value(2.5)) == std::weak_ordering::less);
   }

   TEST_CASE("schema resolution is case-insensitive and rejects ambiguity") {
      Schema s({{"x", ValueKind::Int, "a"}, {"x", ValueKind::Int, "b"}, {"Title", ValueKind::Text, "a"}});
      CHECK(s.resolve("a", "X") == 0);
      CHECK(s.resolve("", "title") == 2);
      CHECK_THROWS_AS(s.resolve("", "x"), BindingError);
      CHECK_THROWS_AS(s.resolve("", "nope"), BindingError);
   }

   TEST_CASE("qualified names must be unique") {
      CHECK_THROWS_AS(Schema({{"x", ValueKind::Int, "a"}, {"X", ValueKind::Int, "a"}}), BindingError);
      Schema left({{"x", ValueKind::Int, "a"}});
      CHECK_THROWS_AS(Schema::concat(left, left), BindingError);
      CHECK(Schema::concat(left, left.requalified("b")).arity() == 2);
   }

   TEST_CASE("relation rows are checked against the schema") {
      Schema s({{"x", ValueKind::Float, ""}});
      CHECK_NOTHROW(Relation(s, {{Value(1)}, {Value(2.5)}, {Value::null()}}));
      CHECK_THROWS(Relation(s, {{Value("a")}}));
      CHECK_THROWS(Relation(s, {{Value(1), Value(2)}}));
   }

   TEST_CASE("row rendering and canonical text") {
      Schema s({{"title", ValueKind::Text, "m"}, {"rating", ValueKind::Float, "m"}, {"n", ValueKind::Int, ""}});
      Tuple row{Value("Heat"), Value(8.3), Value::null()};
      CHECK(render_row(s, row) == "m.title: Heat\nm.rating: 8.3\nn: NULL");
      CHECK(render_row(s, row, {1}) == "m.rating: 8.3");
      CHECK(canonical_text(row) == "Heat, 8.3, NULL");
   }

   TEST_CASE("value display text") {
      CHECK(Value(9.3).to_string() == "9.3");
      CHECK(Value(8.0).to_string() == "8.0");
      CHECK(Value(static_cast<std::int64_t>(-12)).to_string() == "-12");
      CHECK(Value(true).to_string() == "true");
   }

   TEST_CASE("property: identity projection preserves rows and order") {
      Rng rng(7);
      for (int i = 0; i < 100; ++i) {
         Database db;
         db.add("r", random_table(rng, "r", "a", "b"));
         auto p = plan::project(plan::scan("r"), {{col("r", "a"), ""}, {col("r", "b"), ""}});
         MockHarness h;
         auto out = eval(p, db, h.resolver()).result;
         REQUIRE(out.rows().size() == db.get("r").rows().size());
         for (std::size_t k = 0; k < out.size(); ++k) CHECK(tuples_identical(out.rows()[k], db.get("r").rows()[k]));
      }
   }

   TEST_CASE("property: canonical table text round-trips") {
      Rng rng(11);
      const std::vector<std::string> tricky = {"tab\there", "line\nbreak", "back\\slash", "\\N", "comma, \"quoted\"", "", "ünïcødé"};
      for (int i = 0; i < 100; ++i) {
         std::vector<Tuple> rows;
         std::size_t n = pick(rng, 6);
         for (std::size_t k = 0; k < n; ++k) {
            Value t = coin(rng, 0.15) ? Value::null() : Value(tricky[pick(rng, tricky.size())]);
            Value f = coin(rng, 0.15) ? Value::null() : Value(static_cast<double>(pick(rng, 100)) / 8.0);
            rows.push_back({t, random_int(rng), f});
         }
         auto r = make_relation("t", {{"s", ValueKind::Text}, {"i", ValueKind::Int}, {"f", ValueKind::Float}}, rows);
         for (auto fmt : {FileFormat::Tsv, FileFormat::Csv, FileFormat::Jsonl}) {
            // JSONL carries no schema for an empty table.
            if (fmt == FileFormat::Jsonl && r.empty()) continue;
            auto text = write_table(r, fmt);
            auto back = parse_table(text, fmt, true, {}, "t");
            REQUIRE(back.size() == r.size());
            if (fmt != FileFormat::Jsonl) {
               REQUIRE(back.schema().arity() == 3);
               for (std::size_t c = 0; c < 3; ++c) {
                  CHECK(back.schema()[c].name == r.schema()[c].name);
                  CHECK(back.schema()[c].kind == r.schema()[c].kind);
               }
            }
            for (std::size_t k = 0; k < r.size(); ++k) {
               CHECK(tuples_identical(back.rows()[k], r.rows()[k]));
               // Text values come back byte-identical.
               if (!r.rows()[k][0].is_null()) CHECK(back.rows()[k][0].as_text() == r.rows()[k][0].as_text());
            }
         }
      }
   }
}
