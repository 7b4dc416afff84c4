#include "doctest.h"
#include "saber/engine/engine.hpp"
#include "saber/error.hpp"
#include "support/helpers.hpp"
#include <cstdlib>

using namespace saber;
using namespace saber::testing;

namespace {

Engine sample_engine() {
   ::unsetenv("SABER_BACKEND");
   return Engine(EngineConfig::load(source_path("data/saber.json")));
}

} // namespace

TEST_SUITE("engine") {
   TEST_CASE("environment interpolation") {
      ::setenv("SABER_TEST_VAR", "value", 1);
      ::unsetenv("SABER_TEST_UNSET");
      CHECK(interpolate_env("a ${SABER_TEST_VAR} b") == "a value b");
      CHECK(interpolate_env("${SABER_TEST_UNSET:-fallback}") == "fallback");
      CHECK(interpolate_env("${SABER_TEST_VAR:-fallback}") == "value");
      CHECK(interpolate_env("no variables") == "no variables");
      CHECK_THROWS_AS(interpolate_env("${SABER_TEST_UNSET}"), ConfigError);
      CHECK_THROWS_AS(interpolate_env("${SABER_TEST_VAR"), ConfigError);
   }

   TEST_CASE("sample config loads the three tables in name order") {
      auto engine = sample_engine();
      CHECK(engine.config().default_backend == "mock");
      CHECK(engine.database().names() == std::vector<std::string>{"directors", "movies", "products"});
      CHECK(engine.database().get("products").size() == 3);
      CHECK(engine.backends().contains("llm"));
   }

   TEST_CASE("config validation") {
      CHECK_THROWS_AS(EngineConfig::parse("[]"), ConfigError);
      CHECK_THROWS_AS(EngineConfig::parse("{"), ConfigError);
      CHECK_THROWS_AS(EngineConfig::parse(R"({"threshold": 0})").validate(), ConfigError);
      CHECK_THROWS_AS(EngineConfig::parse(R"({"threshold": 1.5})").validate(), ConfigError);
      CHECK_THROWS_AS(EngineConfig::parse(R"({"output": "xml"})"), ConfigError);
      CHECK_THROWS_AS(EngineConfig::parse(R"({"default_backend": "nowhere"})").validate(), ConfigError);
      CHECK_THROWS_AS(EngineConfig::parse(R"({"backends": {"x": {"type": "oracle"}}})").validate(), ConfigError);
      CHECK_THROWS_AS(EngineConfig::parse(R"({"tables": {"t": {"path": "t.txt"}}})"), ConfigError);
      CHECK_THROWS_AS(EngineConfig::parse(R"({"tables": {"t": {"path": "t.tsv", "kinds": {"a": "decimal"}}}})"), ConfigError);
      auto ok = EngineConfig::parse(R"({"output": "csv", "threshold": 0.5, "tables": {"t": {"path": "sub/t.tsv"}}})", "/base");
      CHECK(ok.output == OutputFormat::Csv);
      CHECK(ok.threshold == 0.5);
      REQUIRE(ok.tables.size() == 1);
      CHECK(ok.tables[0].second.path == "/base/sub/t.tsv");
      CHECK(ok.tables[0].second.format == FileFormat::Tsv);
   }

   TEST_CASE("backend selection") {
      Engine engine;
      CHECK_THROWS_AS(engine.set_default_backend("nowhere"), ConfigError);
      CHECK_NOTHROW(engine.set_default_backend("embedding"));
      CHECK_THROWS_AS(engine.set_threshold(0), ConfigError);
   }

   TEST_CASE("output formats") {
      auto r = make_relation("t", {{"name", ValueKind::Text}, {"n", ValueKind::Int}},
                             {{Value("a, b"), Value(12)}, {Value("x"), Value()}});
      CHECK(render_relation(r, OutputFormat::Aligned) ==
            " name | n\n"
            "------+------\n"
            " a, b |   12\n"
            " x    | NULL\n"
            "(2 rows)\n");
      CHECK(render_relation(r, OutputFormat::Csv) == "name,n\n\"a, b\",12\nx,\n");
      CHECK(render_relation(r, OutputFormat::Json) == relation_to_json(r));
      CHECK(parse_output_format("table") == OutputFormat::Aligned);
      CHECK(!parse_output_format("html"));
   }

   TEST_CASE("apple query end to end") {
      auto engine = sample_engine();
      auto out = engine.run(kAppleQuery);
      CHECK(out.report.total_calls == 3);
      REQUIRE(out.report.result.size() == 1);
      CHECK(out.report.result.rows()[0][0].as_text() == "Apple iPhone case");
   }

   TEST_CASE("explain shows both plans") {
      auto engine = sample_engine();
      auto text = engine.explain(kAppleQuery);
      CHECK(text.rfind("-- logical plan\n", 0) == 0);
      CHECK(text.find("-- after rewrite rules\n") != std::string::npos);
   }

   TEST_CASE("repeated runs render identically") {
      auto q = slurp(source_path("queries/resilient_movies.sql"));
      std::string first;
      for (int i = 0; i < 3; ++i) {
         auto engine = sample_engine();
         auto text = render_relation(engine.run(q).report.result, OutputFormat::Aligned);
         if (i == 0) first = text;
         else CHECK(text == first);
      }
   }

   TEST_CASE("disabling the optimizer keeps results") {
      auto engine = sample_engine();
      auto q = slurp(source_path("queries/resilient_movies.sql"));
      auto on = engine.run(q).report.result;
      engine.set_optimize(false);
      auto off = engine.run(q);
      CHECK(off.optimized == off.plan);
      CHECK(off.report.result.same_rows(on));
   }
}
