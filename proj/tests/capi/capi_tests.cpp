#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "saber/saber.h"
#include <cstdlib>
#include <filesystem>
#include <string>
#include <unistd.h>

namespace {

const std::string kConfig = std::string(SABER_SOURCE_DIR) + "/data/saber.json";

const char* kApple = "SELECT name, price FROM products WHERE SEM_WHERE('{name} is related to apple', 'lotus') "
                     "ORDER BY price DESC LIMIT 1";

/// Owns a char* returned by the library.
struct Text {
   char* p = nullptr;
   ~Text() { saber_string_free(p); }
   char** out() { return &p; }
   std::string str() const { return p ? p : ""; }
};

struct EngineHandle {
   saber_engine* e = nullptr;
   EngineHandle() {
      ::unsetenv("SABER_BACKEND");
      Text err;
      REQUIRE(saber_engine_new(kConfig.c_str(), &e, err.out()) == SABER_OK);
   }
   ~EngineHandle() { saber_engine_free(e); }
};

} // namespace

TEST_CASE("engine lifecycle") {
   saber_engine* e = nullptr;
   REQUIRE(saber_engine_new(nullptr, &e, nullptr) == SABER_OK);
   REQUIRE(e);
   Text tables;
   CHECK(saber_tables(e, tables.out()) == SABER_OK);
   CHECK(tables.str().empty());
   saber_engine_free(e);
   saber_engine_free(nullptr);

   Text err;
   e = reinterpret_cast<saber_engine*>(1);
   CHECK(saber_engine_new("/nonexistent/saber.json", &e, err.out()) == SABER_ERR_IO);
   CHECK(e == nullptr);
   CHECK_FALSE(err.str().empty());

   Text err2;
   CHECK(saber_engine_from_json("{\"threshold\": 2}", ".", &e, err2.out()) == SABER_ERR_CONFIG);
   CHECK(err2.str().find("threshold") != std::string::npos);
}

TEST_CASE("query and result accessors") {
   EngineHandle h;
   saber_result* r = nullptr;
   REQUIRE(saber_query(h.e, kApple, &r) == SABER_OK);
   CHECK(saber_result_rows(r) == 1);
   CHECK(saber_result_columns(r) == 2);
   CHECK(std::string(saber_result_column_name(r, 0)) == "name");
   CHECK(saber_result_column_name(r, 2) == nullptr);
   CHECK(std::string(saber_result_value(r, 0, 0)) == "Apple iPhone case");
   CHECK(std::string(saber_result_value(r, 0, 1)) == "15");
   CHECK(saber_result_value(r, 1, 0) == nullptr);
   CHECK(saber_result_semantic_calls(r) == 3);
   CHECK(saber_call_count(h.e) == 3);

   Text csv;
   CHECK(saber_result_render(r, SABER_OUTPUT_CSV, csv.out()) == SABER_OK);
   CHECK(csv.str() == "name,price\nApple iPhone case,15\n");
   Text stats;
   CHECK(saber_result_stats_json(r, stats.out()) == SABER_OK);
   CHECK(stats.str().find("\"total_calls\": 3") != std::string::npos);
   saber_result_free(r);

   Text log;
   CHECK(saber_call_log_jsonl(h.e, log.out()) == SABER_OK);
   std::size_t lines = 0;
   for (char c : log.str()) lines += c == '\n';
   CHECK(lines == 3);
   saber_call_log_reset(h.e);
   CHECK(saber_call_count(h.e) == 0);
}

TEST_CASE("NULL values come back as NULL pointers") {
   EngineHandle h;
   saber_result* r = nullptr;
   REQUIRE(saber_query(h.e, "SELECT MAX(price) AS m FROM products WHERE price > 100", &r) == SABER_OK);
   REQUIRE(saber_result_rows(r) == 1);
   CHECK(saber_result_value(r, 0, 0) == nullptr);
   saber_result_free(r);
}

TEST_CASE("error codes and positions") {
   EngineHandle h;
   saber_result* r = reinterpret_cast<saber_result*>(1);
   CHECK(saber_query(h.e, "SELECT name\nFROM products WHERE", &r) == SABER_ERR_SYNTAX);
   CHECK(r == nullptr);
   CHECK(saber_last_error_line(h.e) == 2);
   CHECK(saber_last_error_column(h.e) > 0);
   CHECK(std::string(saber_last_error(h.e)).rfind("2:", 0) == 0);

   CHECK(saber_query(h.e, "SELECT bogus FROM products", &r) == SABER_ERR_BINDING);
   CHECK(saber_last_error_line(h.e) == 0);
   CHECK(std::string(saber_last_error(h.e)).find("bogus") != std::string::npos);

   CHECK(saber_query(h.e, "SELECT name FROM products", &r) == SABER_OK);
   CHECK(std::string(saber_last_error(h.e)).empty());
   saber_result_free(r);

   CHECK(saber_set_backend(h.e, "nowhere") == SABER_ERR_CONFIG);
   CHECK(saber_set_threshold(h.e, 0) == SABER_ERR_CONFIG);
   CHECK(saber_load_table(h.e, "x", "/nonexistent.tsv", nullptr, 1) == SABER_ERR_IO);
   CHECK(std::string(saber_status_name(SABER_ERR_BACKEND)) == "backend");
}

TEST_CASE("catalog introspection") {
   EngineHandle h;
   Text tables;
   CHECK(saber_tables(h.e, tables.out()) == SABER_OK);
   CHECK(tables.str() == "directors\t10\nmovies\t12\nproducts\t3\n");
   Text schema;
   CHECK(saber_schema(h.e, "products", schema.out()) == SABER_OK);
   CHECK(schema.str() == "name\ttext\nprice\tint\n");
   Text missing;
   CHECK(saber_schema(h.e, "nope", missing.out()) == SABER_ERR_BINDING);
}

TEST_CASE("explain and rewrite") {
   EngineHandle h;
   Text plan;
   CHECK(saber_explain(h.e, kApple, plan.out()) == SABER_OK);
   CHECK(plan.str().rfind("-- logical plan\n", 0) == 0);
   Text sql;
   CHECK(saber_rewrite(h.e, kApple, "docetl", sql.out()) == SABER_OK);
   CHECK(sql.str().find("{{ input.name }}") != std::string::npos);
   CHECK(sql.str().find("'docetl'") != std::string::npos);
   Text bad;
   CHECK(saber_rewrite(h.e, kApple, "bigquery", bad.out()) == SABER_ERR_CONFIG);
}

TEST_CASE("fixture build and table loading") {
   auto dir = std::filesystem::temp_directory_path() / ("saber_capi_" + std::to_string(::getpid()));
   Text err;
   REQUIRE(saber_build_fixture(dir.string().c_str(), err.out()) == SABER_OK);
   saber_engine* e = nullptr;
   REQUIRE(saber_engine_new(nullptr, &e, nullptr) == SABER_OK);
   CHECK(saber_load_table(e, "movies", (dir / "movies.tsv").string().c_str(), nullptr, 1) == SABER_OK);
   saber_result* r = nullptr;
   REQUIRE(saber_query(e, "SELECT COUNT(*) AS n FROM movies", &r) == SABER_OK);
   CHECK(std::string(saber_result_value(r, 0, 0)) == "12");
   saber_result_free(r);
   saber_engine_free(e);
   std::filesystem::remove_all(dir);
}
