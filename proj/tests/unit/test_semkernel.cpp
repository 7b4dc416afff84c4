#include "doctest.h"
#include "saber/error.hpp"
#include "saber/semkernel/embedding_backend.hpp"
#include "saber/semkernel/llm_backend.hpp"
#include "saber/semkernel/mock_backend.hpp"
#include "saber/semkernel/prompt_template.hpp"
#include "saber/util/strings.hpp"
#include "support/gen.hpp"
#include "support/stub_llm.hpp"
#include <cmath>

using namespace saber;
using namespace saber::testing;

namespace {

// Independent re-implementation of the documented token-hash embedding.
std::vector<double> oracle_embed(const std::string& text) {
   static const std::map<std::string, std::string> aliases = {{"nyc", "new york city"}, {"la", "los angeles"}, {"sf", "san francisco"}};
   std::vector<std::string> toks;
   std::string cur;
   auto push = [&](const std::string& t) {
      auto it = aliases.find(t);
      if (it == aliases.end()) {
         toks.push_back(t);
         return;
      }
      std::string w;
      for (char c : it->second + " ") {
         if (c == ' ') {
            if (!w.empty()) toks.push_back(w);
            w.clear();
         } else {
            w += c;
         }
      }
   };
   for (char c : text + " ") {
      if (std::isalnum(static_cast<unsigned char>(c))) {
         cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      } else if (!cur.empty()) {
         push(cur);
         cur.clear();
      }
   }
   std::vector<double> v(64, 0.0);
   for (const auto& t : toks) {
      std::uint64_t h = 0xcbf29ce484222325ULL;
      for (unsigned char c : t) {
         h ^= c;
         h *= 0x100000001b3ULL;
      }
      v[h % 64] += 1;
   }
   double n = 0;
   for (double x : v) n += x * x;
   for (double& x : v) x /= std::sqrt(n);
   return v;
}

double oracle_cosine(const std::string& a, const std::string& b) {
   auto u = oracle_embed(a), v = oracle_embed(b);
   double d = 0;
   for (std::size_t i = 0; i < 64; ++i) d += u[i] * v[i];
   return d;
}

} // namespace

TEST_SUITE("semkernel") {
   TEST_CASE("cosine") {
      CHECK(cosine({1, 0, 0}, {1, 0, 0}) == doctest::Approx(1.0));
      CHECK(cosine({1, 0, 0}, {0, 1, 0}) == doctest::Approx(0.0));
      CHECK(std::abs(cosine({1, 1, 0}, {1, 0, 0}) - 1.0 / std::sqrt(2.0)) < 1e-9);
      CHECK(std::abs(cosine({1, 1, 0}, {1, 0, 0}) - 0.7071) < 1e-4);
      CHECK_THROWS_AS(cosine({0, 0}, {1, 0}), BackendError);
      CHECK_THROWS_AS(cosine({1}, {1, 0}), BackendError);
   }

   TEST_CASE("hash embedder matches the independent oracle") {
      HashEmbedder e;
      for (const char* text : {"apple", "Apple iPhone case", "NYC", "New York City", "recipe for apple pie", "carburetor", "LA traffic"}) {
         auto got = e.embed(text);
         auto want = oracle_embed(text);
         for (std::size_t i = 0; i < 64; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
      }
      CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
      CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
   }

   TEST_CASE("equivalence examples") {
      MockHarness h;
      auto& b = h.backend;
      CHECK(b.threshold() == 0.8);
      CHECK(b.equivalent("NYC", "NYC"));
      // Frozen from the oracle: identical token bags, and disjoint ones.
      CHECK(oracle_cosine("apple pie recipe", "recipe for apple pie") == doctest::Approx(0.8660254037844387));
      CHECK(b.equivalent("apple pie recipe", "recipe for apple pie"));
      CHECK(oracle_cosine("apple", "carburetor") == doctest::Approx(0.0));
      CHECK_FALSE(b.equivalent("apple", "carburetor"));
      CHECK(oracle_cosine("NYC", "New York City") == doctest::Approx(1.0));
      CHECK(b.equivalent("NYC", "New York City"));
      CHECK_FALSE(b.equivalent("NYC", "Boston"));
   }

   TEST_CASE("property: equivalence is reflexive and symmetric") {
      MockHarness h;
      EmbeddingBackend emb("embedding", h.log, 0.8);
      for (const auto& a : kTextAlphabet) {
         CHECK(h.backend.equivalent(a, a));
         CHECK(emb.equivalent(a, a));
         for (const auto& b : kTextAlphabet) {
            CHECK(h.backend.equivalent(a, b) == h.backend.equivalent(b, a));
            CHECK(emb.equivalent(a, b) == emb.equivalent(b, a));
            CHECK(h.backend.equivalent(a, b) == (a == b || oracle_cosine(a, b) >= 0.8));
         }
      }
   }

   TEST_CASE("mock predicate follows the keyword rules") {
      MockHarness h;
      CHECK(h.backend.predicate("is related to apple", "name: Fuji Apple 3-pack"));
      CHECK_FALSE(h.backend.predicate("is related to apple", "name: Banana bunch"));
      CHECK(h.backend.predicate("the director overcame significant personal challenges.", "d.biography: Born in a refugee camp."));
      CHECK_FALSE(h.backend.predicate("the director overcame significant personal challenges.", "d.biography: Studied film at UCLA."));
      CHECK(h.backend.predicate("the plot is about personal resilience.", "m.plot: Clinging to hope."));
      CHECK_THROWS_AS(h.backend.predicate("", "name: x"), BackendError);
      CHECK_THROWS_AS(h.backend.predicate("   ", "name: x"), BackendError);
      try {
         h.backend.map("", "x: y");
      } catch (const BackendError& e) {
         CHECK(e.reason() == BackendError::Reason::EmptyTemplate);
      }
   }

   TEST_CASE("mock outputs are deterministic") {
      MockHarness a, b;
      for (const auto& t : kTextAlphabet) {
         std::string ctx = "v: " + t;
         CHECK(a.backend.predicate("{v} is related to apple", ctx) == b.backend.predicate("{v} is related to apple", ctx));
         CHECK(a.backend.map("Summarize {v}", ctx) == b.backend.map("Summarize {v}", ctx));
         CHECK(a.backend.score("how much about apple", ctx) == b.backend.score("how much about apple", ctx));
      }
      CHECK(a.backend.map("Summarize biography", "d.biography: Grew up in poverty. Later moved.") == "Grew up in poverty.");
      CHECK(a.backend.map("Combine all attributes of the row into a single description.", "a: x\nb: 2") == "x, 2");
   }

   TEST_CASE("every call logs exactly one record") {
      MockHarness h;
      h.backend.predicate("apple", "a: apple");
      h.backend.map("summarize", "a: apple");
      h.backend.equivalent("a", "b");
      h.backend.score("apple", "a: apple");
      h.backend.aggregate("join", {"a", "b"});
      h.backend.embed("apple");
      CHECK(h.log->count() == 6);
      CHECK(h.log->count(Capability::Predicate) == 1);
      CHECK(h.log->count(Capability::Embed) == 1);
      auto lines = util::split(h.log->to_jsonl(), '\n');
      CHECK(lines.size() >= 6);
   }

   TEST_CASE("rule set JSON round-trip and the shipped file") {
      const auto& builtin = MockRuleSet::builtin();
      CHECK(builtin.version == "mock-v1");
      auto again = MockRuleSet::from_json(builtin.to_json());
      CHECK(again.to_json() == builtin.to_json());
      CHECK(slurp(source_path("data/mock_rules_v1.json")) == builtin.to_json());
      CHECK_THROWS_AS(MockRuleSet::from_json("{\"version\": \"x\", \"predicate\": [{\"trigger\": \"a\", \"mode\": \"nope\"}]}"), ConfigError);
   }

   TEST_CASE("placeholders") {
      auto ps = extract_placeholders("{d.biography} and {{ input.m.plot }}");
      REQUIRE(ps.size() == 2);
      CHECK(ps[0].column.qualifier == "d");
      CHECK(ps[0].column.name == "biography");
      CHECK(ps[1].column.qualifier == "m");
      CHECK(ps[1].column.name == "plot");
      Schema s({{"title", ValueKind::Text, "m"}, {"plot", ValueKind::Text, "m"}});
      Tuple row{Value("Heat"), Value("A heist.")};
      CHECK(prompt_context("{m.plot} is tense", s, row) == "m.plot: A heist.");
      CHECK(prompt_context("is tense", s, row) == "m.title: Heat\nm.plot: A heist.");
      CHECK_THROWS_AS(placeholder_columns("{bogus}", s), BindingError);
   }

   TEST_CASE("LLM answers are parsed strictly") {
      CHECK(parse_bool_answer("True") == true);
      CHECK(parse_bool_answer(" false.") == false);
      CHECK(parse_bool_answer("Yes, it does") == true);
      CHECK_FALSE(parse_bool_answer("maybe").has_value());
      CHECK(parse_score_answer("score: 0.75") == doctest::Approx(0.75));
      CHECK(parse_score_answer("7") == doctest::Approx(1.0));
      CHECK_FALSE(parse_score_answer("none").has_value());
   }

   TEST_CASE("LLM backend over a stub endpoint") {
      StubLlm stub("True");
      LlmEndpointConfig cfg;
      cfg.base_url = stub.base_url();
      cfg.api_key_env = "";
      cfg.max_retries = 0;
      cfg.timeout_seconds = 5;
      CHECK(llm_complete(cfg, "sys", "user") == "True");
      auto log = std::make_shared<CallLog>();
      LlmBackend b("llm", log, 0.8, cfg);
      CHECK(b.predicate("{a} is fruit", "a: apple"));
      CHECK(log->count(Capability::Predicate) == 1);
      cfg.api_key_env = "SABER_TEST_UNSET_KEY_VARIABLE";
      CHECK_THROWS_AS(llm_complete(cfg, "s", "u"), ConfigError);
   }

   TEST_CASE("LLM config validation") {
      LlmEndpointConfig cfg;
      CHECK_NOTHROW(cfg.validate());
      cfg.base_url = "localhost:8000";
      CHECK_THROWS_AS(cfg.validate(), ConfigError);
      cfg = {};
      cfg.max_retries = -1;
      CHECK_THROWS_AS(cfg.validate(), ConfigError);
      cfg = {};
      cfg.equivalence = "vibes";
      CHECK_THROWS_AS(cfg.validate(), ConfigError);
   }
}
