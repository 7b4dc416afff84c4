#include "saber/semkernel/mock_backend.hpp"
#include "saber/error.hpp"
#include "saber/semkernel/prompt_template.hpp"
#include "saber/util/strings.hpp"
#include "json.hpp"
#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace saber {

namespace {

const std::vector<std::string> kChallenge = {"refugee", "orphaned", "prisoner", "poverty"};
const std::vector<std::string> kResilience = {"hope", "escape", "perseverance"};

const std::set<std::string>& stop_words() {
   static const std::set<std::string> words = {
      "the", "and", "for", "are", "was", "were", "this", "that", "with", "from", "into", "about", "is", "of", "to", "in",
      "a", "an", "or", "if", "its", "it", "on", "by", "be", "as", "at", "true", "false", "return", "whether", "row", "input",
   };
   return words;
}

const MockRule* find_rule(const std::vector<MockRule>& rules, std::string_view prompt) {
   for (const auto& r : rules)
      if (util::icontains(prompt, r.trigger)) return &r;
   return nullptr;
}

std::set<std::string> context_tokens(std::string_view context) {
   std::set<std::string> out;
   for (const auto& v : context_values(context))
      for (auto& t : util::word_tokens(v)) out.insert(std::move(t));
   return out;
}

std::size_t keyword_hits(const std::vector<std::string>& keywords, const std::set<std::string>& tokens) {
   std::size_t n = 0;
   for (const auto& k : keywords)
      if (tokens.count(util::to_lower(k))) ++n;
   return n;
}

bool has_keyword(std::string_view text, const std::vector<std::string>& keywords) {
   auto toks = util::word_tokens(text);
   std::set<std::string> set(toks.begin(), toks.end());
   return keyword_hits(keywords, set) > 0;
}

MockRule rule_from_json(const nlohmann::json& j) {
   MockRule r;
   r.trigger = j.at("trigger").get<std::string>();
   r.mode = j.at("mode").get<std::string>();
   if (j.contains("keywords")) r.keywords = j.at("keywords").get<std::vector<std::string>>();
   return r;
}

nlohmann::ordered_json rule_to_json(const MockRule& r) {
   nlohmann::ordered_json j = {{"trigger", r.trigger}, {"mode", r.mode}};
   if (!r.keywords.empty()) j["keywords"] = r.keywords;
   return j;
}

void check_modes(const std::vector<MockRule>& rules, std::initializer_list<const char*> allowed, const char* section) {
   for (const auto& r : rules) {
      if (r.trigger.empty()) throw ConfigError(std::string("mock rule in '") + section + "' has an empty trigger");
      bool ok = false;
      for (const char* a : allowed) ok = ok || r.mode == a;
      if (!ok) throw ConfigError(std::string("mock rule in '") + section + "' has unknown mode '" + r.mode + "'");
   }
}

} // namespace

const MockRuleSet& MockRuleSet::builtin() {
   static const MockRuleSet rules = [] {
      MockRuleSet r;
      r.version = "mock-v1";
      r.predicate = {
         {"describe the same entity", "equivalence", {}},
         {"apple", "keywords", {"apple"}},
         {"challenges", "keywords", kChallenge},
         {"resilience", "keywords", kResilience},
      };
      r.map = {
         {"combine all attributes", "concat", {}},
         {"summar", "keyword_sentence", kChallenge},
      };
      r.score = {
         {"apple", "keywords", {"apple"}},
         {"challenges", "keywords", kChallenge},
         {"resilience", "keywords", kResilience},
      };
      r.aggregate = {
         {"count", "count", {}},
      };
      return r;
   }();
   return rules;
}

MockRuleSet MockRuleSet::from_json(const std::string& text) {
   try {
      auto j = nlohmann::json::parse(text);
      MockRuleSet r;
      r.version = j.at("version").get<std::string>();
      auto section = [&](const char* name, std::vector<MockRule>& out) {
         if (!j.contains(name)) return;
         for (const auto& item : j.at(name)) out.push_back(rule_from_json(item));
      };
      section("predicate", r.predicate);
      section("map", r.map);
      section("score", r.score);
      section("aggregate", r.aggregate);
      check_modes(r.predicate, {"keywords", "equivalence"}, "predicate");
      check_modes(r.map, {"concat", "keyword_sentence", "first_sentence"}, "map");
      check_modes(r.score, {"keywords"}, "score");
      check_modes(r.aggregate, {"count", "join"}, "aggregate");
      return r;
   } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("invalid mock rule set: ") + e.what());
   }
}

MockRuleSet MockRuleSet::load(const std::string& path) {
   std::ifstream in(path, std::ios::binary);
   if (!in) throw IoError("cannot read mock rule set '" + path + "'");
   std::stringstream ss;
   ss << in.rdbuf();
   return from_json(ss.str());
}

std::string MockRuleSet::to_json() const {
   nlohmann::ordered_json j;
   j["version"] = version;
   auto section = [&](const char* name, const std::vector<MockRule>& rules) {
      j[name] = nlohmann::ordered_json::array();
      for (const auto& r : rules) j[name].push_back(rule_to_json(r));
   };
   section("predicate", predicate);
   section("map", map);
   section("score", score);
   section("aggregate", aggregate);
   return j.dump(2) + "\n";
}

namespace mock {

std::vector<std::string> content_tokens(std::string_view prompt) {
   std::vector<std::string> out;
   for (auto& t : util::word_tokens(strip_placeholders(prompt))) {
      if (t.size() < 3 || stop_words().count(t)) continue;
      if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(std::move(t));
   }
   return out;
}

std::vector<std::string> sentences(std::string_view text) {
   std::vector<std::string> out;
   std::string cur;
   auto flush = [&] {
      auto t = util::trim(cur);
      if (!t.empty()) out.emplace_back(t);
      cur.clear();
   };
   for (std::size_t i = 0; i < text.size(); ++i) {
      cur += text[i];
      bool end = text[i] == '.' || text[i] == '!' || text[i] == '?';
      if (end && (i + 1 == text.size() || text[i + 1] == ' ' || text[i + 1] == '\n')) flush();
   }
   flush();
   return out;
}

} // namespace mock

MockBackend::MockBackend(std::string name, std::shared_ptr<CallLog> log, double threshold, MockRuleSet rules, HashEmbedder embedder)
   : SemanticBackend(std::move(name), std::move(log), threshold), rules_(std::move(rules)), embedder_(std::move(embedder)) {}

bool MockBackend::do_predicate(std::string_view prompt, std::string_view context) {
   if (const auto* rule = find_rule(rules_.predicate, prompt)) {
      if (rule->mode == "equivalence") {
         auto values = context_values(context);
         if (values.size() < 2) return false;
         const auto& a = values.front();
         const auto& b = values.back();
         return a == b || embedder_.similarity(a, b) >= threshold();
      }
      return keyword_hits(rule->keywords, context_tokens(context)) > 0;
   }
   auto wanted = mock::content_tokens(prompt);
   auto have = context_tokens(context);
   return keyword_hits(wanted, have) > 0;
}

std::string MockBackend::do_map(std::string_view prompt, std::string_view context) {
   auto values = context_values(context);
   const auto* rule = find_rule(rules_.map, prompt);
   std::string mode = rule ? rule->mode : "first_sentence";
   if (mode == "concat") return util::join(values, ", ");
   if (mode == "keyword_sentence") {
      for (const auto& v : values)
         for (const auto& s : mock::sentences(v))
            if (has_keyword(s, rule->keywords)) return s;
   }
   for (const auto& v : values) {
      auto s = mock::sentences(v);
      if (!s.empty()) return s.front();
   }
   return "";
}

bool MockBackend::do_equivalent(std::string_view a, std::string_view b) {
   if (a == b) return true;
   return embedder_.similarity(a, b) >= threshold();
}

double MockBackend::do_score(std::string_view prompt, std::string_view context) {
   auto have = context_tokens(context);
   if (const auto* rule = find_rule(rules_.score, prompt)) {
      if (rule->keywords.empty()) return 0.0;
      return static_cast<double>(keyword_hits(rule->keywords, have)) / static_cast<double>(rule->keywords.size());
   }
   auto wanted = mock::content_tokens(prompt);
   if (wanted.empty()) return 0.0;
   return static_cast<double>(keyword_hits(wanted, have)) / static_cast<double>(wanted.size());
}

std::string MockBackend::do_aggregate(std::string_view prompt, const std::vector<std::string>& values) {
   const auto* rule = find_rule(rules_.aggregate, prompt);
   if (rule && rule->mode == "count") return std::to_string(values.size());
   return util::join(values, "; ");
}

Embedding MockBackend::do_embed(std::string_view text) {
   return embedder_.embed(text);
}

} // namespace saber
