#pragma once

#include "saber/semkernel/backend.hpp"
#include "saber/semkernel/embedding.hpp"
#include <string>
#include <vector>

namespace saber {

/// One rule of the deterministic mock. A rule fires when its trigger occurs
/// (case-insensitively) in the instruction text. The mode selects what it
/// computes:
///   predicate: "keywords" (any keyword among the context tokens),
///              "equivalence" (first and last context values are equivalent)
///   map:       "concat", "keyword_sentence", "first_sentence"
///   score:     "keywords" (fraction of keywords present)
///   aggregate: "count", "join"
struct MockRule {
   std::string trigger;
   std::string mode;
   std::vector<std::string> keywords;
};

/// Versioned rule table standing in for an LLM in tests and demos.
struct MockRuleSet {
   std::string version;
   std::vector<MockRule> predicate;
   std::vector<MockRule> map;
   std::vector<MockRule> score;
   std::vector<MockRule> aggregate;

   /// The rule set golden outputs are pinned to ("mock-v1").
   static const MockRuleSet& builtin();
   static MockRuleSet from_json(const std::string& text);
   static MockRuleSet load(const std::string& path);
   std::string to_json() const;
};

/// Keywords and sentence helpers shared by the mock and its tests.
namespace mock {
/// Lower-cased prompt tokens that carry meaning: stop words and tokens
/// shorter than three characters are dropped; placeholders are ignored.
std::vector<std::string> content_tokens(std::string_view prompt);
/// Sentences of text split after '.', '!' or '?', trimmed, empties dropped.
std::vector<std::string> sentences(std::string_view text);
} // namespace mock

class MockBackend : public SemanticBackend {
   public:
   MockBackend(std::string name, std::shared_ptr<CallLog> log, double threshold = 0.8, MockRuleSet rules = MockRuleSet::builtin(),
               HashEmbedder embedder = HashEmbedder());

   const MockRuleSet& rules() const { return rules_; }
   const HashEmbedder& embedder() const { return embedder_; }

   protected:
   bool do_predicate(std::string_view prompt, std::string_view context) override;
   std::string do_map(std::string_view prompt, std::string_view context) override;
   bool do_equivalent(std::string_view a, std::string_view b) override;
   double do_score(std::string_view prompt, std::string_view context) override;
   std::string do_aggregate(std::string_view prompt, const std::vector<std::string>& values) override;
   Embedding do_embed(std::string_view text) override;

   private:
   MockRuleSet rules_;
   HashEmbedder embedder_;
};

} // namespace saber
