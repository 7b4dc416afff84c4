#include "saber/error.hpp"
#include "saber/rewriter/rewriter.hpp"
#include "saber/util/strings.hpp"
#include "json.hpp"

namespace saber {

const PromptCatalog& PromptCatalog::builtin() {
   static const PromptCatalog catalog = [] {
      PromptCatalog c;
      c.version = "prompts-v1";
      c.entries.push_back(
         {"SEM_SELECT",
          "Summarize biography of the director related to overcoming challenges in one short sentence.",
          {{"lotus", "Summarize {d.biography} focusing on overcoming challenges in a single sentence"},
           {"docetl",
            "Director Biography: {{ input.d.biography }}\n\nSummarize the directors biography focusing on how they overcame "
            "challenges in one short sentence."},
           {"palimpzest", "Summarize biography of the director related to overcoming challenges in one short sentence."}}});
      c.entries.push_back(
         {"SEM_WHERE",
          "the director overcame significant personal challenges.",
          {{"lotus", "{d.biography} highlights overcoming significant personal challenges"},
           {"docetl",
            "Director Biography: {{ input.d.biography }}\n\nAnalyze this biography to determine if the director overcame "
            "significant personal challenges and return True or False."},
           {"palimpzest", "the director overcame significant personal challenges"}}});
      c.entries.push_back({"SEM_WHERE",
                           "the plot is about personal resilience.",
                           {{"lotus", "{m.plot} describes personal resilience"},
                            {"docetl", "Movie Plot: {{ input.m.plot }}\n\nAnalyze if the plot is about personal resilience and return True or False."},
                            {"palimpzest", "the plot is about personal resilience"}}});
      return c;
   }();
   return catalog;
}

PromptCatalog PromptCatalog::from_json(const std::string& text) {
   nlohmann::ordered_json j;
   try {
      j = nlohmann::ordered_json::parse(text);
   } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("prompt catalog: ") + e.what());
   }
   PromptCatalog c;
   try {
      c.version = j.at("version").get<std::string>();
      for (const auto& e : j.at("entries")) {
         Entry entry;
         entry.kind = e.at("kind").get<std::string>();
         entry.template_text = e.at("template").get<std::string>();
         for (const auto& [target, phrase] : e.at("targets").items()) entry.targets.emplace_back(target, phrase.get<std::string>());
         c.entries.push_back(std::move(entry));
      }
   } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("prompt catalog: ") + e.what());
   }
   return c;
}

std::string PromptCatalog::to_json() const {
   nlohmann::ordered_json j;
   j["version"] = version;
   j["entries"] = nlohmann::ordered_json::array();
   for (const auto& e : entries) {
      nlohmann::ordered_json je;
      je["kind"] = e.kind;
      je["template"] = e.template_text;
      je["targets"] = nlohmann::ordered_json::object();
      for (const auto& [t, phrase] : e.targets) je["targets"][t] = phrase;
      j["entries"].push_back(std::move(je));
   }
   return j.dump(2) + "\n";
}

const std::string* PromptCatalog::find(std::string_view kind, std::string_view template_text, std::string_view target) const {
   for (const auto& e : entries) {
      if (!util::iequals(e.kind, kind) || e.template_text != template_text) continue;
      for (const auto& [t, phrase] : e.targets)
         if (util::iequals(t, target)) return &phrase;
   }
   return nullptr;
}

} // namespace saber
