#include "saber/semkernel/embedding_backend.hpp"
#include "saber/semkernel/mock_backend.hpp"
#include "saber/semkernel/prompt_template.hpp"
#include "saber/util/strings.hpp"
#include <algorithm>

namespace saber {

namespace {
std::string context_text(std::string_view context) {
   return util::join(context_values(context), " ");
}
} // namespace

EmbeddingBackend::EmbeddingBackend(std::string name, std::shared_ptr<CallLog> log, double threshold, HashEmbedder embedder)
   : SemanticBackend(std::move(name), std::move(log), threshold), embedder_(std::move(embedder)) {}

bool EmbeddingBackend::do_predicate(std::string_view prompt, std::string_view context) {
   return embedder_.similarity(strip_placeholders(prompt), context_text(context)) >= threshold();
}

std::string EmbeddingBackend::do_map(std::string_view prompt, std::string_view context) {
   auto instruction = strip_placeholders(prompt);
   std::string best;
   double best_sim = -2.0;
   for (const auto& v : context_values(context)) {
      for (const auto& s : mock::sentences(v)) {
         double sim = embedder_.similarity(instruction, s);
         if (sim > best_sim) {
            best_sim = sim;
            best = s;
         }
      }
   }
   return best;
}

bool EmbeddingBackend::do_equivalent(std::string_view a, std::string_view b) {
   if (a == b) return true;
   return embedder_.similarity(a, b) >= threshold();
}

double EmbeddingBackend::do_score(std::string_view prompt, std::string_view context) {
   return std::max(0.0, embedder_.similarity(strip_placeholders(prompt), context_text(context)));
}

std::string EmbeddingBackend::do_aggregate(std::string_view, const std::vector<std::string>& values) {
   if (values.empty()) return "";
   std::size_t best = 0;
   double best_sum = -1e300;
   for (std::size_t i = 0; i < values.size(); ++i) {
      double sum = 0;
      for (std::size_t j = 0; j < values.size(); ++j)
         if (i != j) sum += embedder_.similarity(values[i], values[j]);
      if (sum > best_sum) {
         best_sum = sum;
         best = i;
      }
   }
   return values[best];
}

Embedding EmbeddingBackend::do_embed(std::string_view text) {
   return embedder_.embed(text);
}

} // namespace saber
