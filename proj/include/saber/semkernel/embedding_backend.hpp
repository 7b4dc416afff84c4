#pragma once

#include "saber/semkernel/backend.hpp"
#include "saber/semkernel/embedding.hpp"

namespace saber {

/// Similarity-only backend: every capability is answered by comparing hash
/// embeddings of the instruction (placeholders removed) and the context.
///
///   predicate  cosine(prompt, context) >= threshold
///   map        the context sentence most similar to the prompt
///   score      max(0, cosine(prompt, context))
///   aggregate  the medoid value (largest summed similarity; first on ties)
class EmbeddingBackend : public SemanticBackend {
   public:
   EmbeddingBackend(std::string name, std::shared_ptr<CallLog> log, double threshold = 0.8, HashEmbedder embedder = HashEmbedder());

   protected:
   bool do_predicate(std::string_view prompt, std::string_view context) override;
   std::string do_map(std::string_view prompt, std::string_view context) override;
   bool do_equivalent(std::string_view a, std::string_view b) override;
   double do_score(std::string_view prompt, std::string_view context) override;
   std::string do_aggregate(std::string_view prompt, const std::vector<std::string>& values) override;
   Embedding do_embed(std::string_view text) override;

   private:
   HashEmbedder embedder_;
};

} // namespace saber
