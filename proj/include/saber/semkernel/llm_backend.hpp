#pragma once

#include "saber/semkernel/backend.hpp"
#include "saber/semkernel/embedding.hpp"
#include <memory>
#include <optional>
#include <semaphore>
#include <string>

namespace saber {

struct LlmEndpointConfig {
   /// Scheme, host, optional port and path prefix, e.g. "https://api.openai.com/v1".
   std::string base_url = "http://127.0.0.1:8000/v1";
   std::string model = "gpt-4o-mini";
   /// Environment variable holding the bearer token. Empty: send no key.
   std::string api_key_env = "OPENAI_API_KEY";
   double temperature = 0.0;
   int max_retries = 2;
   double timeout_seconds = 30.0;
   std::size_t concurrency = 4;
   double backoff_seconds = 0.25; ///< first retry delay; doubles each retry
   /// "embedding" (hash embeddings) or "llm" (ask the model) for equivalent().
   std::string equivalence = "embedding";

   void validate() const;
};

/// POSTs one chat completion to {base_url}/chat/completions and returns the
/// assistant text. 5xx, 429, connection failures and timeouts are retried
/// with exponential backoff. Throws BackendError with reason Timeout,
/// RetriesExhausted, HttpStatus (other non-2xx), MalformedResponse or
/// Transport. When log is non-null the call is recorded as Capability::Complete.
std::string llm_complete(const LlmEndpointConfig& config, std::string_view system, std::string_view user, CallLog* log = nullptr);

/// Parses a constrained boolean answer ("True"/"False", "yes"/"no", leading
/// word only, punctuation ignored). nullopt when neither.
std::optional<bool> parse_bool_answer(std::string_view text);
/// First decimal number in text, clamped to [0, 1]. nullopt when absent.
std::optional<double> parse_score_answer(std::string_view text);

class LlmBackend : public SemanticBackend {
   public:
   LlmBackend(std::string name, std::shared_ptr<CallLog> log, double threshold, LlmEndpointConfig config);

   const LlmEndpointConfig& config() const { return config_; }
   std::size_t max_concurrency() const override { return config_.concurrency; }

   protected:
   bool do_predicate(std::string_view prompt, std::string_view context) override;
   std::string do_map(std::string_view prompt, std::string_view context) override;
   bool do_equivalent(std::string_view a, std::string_view b) override;
   double do_score(std::string_view prompt, std::string_view context) override;
   std::string do_aggregate(std::string_view prompt, const std::vector<std::string>& values) override;
   Embedding do_embed(std::string_view text) override;

   private:
   std::string complete(std::string_view system, std::string_view user);
   bool ask_bool(std::string_view system, std::string_view user);

   LlmEndpointConfig config_;
   HashEmbedder embedder_;
   std::unique_ptr<std::counting_semaphore<1024>> slots_;
};

} // namespace saber
