#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "saber/semkernel/llm_backend.hpp"
#include "saber/error.hpp"
#include "saber/util/strings.hpp"
#include "httplib.h"
#include "json.hpp"
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace saber {

namespace {

struct Endpoint {
   std::string origin; ///< scheme://host[:port]
   std::string prefix; ///< path prefix without trailing slash
};

Endpoint split_url(const std::string& url) {
   auto scheme_end = url.find("://");
   if (scheme_end == std::string::npos) throw ConfigError("LLM base_url needs a scheme: '" + url + "'");
   auto path_start = url.find('/', scheme_end + 3);
   Endpoint e;
   e.origin = url.substr(0, path_start);
   e.prefix = path_start == std::string::npos ? "" : url.substr(path_start);
   while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
   return e;
}

bool retryable_status(int status) {
   return status == 429 || status >= 500;
}

struct Attempt {
   enum class Outcome { Ok, Retry, Fatal } outcome;
   std::string body;
   int status = 0;
   httplib::Error error = httplib::Error::Success;
};

Attempt post_once(const LlmEndpointConfig& cfg, const Endpoint& ep, const std::string& payload) {
   httplib::Client client(ep.origin);
   auto secs = std::chrono::duration<double>(cfg.timeout_seconds);
   auto us = std::chrono::duration_cast<std::chrono::microseconds>(secs);
   client.set_connection_timeout(us);
   client.set_read_timeout(us);
   client.set_write_timeout(us);
   httplib::Headers headers;
   if (!cfg.api_key_env.empty()) {
      const char* key = std::getenv(cfg.api_key_env.c_str());
      if (!key || !*key) throw ConfigError("environment variable " + cfg.api_key_env + " holding the LLM API key is not set");
      headers.emplace("Authorization", std::string("Bearer ") + key);
   }
   auto res = client.Post(ep.prefix + "/chat/completions", headers, payload, "application/json");
   if (!res) {
      return {Attempt::Outcome::Retry, {}, 0, res.error()};
   }
   if (res->status >= 200 && res->status < 300) return {Attempt::Outcome::Ok, res->body, res->status};
   return {retryable_status(res->status) ? Attempt::Outcome::Retry : Attempt::Outcome::Fatal, res->body, res->status};
}

std::string extract_content(const std::string& body) {
   try {
      auto j = nlohmann::json::parse(body);
      const auto& content = j.at("choices").at(0).at("message").at("content");
      if (!content.is_string()) throw BackendError(BackendError::Reason::MalformedResponse, "completion content is not a string", body);
      return content.get<std::string>();
   } catch (const nlohmann::json::exception& e) {
      throw BackendError(BackendError::Reason::MalformedResponse, std::string("malformed completion body: ") + e.what(), body);
   }
}

bool is_timeout(httplib::Error e) {
   return e == httplib::Error::Read || e == httplib::Error::Write || e == httplib::Error::ConnectionTimeout;
}

const char* kSystem = "You are a precise data processing assistant. Follow the instruction exactly and answer concisely.";

} // namespace

void LlmEndpointConfig::validate() const {
   split_url(base_url);
   if (model.empty()) throw ConfigError("LLM model name is empty");
   if (max_retries < 0) throw ConfigError("LLM max_retries must be >= 0");
   if (!(timeout_seconds > 0)) throw ConfigError("LLM timeout must be positive");
   if (concurrency == 0 || concurrency > 1024) throw ConfigError("LLM concurrency must be in [1, 1024]");
   if (equivalence != "embedding" && equivalence != "llm") throw ConfigError("LLM equivalence mode must be 'embedding' or 'llm'");
}

std::string llm_complete(const LlmEndpointConfig& cfg, std::string_view system, std::string_view user, CallLog* log) {
   auto ep = split_url(cfg.base_url);
   nlohmann::json payload = {
      {"model", cfg.model},
      {"temperature", cfg.temperature},
      {"messages", {{{"role", "system"}, {"content", system}}, {{"role", "user"}, {"content", user}}}},
   };
   auto body = payload.dump();
   auto start = std::chrono::steady_clock::now();
   auto record = [&] {
      if (log)
         log->record("llm", Capability::Complete,
                     std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start));
   };

   Attempt last{Attempt::Outcome::Retry, {}, 0, httplib::Error::Success};
   for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(std::chrono::duration<double>(cfg.backoff_seconds * std::pow(2.0, attempt - 1)));
      last = post_once(cfg, ep, body);
      if (last.outcome == Attempt::Outcome::Ok) {
         record();
         return extract_content(last.body);
      }
      if (last.outcome == Attempt::Outcome::Fatal) {
         record();
         throw BackendError(BackendError::Reason::HttpStatus, "LLM endpoint returned HTTP " + std::to_string(last.status), last.body);
      }
   }
   record();
   auto tries = std::to_string(cfg.max_retries + 1) + " attempt(s)";
   if (last.status != 0)
      throw BackendError(BackendError::Reason::RetriesExhausted, "LLM endpoint kept failing with HTTP " + std::to_string(last.status) + " after " + tries,
                         last.body);
   if (is_timeout(last.error)) throw BackendError(BackendError::Reason::Timeout, "LLM request timed out after " + tries);
   throw BackendError(BackendError::Reason::Transport, "LLM request failed (" + httplib::to_string(last.error) + ") after " + tries);
}

std::optional<bool> parse_bool_answer(std::string_view text) {
   std::string word;
   for (char c : util::trim(text)) {
      if (std::isalpha(static_cast<unsigned char>(c))) word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      else if (!word.empty()) break;
   }
   if (word == "true" || word == "yes") return true;
   if (word == "false" || word == "no") return false;
   return std::nullopt;
}

std::optional<double> parse_score_answer(std::string_view text) {
   for (std::size_t i = 0; i < text.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) continue;
      std::size_t j = i;
      while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.')) ++j;
      try {
         double v = std::stod(std::string(text.substr(i, j - i)));
         return std::clamp(v, 0.0, 1.0);
      } catch (const std::exception&) {
         return std::nullopt;
      }
   }
   return std::nullopt;
}

LlmBackend::LlmBackend(std::string name, std::shared_ptr<CallLog> log, double threshold, LlmEndpointConfig config)
   : SemanticBackend(std::move(name), std::move(log), threshold), config_(std::move(config)) {
   config_.validate();
   slots_ = std::make_unique<std::counting_semaphore<1024>>(static_cast<std::ptrdiff_t>(config_.concurrency));
}

std::string LlmBackend::complete(std::string_view system, std::string_view user) {
   slots_->acquire();
   struct Release {
      std::counting_semaphore<1024>* s;
      ~Release() { s->release(); }
   } release{slots_.get()};
   return llm_complete(config_, system, user, nullptr);
}

bool LlmBackend::ask_bool(std::string_view system, std::string_view user) {
   std::string raw;
   for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      raw = complete(system, user);
      if (auto b = parse_bool_answer(raw)) return *b;
   }
   throw BackendError(BackendError::Reason::Unparseable, "could not read True/False from the model answer", raw);
}

bool LlmBackend::do_predicate(std::string_view prompt, std::string_view context) {
   std::string user = std::string(prompt) + "\n\n" + std::string(context) + "\n\nReturn True or False.";
   return ask_bool(kSystem, user);
}

std::string LlmBackend::do_map(std::string_view prompt, std::string_view context) {
   return std::string(util::trim(complete(kSystem, std::string(prompt) + "\n\n" + std::string(context))));
}

bool LlmBackend::do_equivalent(std::string_view a, std::string_view b) {
   if (a == b) return true;
   if (config_.equivalence == "embedding") return embedder_.similarity(a, b) >= threshold();
   std::string user = "Do these two values refer to the same thing?\nA: " + std::string(a) + "\nB: " + std::string(b) + "\n\nReturn True or False.";
   return ask_bool(kSystem, user);
}

double LlmBackend::do_score(std::string_view prompt, std::string_view context) {
   std::string user = std::string(prompt) + "\n\n" + std::string(context) + "\n\nRate how well this matches on a scale from 0 to 1. Answer with the number only.";
   std::string raw;
   for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      raw = complete(kSystem, user);
      if (auto v = parse_score_answer(raw)) return *v;
   }
   throw BackendError(BackendError::Reason::Unparseable, "could not read a score from the model answer", raw);
}

std::string LlmBackend::do_aggregate(std::string_view prompt, const std::vector<std::string>& values) {
   std::string user = std::string(prompt) + "\n\nValues:\n";
   for (const auto& v : values) user += "- " + v + "\n";
   return std::string(util::trim(complete(kSystem, user)));
}

Embedding LlmBackend::do_embed(std::string_view text) {
   return embedder_.embed(text);
}

} // namespace saber
