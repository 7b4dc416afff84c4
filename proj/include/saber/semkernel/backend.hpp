#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace saber {

using Embedding = std::vector<double>;

/// Cosine similarity. Exactly 1.0 for identical non-zero vectors. Throws
/// BackendError (UndefinedSimilarity) for a zero-norm operand or mismatched
/// dimensions.
double cosine(const Embedding& u, const Embedding& v);

/// Complete is a raw chat completion made outside the capability interface.
enum class Capability { Predicate, Map, Equivalent, Score, Aggregate, Embed, Complete };
const char* to_string(Capability c);

struct CallRecord {
   std::uint64_t seq = 0;
   std::string backend;
   Capability capability = Capability::Predicate;
   std::chrono::microseconds latency{0};
};

/// Thread-safe record of every semantic capability invocation.
class CallLog {
   public:
   void record(std::string backend, Capability capability, std::chrono::microseconds latency);
   std::size_t count() const;
   std::size_t count(Capability capability) const;
   std::vector<CallRecord> records() const;
   /// One JSON object per line: seq, backend, capability, latency_us.
   std::string to_jsonl() const;
   void clear();

   private:
   mutable std::mutex mutex_;
   std::vector<CallRecord> records_;
};

/// The capability interface every semantic backend implements. Public entry
/// points validate input and log exactly one CallLog record per invocation;
/// implementations override the protected do_* hooks.
class SemanticBackend {
   public:
   SemanticBackend(std::string name, std::shared_ptr<CallLog> log, double threshold);
   virtual ~SemanticBackend() = default;
   SemanticBackend(const SemanticBackend&) = delete;
   SemanticBackend& operator=(const SemanticBackend&) = delete;

   const std::string& name() const { return name_; }
   double threshold() const { return threshold_; }
   void set_threshold(double theta);
   CallLog& log() const { return *log_; }
   const std::shared_ptr<CallLog>& shared_log() const { return log_; }

   bool predicate(std::string_view prompt, std::string_view context);
   std::string map(std::string_view prompt, std::string_view context);
   /// Symmetric and reflexive similarity test (cosine >= threshold for the
   /// shipped backends).
   bool equivalent(std::string_view a, std::string_view b);
   /// In [0, 1].
   double score(std::string_view prompt, std::string_view context);
   std::string aggregate(std::string_view prompt, const std::vector<std::string>& values);
   Embedding embed(std::string_view text);

   /// How many calls an operator may have in flight at once.
   virtual std::size_t max_concurrency() const { return 1; }

   protected:
   virtual bool do_predicate(std::string_view prompt, std::string_view context) = 0;
   virtual std::string do_map(std::string_view prompt, std::string_view context) = 0;
   virtual bool do_equivalent(std::string_view a, std::string_view b);
   virtual double do_score(std::string_view prompt, std::string_view context) = 0;
   virtual std::string do_aggregate(std::string_view prompt, const std::vector<std::string>& values) = 0;
   virtual Embedding do_embed(std::string_view text) = 0;

   private:
   template <class F>
   auto logged(Capability c, F&& f);

   std::string name_;
   std::shared_ptr<CallLog> log_;
   double threshold_;
};

/// Name -> backend table with aliases. The empty tag resolves to the default.
class BackendRegistry {
   public:
   void add(std::shared_ptr<SemanticBackend> backend);
   /// Routes tag to an already registered backend name.
   void alias(const std::string& tag, const std::string& target);
   void set_default(const std::string& name);
   const std::string& default_name() const { return default_; }
   bool contains(std::string_view tag) const;
   SemanticBackend& resolve(std::string_view tag) const;
   std::vector<std::string> names() const;

   private:
   std::string canonical(std::string_view tag) const;

   std::map<std::string, std::shared_ptr<SemanticBackend>> backends_;
   std::map<std::string, std::string> aliases_;
   std::string default_;
};

/// Values of "label: value" context lines (the text after the first ": ").
std::vector<std::string> context_values(std::string_view context);

} // namespace saber
