#include "saber/semkernel/backend.hpp"
#include "saber/error.hpp"
#include "saber/util/strings.hpp"
#include "json.hpp"
#include <algorithm>
#include <cmath>

namespace saber {

double cosine(const Embedding& u, const Embedding& v) {
   if (u.size() != v.size())
      throw BackendError(BackendError::Reason::UndefinedSimilarity,
                         "cosine of vectors with different dimensions (" + std::to_string(u.size()) + " vs " + std::to_string(v.size()) + ")");
   double dot = 0, nu = 0, nv = 0;
   for (std::size_t i = 0; i < u.size(); ++i) {
      dot += u[i] * v[i];
      nu += u[i] * u[i];
      nv += v[i] * v[i];
   }
   if (nu == 0.0 || nv == 0.0) throw BackendError(BackendError::Reason::UndefinedSimilarity, "cosine of a zero-norm vector is undefined");
   if (u == v) return 1.0;
   return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

const char* to_string(Capability c) {
   switch (c) {
      case Capability::Predicate: return "predicate";
      case Capability::Map: return "map";
      case Capability::Equivalent: return "equivalent";
      case Capability::Score: return "score";
      case Capability::Aggregate: return "aggregate";
      case Capability::Embed: return "embed";
      case Capability::Complete: return "complete";
   }
   return "?";
}

void CallLog::record(std::string backend, Capability capability, std::chrono::microseconds latency) {
   std::lock_guard lock(mutex_);
   records_.push_back({records_.size() + 1, std::move(backend), capability, latency});
}

std::size_t CallLog::count() const {
   std::lock_guard lock(mutex_);
   return records_.size();
}

std::size_t CallLog::count(Capability capability) const {
   std::lock_guard lock(mutex_);
   return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [&](const CallRecord& r) { return r.capability == capability; }));
}

std::vector<CallRecord> CallLog::records() const {
   std::lock_guard lock(mutex_);
   return records_;
}

std::string CallLog::to_jsonl() const {
   std::string out;
   for (const auto& r : records()) {
      nlohmann::json j = {{"seq", r.seq}, {"backend", r.backend}, {"capability", to_string(r.capability)}, {"latency_us", r.latency.count()}};
      out += j.dump() + "\n";
   }
   return out;
}

void CallLog::clear() {
   std::lock_guard lock(mutex_);
   records_.clear();
}

SemanticBackend::SemanticBackend(std::string name, std::shared_ptr<CallLog> log, double threshold)
   : name_(std::move(name)), log_(log ? std::move(log) : std::make_shared<CallLog>()), threshold_(0.8) {
   set_threshold(threshold);
}

void SemanticBackend::set_threshold(double theta) {
   if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("similarity threshold must be in (0, 1], got " + std::to_string(theta));
   threshold_ = theta;
}

template <class F>
auto SemanticBackend::logged(Capability c, F&& f) {
   auto start = std::chrono::steady_clock::now();
   struct Recorder {
      SemanticBackend* self;
      Capability c;
      std::chrono::steady_clock::time_point start;
      ~Recorder() {
         auto us = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
         self->log_->record(self->name_, c, us);
      }
   } recorder{this, c, start};
   return f();
}

static void require_prompt(std::string_view prompt) {
   if (util::trim(prompt).empty()) throw BackendError(BackendError::Reason::EmptyTemplate, "empty semantic template");
}

bool SemanticBackend::predicate(std::string_view prompt, std::string_view context) {
   require_prompt(prompt);
   return logged(Capability::Predicate, [&] { return do_predicate(prompt, context); });
}

std::string SemanticBackend::map(std::string_view prompt, std::string_view context) {
   require_prompt(prompt);
   return logged(Capability::Map, [&] { return do_map(prompt, context); });
}

bool SemanticBackend::equivalent(std::string_view a, std::string_view b) {
   return logged(Capability::Equivalent, [&] { return do_equivalent(a, b); });
}

double SemanticBackend::score(std::string_view prompt, std::string_view context) {
   require_prompt(prompt);
   return logged(Capability::Score, [&] { return std::clamp(do_score(prompt, context), 0.0, 1.0); });
}

std::string SemanticBackend::aggregate(std::string_view prompt, const std::vector<std::string>& values) {
   require_prompt(prompt);
   return logged(Capability::Aggregate, [&] { return do_aggregate(prompt, values); });
}

Embedding SemanticBackend::embed(std::string_view text) {
   return logged(Capability::Embed, [&] { return do_embed(text); });
}

bool SemanticBackend::do_equivalent(std::string_view a, std::string_view b) {
   if (a == b) return true;
   return cosine(do_embed(a), do_embed(b)) >= threshold_;
}

void BackendRegistry::add(std::shared_ptr<SemanticBackend> backend) {
   auto key = util::to_lower(backend->name());
   backends_[key] = std::move(backend);
   if (default_.empty()) default_ = key;
}

void BackendRegistry::alias(const std::string& tag, const std::string& target) {
   auto t = canonical(target);
   if (!backends_.count(t)) throw ConfigError("cannot alias '" + tag + "' to unknown backend '" + target + "'");
   aliases_[util::to_lower(tag)] = t;
}

void BackendRegistry::set_default(const std::string& name) {
   auto t = canonical(name);
   if (!backends_.count(t)) throw ConfigError("default backend '" + name + "' is not registered");
   default_ = t;
}

std::string BackendRegistry::canonical(std::string_view tag) const {
   auto key = util::to_lower(tag);
   if (auto it = aliases_.find(key); it != aliases_.end()) return it->second;
   return key;
}

bool BackendRegistry::contains(std::string_view tag) const {
   return tag.empty() ? backends_.count(default_) > 0 : backends_.count(canonical(tag)) > 0;
}

SemanticBackend& BackendRegistry::resolve(std::string_view tag) const {
   auto key = tag.empty() ? default_ : canonical(tag);
   auto it = backends_.find(key);
   if (it == backends_.end()) {
      if (tag.empty()) throw ConfigError("no default semantic backend registered");
      throw BindingError("unknown semantic backend '" + std::string(tag) + "'");
   }
   return *it->second;
}

std::vector<std::string> BackendRegistry::names() const {
   std::vector<std::string> out;
   for (const auto& [k, _] : backends_) out.push_back(k);
   for (const auto& [k, _] : aliases_) out.push_back(k);
   std::sort(out.begin(), out.end());
   return out;
}

std::vector<std::string> context_values(std::string_view context) {
   std::vector<std::string> out;
   for (auto& line : util::split(context, '\n')) {
      auto pos = line.find(": ");
      out.push_back(pos == std::string::npos ? line : line.substr(pos + 2));
   }
   return out;
}

} // namespace saber
