#include "saber/semkernel/embedding.hpp"
#include "saber/util/strings.hpp"
#include <cmath>

namespace saber {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
   std::uint64_t h = basis;
   for (unsigned char c : bytes) {
      h ^= c;
      h *= 1099511628211ULL;
   }
   return h;
}

HashEmbedder::HashEmbedder() : HashEmbedder(kDefaultSeed, default_aliases()) {}

HashEmbedder::HashEmbedder(std::uint64_t seed, std::map<std::string, std::string> aliases)
   : seed_(seed), aliases_(std::move(aliases)) {}

const std::map<std::string, std::string>& HashEmbedder::default_aliases() {
   static const std::map<std::string, std::string> aliases = {
      {"nyc", "new york city"},
      {"la", "los angeles"},
      {"sf", "san francisco"},
   };
   return aliases;
}

std::vector<std::string> HashEmbedder::tokens(std::string_view text) const {
   std::vector<std::string> out;
   for (auto& tok : util::word_tokens(text)) {
      auto it = aliases_.find(tok);
      if (it == aliases_.end()) {
         out.push_back(std::move(tok));
         continue;
      }
      for (auto& t : util::word_tokens(it->second)) out.push_back(std::move(t));
   }
   return out;
}

Embedding HashEmbedder::embed(std::string_view text) const {
   Embedding v(kDimensions, 0.0);
   const std::uint64_t basis = 14695981039346656037ULL ^ seed_;
   for (const auto& tok : tokens(text)) v[fnv1a64(tok, basis) % kDimensions] += 1.0;
   double norm = 0;
   for (double x : v) norm += x * x;
   if (norm > 0) {
      norm = std::sqrt(norm);
      for (double& x : v) x /= norm;
   }
   return v;
}

double HashEmbedder::similarity(std::string_view a, std::string_view b) const {
   auto u = embed(a);
   auto v = embed(b);
   auto zero = [](const Embedding& e) {
      for (double x : e)
         if (x != 0.0) return false;
      return true;
   };
   if (zero(u) || zero(v)) return 0.0;
   return cosine(u, v);
}

} // namespace saber
