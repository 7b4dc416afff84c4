#pragma once

#include "saber/semkernel/backend.hpp"
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace saber {

/// 64-bit FNV-1a. basis defaults to the standard offset basis.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 14695981039346656037ULL);

/// Deterministic bag-of-words embedding.
///
/// Text is split into lower-case alphanumeric tokens, tokens found in the
/// alias table are replaced by their expansion, and each token adds 1 to
/// bucket fnv1a64(token, basis ^ seed) % 64. The result is L2-normalized;
/// text without tokens embeds to the zero vector.
class HashEmbedder {
   public:
   static constexpr std::size_t kDimensions = 64;
   static constexpr std::uint64_t kDefaultSeed = 0;

   HashEmbedder();
   HashEmbedder(std::uint64_t seed, std::map<std::string, std::string> aliases);

   static const std::map<std::string, std::string>& default_aliases();

   std::vector<std::string> tokens(std::string_view text) const;
   Embedding embed(std::string_view text) const;
   /// Cosine of the two embeddings; 0 when either has no tokens.
   double similarity(std::string_view a, std::string_view b) const;

   private:
   std::uint64_t seed_;
   std::map<std::string, std::string> aliases_;
};

} // namespace saber
