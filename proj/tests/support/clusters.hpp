#pragma once

// Fixture pairs for the intersection composition check. Values come from
// clusters whose members are mutually equivalent under the hash embedder and
// unrelated across clusters, so equivalence is transitive on this corpus.

#include "support/gen.hpp"
#include <string>
#include <vector>

namespace saber::testing {

inline const std::vector<std::vector<std::string>>& equivalence_clusters() {
   static const std::vector<std::vector<std::string>> clusters = {
      {"NYC", "New York City", "new york city"},
      {"apple pie recipe", "recipe for apple pie", "Apple Pie Recipe"},
      {"banana bread", "bread banana"},
      {"Boston", "boston"},
      {"carburetor"},
      {"red wine", "Red Wine"},
   };
   return clusters;
}

struct ClusterPair {
   Relation left;
   Relation right;
};

/// count pairs of 1..4-row single-column relations drawn from the clusters.
inline std::vector<ClusterPair> cluster_pairs(std::size_t count, std::uint64_t seed) {
   Rng rng(seed);
   const auto& cl = equivalence_clusters();
   auto draw = [&](const std::string& name) {
      std::vector<std::string> values;
      std::size_t n = pick(rng, 4) + (name == "l" ? 1 : 0);
      for (std::size_t i = 0; i < n; ++i) {
         const auto& c = cl[pick(rng, cl.size())];
         values.push_back(c[pick(rng, c.size())]);
      }
      return text_relation(name, "v", values);
   };
   std::vector<ClusterPair> out;
   for (std::size_t i = 0; i < count; ++i) out.push_back({draw("l"), draw("r")});
   return out;
}

} // namespace saber::testing
