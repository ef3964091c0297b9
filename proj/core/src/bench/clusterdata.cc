#include <algorithm>
#include <set>

#include "packdb/bench.h"
#include "packdb/error.h"

namespace packdb::bench {

uint64_t uniform(Rng& rng, uint64_t bound) {
  if (bound == 0) contract_violation("uniform: empty range");
  // Rejection sampling keeps the result unbiased.
  const uint64_t limit = Rng::max() - Rng::max() % bound;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

std::vector<Key> gen_clusterdata(const ClusterDataSpec& spec) {
  const uint64_t n = spec.n;
  if (n == 0) contract_violation("gen_clusterdata: n must be at least 1");
  const uint64_t range = clusterdata_range(n);
  if (range - 1 > 0xFFFFFFFFull) {
    contract_violation("gen_clusterdata: range exceeds 32-bit keys");
  }
  Rng rng(spec.seed);

  const uint64_t clusters = std::min<uint64_t>((n + 1023) / 1024, range);
  std::set<uint64_t> cuts;
  while (cuts.size() + 1 < clusters) cuts.insert(1 + uniform(rng, range - 1));
  std::vector<uint64_t> bounds = {0};
  bounds.insert(bounds.end(), cuts.begin(), cuts.end());
  bounds.push_back(range);

  std::vector<uint64_t> width(clusters), count(clusters);
  uint64_t assigned = 0;
  for (uint64_t c = 0; c < clusters; ++c) {
    width[c] = bounds[c + 1] - bounds[c];
    count[c] = std::min(width[c], n * width[c] / range);
    assigned += count[c];
  }
  // Hand out the rounding remainder, starting at a random cluster.
  for (uint64_t c = uniform(rng, clusters); assigned < n;
       c = (c + 1) % clusters) {
    if (count[c] < width[c]) {
      ++count[c];
      ++assigned;
    }
  }

  std::vector<Key> keys;
  keys.reserve(n);
  for (uint64_t c = 0; c < clusters; ++c) {
    // Selection sampling: each position is taken with probability
    // needed / remaining, which yields a uniform sorted sample.
    uint64_t needed = count[c];
    for (uint64_t x = bounds[c]; needed > 0; ++x) {
      const uint64_t remaining = bounds[c + 1] - x;
      if (uniform(rng, remaining) < needed) {
        keys.push_back(static_cast<Key>(x));
        --needed;
      }
    }
  }
  return keys;
}

}  // namespace packdb::bench
