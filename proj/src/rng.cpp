// SPDX-License-Identifier: Apache-2.0
#include "calibatlas/rng.hpp"

#include <cmath>

namespace calibatlas {

std::vector<double> Rng::simplex_weights(std::size_t k) {
  std::vector<double> w(k);
  for (;;) {
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      // Exponential(1) via inverse CDF; 1 - uniform() is in (0, 1].
      w[i] = -std::log(1.0 - uniform());
      sum += w[i];
    }
    if (sum > 0.0) {
      for (auto& x : w) x /= sum;
      return w;
    }
  }
}

Pmf Rng::simplex(const SpacePtr& space) {
  return Pmf(space, simplex_weights(space->size()));
}

std::uint64_t Rng::derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed ^ (salt * 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace calibatlas
