// SPDX-License-Identifier: Apache-2.0
#ifndef CALIBATLAS_RNG_HPP_
#define CALIBATLAS_RNG_HPP_

#include <cstdint>
#include <random>
#include <vector>

#include "calibatlas/outcomes.hpp"

namespace calibatlas {

// Deterministic RNG wrapper. All randomized code paths in the library draw
// through this class so that a seed fully determines the output bytes; the
// raw engine is never exposed and std:: distributions are avoided because
// their algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); n must be positive.
  std::uint64_t integer(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  bool coin() { return (gen_() & 1u) != 0; }

  // Uniform point on the probability simplex (exponential normalization).
  std::vector<double> simplex_weights(std::size_t k);
  Pmf simplex(const SpacePtr& space);

  // Derive an independent stream for a sub-task (splitmix64 of seed ^ salt).
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

 private:
  std::mt19937_64 gen_;
};

}  // namespace calibatlas

#endif  // CALIBATLAS_RNG_HPP_
