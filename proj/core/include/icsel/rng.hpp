#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace icsel {

/// Seeded RNG with an explicitly specified bounded-draw reduction, so that
/// sampled index sequences are identical across runs and platforms.
class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    /// Uniform draw in [0, n). Modulo reduction; bias is negligible for the
    /// corpus sizes this tool handles (n << 2^64).
    std::uint64_t below(std::uint64_t n) { return eng_() % n; }

  private:
    std::mt19937_64 eng_;
};

/// Fisher-Yates permutation of 0..n-1.
inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    SeededRng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        std::swap(perm[i - 1], perm[rng.below(i)]);
    }
    return perm;
}

/// k distinct indices drawn uniformly from 0..n-1, returned in ascending
/// order. Nested property: for fixed n and seed, the result for k1 <= k2 is a
/// subset of the result for k2.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
    auto perm = seeded_permutation(n, seed);
    perm.resize(k);
    std::sort(perm.begin(), perm.end());
    return perm;
}

}  // namespace icsel
