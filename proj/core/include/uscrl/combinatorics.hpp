#ifndef USCRL_COMBINATORICS_HPP_
#define USCRL_COMBINATORICS_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "uscrl/types.hpp"

namespace uscrl {

// Exact binomial coefficient C(n, r); zero when r > n.
BigCount binomial(std::uint64_t n, std::uint64_t r);

// C(n, r) if it fits in 64 bits.
std::optional<std::uint64_t> binomial_u64(std::uint64_t n, std::uint64_t r);

// Writes the r-subset of {0..n-1} with lexicographic rank `rank` into `out`
// (sorted ascending). Requires rank < C(n, r) and that C(n, r) fits in 64 bits.
void unrank_subset(std::uint64_t n, std::uint64_t rank,
                   std::span<std::uint32_t> out);

// Ordered pair (i, j), i != j, of {0..n-1} with rank in [0, n(n-1)).
std::pair<std::uint32_t, std::uint32_t> unrank_ordered_pair(std::uint64_t n,
                                                            std::uint64_t rank);

// Advances a sorted r-subset of {0..n-1} to its lexicographic successor.
// Returns false after the last subset.
bool next_subset(std::span<std::uint32_t> subset, std::uint32_t n);

// Uniform r-subset of {0..n-1}, sorted ascending (Floyd's algorithm).
void sample_subset(std::uint32_t n, std::span<std::uint32_t> out,
                   std::mt19937_64& rng);

// Uniform integer in [0, bound) without the modulo bias of `rng() % bound`.
std::uint64_t uniform_below(std::uint64_t bound, std::mt19937_64& rng);

// Independent stream seed for (seed, stream): one SplitMix64 step over
// their combination.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace uscrl

#endif  // USCRL_COMBINATORICS_HPP_
