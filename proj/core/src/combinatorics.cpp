#include "uscrl/combinatorics.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

#include "uscrl/error.hpp"

namespace uscrl {

BigCount binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  BigCount acc = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    acc *= (n - r + i);
    acc /= i;
  }
  return acc;
}

std::optional<std::uint64_t> binomial_u64(std::uint64_t n, std::uint64_t r) {
  const BigCount c = binomial(n, r);
  if (c > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
  return c.convert_to<std::uint64_t>();
}

void unrank_subset(std::uint64_t n, std::uint64_t rank,
                   std::span<std::uint32_t> out) {
  const std::uint64_t r = out.size();
  std::uint64_t next = 0;
  for (std::uint64_t pos = 0; pos < r; ++pos) {
    // Walk candidates for this position; each fixes C(n-cand-1, r-pos-1)
    // completions.
    for (std::uint64_t cand = next; cand < n; ++cand) {
      const auto block = binomial_u64(n - cand - 1, r - pos - 1);
      assert(block.has_value());
      if (rank < *block) {
        out[pos] = static_cast<std::uint32_t>(cand);
        next = cand + 1;
        break;
      }
      rank -= *block;
    }
  }
}

std::pair<std::uint32_t, std::uint32_t> unrank_ordered_pair(std::uint64_t n,
                                                            std::uint64_t rank) {
  const auto first = static_cast<std::uint32_t>(rank / (n - 1));
  auto second = static_cast<std::uint32_t>(rank % (n - 1));
  if (second >= first) ++second;
  return {first, second};
}

bool next_subset(std::span<std::uint32_t> subset, std::uint32_t n) {
  const std::size_t r = subset.size();
  if (r == 0) return false;
  std::size_t i = r;
  while (i > 0) {
    --i;
    if (subset[i] < n - r + i) {
      ++subset[i];
      for (std::size_t j = i + 1; j < r; ++j) subset[j] = subset[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::uint64_t uniform_below(std::uint64_t bound, std::mt19937_64& rng) {
  assert(bound > 0);
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      (std::numeric_limits<std::uint64_t>::max() % bound);
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % bound;
}

void sample_subset(std::uint32_t n, std::span<std::uint32_t> out,
                   std::mt19937_64& rng) {
  const std::uint32_t r = static_cast<std::uint32_t>(out.size());
  if (r > n) throw PreconditionError("sample_subset: subset larger than set");
  // Floyd: for j = n-r .. n-1 pick t in [0, j]; insert t unless taken, else j.
  std::size_t filled = 0;
  for (std::uint32_t j = n - r; j < n; ++j) {
    const auto t = static_cast<std::uint32_t>(uniform_below(j + 1ULL, rng));
    const auto begin = out.begin();
    const auto end = out.begin() + static_cast<std::ptrdiff_t>(filled);
    const bool taken = std::find(begin, end, t) != end;
    out[filled++] = taken ? j : t;
  }
  std::sort(out.begin(), out.end());
}

}  // namespace uscrl
