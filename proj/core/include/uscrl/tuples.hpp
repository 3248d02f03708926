#ifndef USCRL_TUPLES_HPP_
#define USCRL_TUPLES_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "uscrl/combinatorics.hpp"
#include "uscrl/dataset.hpp"
#include "uscrl/error.hpp"
#include "uscrl/types.hpp"

namespace uscrl {

enum class Regime { IidDisjoint, SubSampled, AllTuples };

std::string_view to_string(Regime r);
Regime regime_from_string(std::string_view s);

// (anchor, positive, k negatives). Negatives are kept sorted by index and
// treated as an unordered k-subset.
struct Tuple {
  SampleIndex anchor = 0;
  SampleIndex positive = 0;
  std::vector<SampleIndex> negatives;
  ClassId class_id = 0;
};

struct TupleView {
  SampleIndex anchor;
  SampleIndex positive;
  std::span<const SampleIndex> negatives;
  ClassId class_id;

  Tuple to_tuple() const {
    return {anchor, positive, {negatives.begin(), negatives.end()}, class_id};
  }
};

/// Regime-tagged collection of tuples sharing one k, stored flat with
/// stride k+2: [anchor, positive, neg_1, ..., neg_k].
class TupleSet {
 public:
  TupleSet(Regime regime, std::size_t k);

  Regime regime() const noexcept { return regime_; }
  std::size_t k() const noexcept { return k_; }
  std::size_t size() const noexcept { return classes_.size(); }
  bool empty() const noexcept { return classes_.empty(); }
  // Number of tuples M. Equal to size(); kept as a named accessor because
  // the sub-sampled theorems are stated in terms of it.
  std::size_t m_count() const noexcept { return size(); }

  TupleView operator[](std::size_t j) const {
    const SampleIndex* row = flat_.data() + j * (k_ + 2);
    return {row[0], row[1], {row + 2, k_}, classes_[j]};
  }

  void reserve(std::size_t n);
  void push_back(SampleIndex anchor, SampleIndex positive,
                 std::span<const SampleIndex> negatives, ClassId c);
  void push_back(const Tuple& t) { push_back(t.anchor, t.positive, t.negatives, t.class_id); }
  void append(const TupleSet& other);

  std::span<const SampleIndex> flat() const noexcept { return flat_; }

 private:
  Regime regime_;
  std::size_t k_;
  std::vector<SampleIndex> flat_;
  std::vector<ClassId> classes_;
};

// Checks the Tuple invariants against the dataset; returns false on failure.
bool is_valid_tuple(const LabeledDataset& ds, const TupleView& t, std::size_t k);

/// Permutations applied to S_c (positives) and S-bar_c (negatives) before
/// the greedy block matching: the j-th shuffled element is list[perm[j]].
struct ClassPermutation {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
};

ClassPermutation identity_permutation(const LabeledDataset& ds, ClassId c);
ClassPermutation random_permutation(const LabeledDataset& ds, ClassId c,
                                    std::mt19937_64& rng);

// T_c^iid[pi_c, pibar_c]: N_c tuples from consecutive 2-blocks of the
// shuffled S_c and k-blocks of the shuffled S-bar_c.
void append_greedy_class_tuples(const LabeledDataset& ds, ClassId c, std::size_t k,
                                const ClassPermutation& perm, TupleSet& out);

// Union over classes of T_c^iid. When `perms` is empty every class is
// shuffled by a uniform permutation drawn from `seed`; pass identity
// permutations to get the unshuffled construction.
TupleSet greedy_iid_tuples(const LabeledDataset& ds, std::size_t k,
                           std::span<const ClassPermutation> perms,
                           std::uint64_t seed);

/// Draws tuples from the restricted nu distribution: class c with
/// probability N_c+ / sum over feasible classes, then an ordered
/// anchor/positive pair and a k-subset of negatives, both uniform.
class TupleSampler {
 public:
  TupleSampler(const LabeledDataset& ds, std::size_t k);

  std::size_t k() const noexcept { return k_; }
  const std::vector<ClassId>& feasible_classes() const noexcept { return feasible_; }

  // One tuple from nu; `negatives` must have size k.
  void draw(std::mt19937_64& rng, SampleIndex& anchor, SampleIndex& positive,
            std::span<SampleIndex> negatives, ClassId& c) const;

  // One tuple uniformly from T_c (requires N_c >= 1).
  void draw_in_class(ClassId c, std::mt19937_64& rng, SampleIndex& anchor,
                     SampleIndex& positive, std::span<SampleIndex> negatives) const;

  void draw_into(std::size_t m, std::mt19937_64& rng, TupleSet& out) const;

 private:
  const LabeledDataset* ds_;
  std::size_t k_;
  std::vector<ClassId> feasible_;
  std::vector<std::uint64_t> cumulative_;  // running N_c+ over feasible classes
};

TupleSet subsample_tuples(const LabeledDataset& ds, std::size_t k,
                          std::size_t m_count, std::uint64_t seed);

inline constexpr std::uint64_t kDefaultTupleCap = 1'000'000;

// |T_c| = 2 C(N_c+, 2) C(N_c-, k) and its sum over classes.
BigCount count_class_tuples(const LabeledDataset& ds, ClassId c, std::size_t k);
BigCount count_all_tuples(const LabeledDataset& ds, std::size_t k);

// Throws SizeError when count > cap.
void check_tuple_cap(const BigCount& count, std::uint64_t cap, std::string_view what);

/// Visits every tuple of T_c in canonical order: anchor position ascending,
/// positive position ascending (skipping the anchor), negatives as
/// lexicographically ordered k-subsets of S-bar_c. `fn` receives
/// (anchor, positive, negatives).
template <typename Fn>
void for_each_class_tuple(const LabeledDataset& ds, ClassId c, std::size_t k, Fn&& fn) {
  if (k == 0) throw PreconditionError("k must be >= 1");
  const auto pos = ds.members(c);
  const auto neg = ds.complement(c);
  if (pos.size() < 2 || neg.size() < k) return;
  std::vector<std::uint32_t> slots(k);
  std::vector<SampleIndex> negatives(k);
  for (std::size_t a = 0; a < pos.size(); ++a) {
    for (std::size_t p = 0; p < pos.size(); ++p) {
      if (p == a) continue;
      for (std::uint32_t i = 0; i < k; ++i) slots[i] = i;
      do {
        for (std::size_t i = 0; i < k; ++i) negatives[i] = neg[slots[i]];
        fn(pos[a], pos[p], std::span<const SampleIndex>(negatives));
      } while (next_subset(slots, static_cast<std::uint32_t>(neg.size())));
    }
  }
}

// The full set T in canonical order (classes ascending).
TupleSet enumerate_all_tuples(const LabeledDataset& ds, std::size_t k,
                              std::uint64_t cap = kDefaultTupleCap);

// nu(T) = (N_c+/N) / |T_c| for T in T_c.
double tuple_mass(const LabeledDataset& ds, const TupleView& t, std::size_t k);

}  // namespace uscrl

#endif  // USCRL_TUPLES_HPP_
