#include "uscrl/tuples.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace uscrl {

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::IidDisjoint: return "iid";
    case Regime::SubSampled: return "sub";
    case Regime::AllTuples: return "all";
  }
  return "?";
}

Regime regime_from_string(std::string_view s) {
  if (s == "iid" || s == "IidDisjoint") return Regime::IidDisjoint;
  if (s == "sub" || s == "SubSampled") return Regime::SubSampled;
  if (s == "all" || s == "AllTuples") return Regime::AllTuples;
  throw ConfigError("unknown regime '" + std::string(s) + "' (expected iid, sub or all)");
}

TupleSet::TupleSet(Regime regime, std::size_t k) : regime_(regime), k_(k) {
  if (k == 0) throw PreconditionError("k must be >= 1");
}

void TupleSet::reserve(std::size_t n) {
  flat_.reserve(n * (k_ + 2));
  classes_.reserve(n);
}

void TupleSet::push_back(SampleIndex anchor, SampleIndex positive,
                         std::span<const SampleIndex> negatives, ClassId c) {
  if (negatives.size() != k_) {
    throw PreconditionError("tuple has " + std::to_string(negatives.size()) +
                            " negatives, set expects " + std::to_string(k_));
  }
  flat_.push_back(anchor);
  flat_.push_back(positive);
  flat_.insert(flat_.end(), negatives.begin(), negatives.end());
  classes_.push_back(c);
}

void TupleSet::append(const TupleSet& other) {
  if (other.k_ != k_) throw PreconditionError("cannot append tuple sets with different k");
  flat_.insert(flat_.end(), other.flat_.begin(), other.flat_.end());
  classes_.insert(classes_.end(), other.classes_.begin(), other.classes_.end());
}

bool is_valid_tuple(const LabeledDataset& ds, const TupleView& t, std::size_t k) {
  const std::size_t n = ds.size();
  if (t.negatives.size() != k || t.anchor >= n || t.positive >= n) return false;
  if (t.anchor == t.positive) return false;
  if (ds.label(t.anchor) != t.class_id || ds.label(t.positive) != t.class_id) return false;
  for (std::size_t i = 0; i < k; ++i) {
    const SampleIndex v = t.negatives[i];
    if (v >= n || ds.label(v) == t.class_id) return false;
    if (i > 0 && t.negatives[i - 1] >= v) return false;  // sorted and distinct
  }
  return true;
}

ClassPermutation identity_permutation(const LabeledDataset& ds, ClassId c) {
  ClassPermutation p;
  p.positives.resize(ds.members(c).size());
  p.negatives.resize(ds.complement(c).size());
  std::iota(p.positives.begin(), p.positives.end(), std::size_t{0});
  std::iota(p.negatives.begin(), p.negatives.end(), std::size_t{0});
  return p;
}

namespace {

// Fisher-Yates driven by uniform_below so the output is identical across
// standard library implementations (std::shuffle is not).
void portable_shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(i, rng));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

ClassPermutation random_permutation(const LabeledDataset& ds, ClassId c,
                                    std::mt19937_64& rng) {
  ClassPermutation p = identity_permutation(ds, c);
  portable_shuffle(p.positives, rng);
  portable_shuffle(p.negatives, rng);
  return p;
}

void append_greedy_class_tuples(const LabeledDataset& ds, ClassId c, std::size_t k,
                                const ClassPermutation& perm, TupleSet& out) {
  const auto pos = ds.members(c);
  const auto neg = ds.complement(c);
  if (perm.positives.size() != pos.size() || perm.negatives.size() != neg.size()) {
    throw PreconditionError("permutation size does not match class " + std::to_string(c));
  }
  const std::size_t n_c = disjoint_tuple_count(pos.size(), neg.size(), k);
  std::vector<SampleIndex> negatives(k);
  for (std::size_t j = 0; j < n_c; ++j) {
    const SampleIndex a = pos[perm.positives[2 * j]];
    const SampleIndex p = pos[perm.positives[2 * j + 1]];
    for (std::size_t i = 0; i < k; ++i) negatives[i] = neg[perm.negatives[j * k + i]];
    std::sort(negatives.begin(), negatives.end());
    out.push_back(a, p, negatives, c);
  }
}

TupleSet greedy_iid_tuples(const LabeledDataset& ds, std::size_t k,
                           std::span<const ClassPermutation> perms,
                           std::uint64_t seed) {
  TupleSet out(Regime::IidDisjoint, k);
  if (!perms.empty() && perms.size() != ds.num_classes()) {
    throw PreconditionError("need one permutation pair per class");
  }
  std::mt19937_64 rng(seed);
  for (ClassId c = 0; c < ds.num_classes(); ++c) {
    if (perms.empty()) {
      append_greedy_class_tuples(ds, c, k, random_permutation(ds, c, rng), out);
    } else {
      append_greedy_class_tuples(ds, c, k, perms[c], out);
    }
  }
  return out;
}

TupleSampler::TupleSampler(const LabeledDataset& ds, std::size_t k) : ds_(&ds), k_(k) {
  if (k == 0) throw PreconditionError("k must be >= 1");
  std::uint64_t running = 0;
  for (ClassId c = 0; c < ds.num_classes(); ++c) {
    const std::size_t np = ds.class_size(c);
    const std::size_t nm = ds.size() - np;
    if (disjoint_tuple_count(np, nm, k) >= 1) {
      feasible_.push_back(c);
      running += np;
      cumulative_.push_back(running);
    }
  }
  if (feasible_.empty()) {
    throw PreconditionError("no class can form a tuple (every N_c = 0) for k = " +
                            std::to_string(k));
  }
}

void TupleSampler::draw_in_class(ClassId c, std::mt19937_64& rng, SampleIndex& anchor,
                                 SampleIndex& positive,
                                 std::span<SampleIndex> negatives) const {
  const auto pos = ds_->members(c);
  const auto neg = ds_->complement(c);
  if (pos.size() < 2 || neg.size() < k_) {
    throw PreconditionError("class " + std::to_string(c) + " cannot form a tuple");
  }
  const std::uint64_t np = pos.size();
  const auto [i, j] = unrank_ordered_pair(np, uniform_below(np * (np - 1), rng));
  anchor = pos[i];
  positive = pos[j];
  std::uint32_t slots_buf[64];
  std::vector<std::uint32_t> slots_heap;
  std::span<std::uint32_t> slots;
  if (k_ <= 64) {
    slots = std::span<std::uint32_t>(slots_buf, k_);
  } else {
    slots_heap.resize(k_);
    slots = slots_heap;
  }
  // Floyd's algorithm: exactly uniform over k-subsets in O(k^2).
  sample_subset(static_cast<std::uint32_t>(neg.size()), slots, rng);
  for (std::size_t t = 0; t < k_; ++t) negatives[t] = neg[slots[t]];
}

void TupleSampler::draw(std::mt19937_64& rng, SampleIndex& anchor, SampleIndex& positive,
                        std::span<SampleIndex> negatives, ClassId& c) const {
  const std::uint64_t u = uniform_below(cumulative_.back(), rng);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  c = feasible_[static_cast<std::size_t>(it - cumulative_.begin())];
  draw_in_class(c, rng, anchor, positive, negatives);
}

void TupleSampler::draw_into(std::size_t m, std::mt19937_64& rng, TupleSet& out) const {
  std::vector<SampleIndex> negatives(k_);
  SampleIndex a = 0, p = 0;
  ClassId c = 0;
  out.reserve(out.size() + m);
  for (std::size_t j = 0; j < m; ++j) {
    draw(rng, a, p, negatives, c);
    out.push_back(a, p, negatives, c);
  }
}

TupleSet subsample_tuples(const LabeledDataset& ds, std::size_t k,
                          std::size_t m_count, std::uint64_t seed) {
  TupleSampler sampler(ds, k);
  TupleSet out(Regime::SubSampled, k);
  std::mt19937_64 rng(seed);
  sampler.draw_into(m_count, rng, out);
  return out;
}

BigCount count_class_tuples(const LabeledDataset& ds, ClassId c, std::size_t k) {
  if (k == 0) throw PreconditionError("k must be >= 1");
  const std::uint64_t np = ds.class_size(c);
  const std::uint64_t nm = ds.size() - np;
  return 2 * binomial(np, 2) * binomial(nm, k);
}

BigCount count_all_tuples(const LabeledDataset& ds, std::size_t k) {
  if (k == 0) throw PreconditionError("k must be >= 1");
  BigCount total = 0;
  for (ClassId c = 0; c < ds.num_classes(); ++c) total += count_class_tuples(ds, c, k);
  return total;
}

void check_tuple_cap(const BigCount& count, std::uint64_t cap, std::string_view what) {
  if (count > cap) {
    const std::string exact = count.str();
    throw SizeError(std::string(what) + ": " + exact + " tuples exceed the cap of " +
                        std::to_string(cap) + "; raise the cap to force it",
                    exact);
  }
}

TupleSet enumerate_all_tuples(const LabeledDataset& ds, std::size_t k, std::uint64_t cap) {
  const BigCount total = count_all_tuples(ds, k);
  check_tuple_cap(total, cap, "enumerate_all_tuples");
  TupleSet out(Regime::AllTuples, k);
  out.reserve(total.convert_to<std::size_t>());
  for (ClassId c = 0; c < ds.num_classes(); ++c) {
    for_each_class_tuple(ds, c, k,
                         [&](SampleIndex a, SampleIndex p, std::span<const SampleIndex> n) {
                           out.push_back(a, p, n, c);
                         });
  }
  return out;
}

double tuple_mass(const LabeledDataset& ds, const TupleView& t, std::size_t k) {
  if (!is_valid_tuple(ds, t, k)) throw PreconditionError("tuple_mass: invalid tuple");
  const std::size_t np = ds.class_size(t.class_id);
  if (disjoint_tuple_count(np, ds.size() - np, k) == 0) {
    throw PreconditionError("tuple_mass: class " + std::to_string(t.class_id) +
                            " is infeasible (N_c = 0)");
  }
  const double tc = count_class_tuples(ds, t.class_id, k).convert_to<double>();
  return (static_cast<double>(np) / static_cast<double>(ds.size())) / tc;
}

}  // namespace uscrl
