#include "uscrl/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "uscrl/combinatorics.hpp"
#include "uscrl/error.hpp"
#include "uscrl/summation.hpp"

namespace uscrl {

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::SubSampled: return "subsampled";
    case Estimator::UStatExact: return "ustat_exact";
    case Estimator::UStatMC: return "ustat_mc";
    case Estimator::UStatDecoupled: return "ustat_decoupled";
    case Estimator::VStat: return "vstat";
    case Estimator::VStatMC: return "vstat_mc";
    case Estimator::PopulationMC: return "population_mc";
    case Estimator::Enumeration: return "enumeration_mean";
  }
  return "?";
}

Estimator estimator_from_string(std::string_view s) {
  for (auto e : {Estimator::SubSampled, Estimator::UStatExact, Estimator::UStatMC,
                 Estimator::UStatDecoupled, Estimator::VStat, Estimator::VStatMC,
                 Estimator::PopulationMC, Estimator::Enumeration}) {
    if (s == to_string(e)) return e;
  }
  throw ConfigError("unknown estimator '" + std::string(s) + "'");
}

Eigen::MatrixXd representations(const RepresentationModel& f, const LabeledDataset& ds) {
  if (f.input_dim() != ds.dim()) {
    throw ConfigError("model input dimension " + std::to_string(f.input_dim()) +
                      " does not match dataset dimension " + std::to_string(ds.dim()));
  }
  return f.forward_batch(ds.features());
}

namespace {

void check_mode(const EstimateMode& mode) {
  if (mode.kind == EstimateMode::Kind::MonteCarlo && mode.draws == 0) {
    throw PreconditionError("Monte-Carlo estimate needs at least one draw");
  }
}

bool feasible(const LabeledDataset& ds, ClassId c, std::size_t k) {
  const std::size_t np = ds.class_size(c);
  return disjoint_tuple_count(np, ds.size() - np, k) >= 1;
}

double rho_hat(const LabeledDataset& ds, ClassId c) {
  return static_cast<double>(ds.class_size(c)) / static_cast<double>(ds.size());
}

BigCount vstat_count(const LabeledDataset& ds, ClassId c, std::size_t k) {
  const BigCount np = ds.class_size(c);
  const BigCount nm = ds.size() - ds.class_size(c);
  BigCount total = np * np;
  for (std::size_t i = 0; i < k; ++i) total *= nm;
  return total;
}

// Weighted class mixture: sum_c w_c * est_c with independent class errors.
RiskEstimate mix(Estimator e, const std::vector<std::pair<double, RiskEstimate>>& parts,
                 const EstimateMode& mode) {
  RiskEstimate out;
  out.estimator = e;
  CompensatedSum value;
  double var = 0.0;
  bool any_se = false;
  for (const auto& [w, est] : parts) {
    value.add(w * est.value);
    out.n_terms += est.n_terms;
    if (est.std_error) {
      any_se = true;
      var += w * w * *est.std_error * *est.std_error;
    }
  }
  out.value = value.value();
  if (any_se) out.std_error = std::sqrt(var);
  if (mode.kind == EstimateMode::Kind::MonteCarlo) out.seed = mode.seed;
  return out;
}

}  // namespace

RiskEstimate subsampled_risk(const Eigen::MatrixXd& reps, const TupleSet& tset,
                             const LossSpec& loss) {
  if (tset.regime() != Regime::SubSampled) {
    throw PreconditionError("subsampled_risk needs a SubSampled tuple set");
  }
  if (tset.empty()) throw PreconditionError("subsampled_risk: empty tuple set");
  RunningStats stats;
  CompensatedSum sum;
  for (std::size_t j = 0; j < tset.size(); ++j) {
    const auto t = tset[j];
    const double l = tuple_loss(loss, reps, t.anchor, t.positive, t.negatives);
    stats.add(l);
    sum.add(l);
  }
  RiskEstimate out;
  out.estimator = Estimator::SubSampled;
  out.value = sum.value() / static_cast<double>(tset.size());
  out.n_terms = tset.size();
  out.std_error = stats.std_error();
  return out;
}

RiskEstimate subsampled_risk(const RepresentationModel& f, const LabeledDataset& ds,
                             const TupleSet& tset, const LossSpec& loss) {
  return subsampled_risk(representations(f, ds), tset, loss);
}

RiskEstimate ustat_conditional(const Eigen::MatrixXd& reps, const LabeledDataset& ds, ClassId c,
                               std::size_t k, const LossSpec& loss, const EstimateMode& mode) {
  if (k == 0) throw PreconditionError("k must be >= 1");
  check_mode(mode);
  const bool mc = mode.kind == EstimateMode::Kind::MonteCarlo;
  RiskEstimate out;
  out.estimator = mc ? Estimator::UStatMC : Estimator::UStatExact;
  if (mc) out.seed = mode.seed;
  if (!feasible(ds, c, k)) return out;  // defined as zero

  if (!mc) {
    const BigCount count = count_class_tuples(ds, c, k);
    check_tuple_cap(count, mode.cap, "ustat_conditional");
    CompensatedSum sum;
    for_each_class_tuple(ds, c, k,
                         [&](SampleIndex a, SampleIndex p, std::span<const SampleIndex> n) {
                           sum.add(tuple_loss(loss, reps, a, p, n));
                         });
    out.n_terms = count.convert_to<std::uint64_t>();
    out.value = sum.value() / static_cast<double>(out.n_terms);
    return out;
  }

  const TupleSampler sampler(ds, k);
  std::mt19937_64 rng(mode.seed);
  std::vector<SampleIndex> negatives(k);
  SampleIndex a = 0, p = 0;
  RunningStats stats;
  CompensatedSum sum;
  for (std::uint64_t b = 0; b < mode.draws; ++b) {
    sampler.draw_in_class(c, rng, a, p, negatives);
    const double l = tuple_loss(loss, reps, a, p, negatives);
    stats.add(l);
    sum.add(l);
  }
  out.n_terms = mode.draws;
  out.value = sum.value() / static_cast<double>(mode.draws);
  out.std_error = stats.std_error();
  return out;
}

RiskEstimate ustat_conditional(const RepresentationModel& f, const LabeledDataset& ds, ClassId c,
                               std::size_t k, const LossSpec& loss, const EstimateMode& mode) {
  return ustat_conditional(representations(f, ds), ds, c, k, loss, mode);
}

RiskEstimate ustat_overall(const Eigen::MatrixXd& reps, const LabeledDataset& ds, std::size_t k,
                           const LossSpec& loss, const EstimateMode& mode) {
  if (k == 0) throw PreconditionError("k must be >= 1");
  check_mode(mode);
  if (mode.kind == EstimateMode::Kind::Exact) {
    check_tuple_cap(count_all_tuples(ds, k), mode.cap, "ustat_overall");
  }
  std::vector<std::pair<double, RiskEstimate>> parts;
  for (ClassId c = 0; c < ds.num_classes(); ++c) {
    if (!feasible(ds, c, k)) continue;
    EstimateMode m = mode;
    m.seed = derive_seed(mode.seed, c);
    parts.emplace_back(rho_hat(ds, c), ustat_conditional(reps, ds, c, k, loss, m));
  }
  return mix(mode.kind == EstimateMode::Kind::Exact ? Estimator::UStatExact : Estimator::UStatMC,
             parts, mode);
}

RiskEstimate ustat_overall(const RepresentationModel& f, const LabeledDataset& ds, std::size_t k,
                           const LossSpec& loss, const EstimateMode& mode) {
  return ustat_overall(representations(f, ds), ds, k, loss, mode);
}

RiskEstimate decoupled_block_estimate(const Eigen::MatrixXd& reps, const LabeledDataset& ds,
                                      ClassId c, std::size_t k, const LossSpec& loss,
                                      const ClassPermutation& perm) {
  if (!feasible(ds, c, k)) {
    throw PreconditionError("decoupled_block_estimate: class " + std::to_string(c) +
                            " has N_c = 0");
  }
  TupleSet block(Regime::IidDisjoint, k);
  append_greedy_class_tuples(ds, c, k, perm, block);
  CompensatedSum sum;
  for (std::size_t j = 0; j < block.size(); ++j) {
    const auto t = block[j];
    sum.add(tuple_loss(loss, reps, t.anchor, t.positive, t.negatives));
  }
  RiskEstimate out;
  out.estimator = Estimator::UStatDecoupled;
  out.n_terms = block.size();
  out.value = sum.value() / static_cast<double>(block.size());
  return out;
}

RiskEstimate decoupled_block_estimate(const RepresentationModel& f, const LabeledDataset& ds,
                                      ClassId c, std::size_t k, const LossSpec& loss,
                                      const ClassPermutation& perm) {
  return decoupled_block_estimate(representations(f, ds), ds, c, k, loss, perm);
}

RiskEstimate vstat_conditional(const Eigen::MatrixXd& reps, const LabeledDataset& ds, ClassId c,
                               std::size_t k, const LossSpec& loss, const EstimateMode& mode) {
  if (k == 0) throw PreconditionError("k must be >= 1");
  check_mode(mode);
  const bool mc = mode.kind == EstimateMode::Kind::MonteCarlo;
  RiskEstimate out;
  out.estimator = mc ? Estimator::VStatMC : Estimator::VStat;
  if (mc) out.seed = mode.seed;
  const auto pos = ds.members(c);
  const auto neg = ds.complement(c);
  if (pos.empty() || neg.empty()) return out;

  std::vector<SampleIndex> negatives(k);
  if (!mc) {
    const BigCount count = vstat_count(ds, c, k);
    check_tuple_cap(count, mode.cap, "vstat_conditional");
    std::vector<std::size_t> digit(k, 0);
    CompensatedSum sum;
    for (SampleIndex a : pos) {
      for (SampleIndex p : pos) {
        std::fill(digit.begin(), digit.end(), 0);
        while (true) {
          for (std::size_t i = 0; i < k; ++i) negatives[i] = neg[digit[i]];
          sum.add(tuple_loss(loss, reps, a, p, negatives));
          std::size_t i = k;
          while (i > 0 && ++digit[i - 1] == neg.size()) digit[--i] = 0;
          if (i == 0) break;
        }
      }
    }
    out.n_terms = count.convert_to<std::uint64_t>();
    out.value = sum.value() / static_cast<double>(out.n_terms);
    return out;
  }

  std::mt19937_64 rng(mode.seed);
  RunningStats stats;
  CompensatedSum sum;
  for (std::uint64_t b = 0; b < mode.draws; ++b) {
    const SampleIndex a = pos[uniform_below(pos.size(), rng)];
    const SampleIndex p = pos[uniform_below(pos.size(), rng)];
    for (std::size_t i = 0; i < k; ++i) negatives[i] = neg[uniform_below(neg.size(), rng)];
    const double l = tuple_loss(loss, reps, a, p, negatives);
    stats.add(l);
    sum.add(l);
  }
  out.n_terms = mode.draws;
  out.value = sum.value() / static_cast<double>(mode.draws);
  out.std_error = stats.std_error();
  return out;
}

RiskEstimate vstat_overall(const Eigen::MatrixXd& reps, const LabeledDataset& ds, std::size_t k,
                           const LossSpec& loss, const EstimateMode& mode) {
  if (k == 0) throw PreconditionError("k must be >= 1");
  check_mode(mode);
  if (mode.kind == EstimateMode::Kind::Exact) {
    BigCount total = 0;
    for (ClassId c = 0; c < ds.num_classes(); ++c) total += vstat_count(ds, c, k);
    check_tuple_cap(total, mode.cap, "vstat_overall");
  }
  std::vector<std::pair<double, RiskEstimate>> parts;
  for (ClassId c = 0; c < ds.num_classes(); ++c) {
    if (ds.class_size(c) == 0 || ds.class_size(c) == ds.size()) continue;
    EstimateMode m = mode;
    m.seed = derive_seed(mode.seed, c);
    parts.emplace_back(rho_hat(ds, c), vstat_conditional(reps, ds, c, k, loss, m));
  }
  return mix(mode.kind == EstimateMode::Kind::Exact ? Estimator::VStat : Estimator::VStatMC,
             parts, mode);
}

RiskEstimate vstat_overall(const RepresentationModel& f, const LabeledDataset& ds, std::size_t k,
                           const LossSpec& loss, const EstimateMode& mode) {
  return vstat_overall(representations(f, ds), ds, k, loss, mode);
}

RiskEstimate enumeration_risk(const RepresentationModel& f, const LabeledDataset& ds,
                              std::size_t k, const LossSpec& loss, std::uint64_t cap) {
  const Eigen::MatrixXd reps = representations(f, ds);
  const TupleSet all = enumerate_all_tuples(ds, k, cap);
  // nu(T) is constant within a class; cache it per class.
  std::vector<double> mass(ds.num_classes(), 0.0);
  for (ClassId c = 0; c < ds.num_classes(); ++c) {
    if (feasible(ds, c, k)) {
      mass[c] = rho_hat(ds, c) / count_class_tuples(ds, c, k).convert_to<double>();
    }
  }
  CompensatedSum sum;
  for (std::size_t j = 0; j < all.size(); ++j) {
    const auto t = all[j];
    sum.add(mass[t.class_id] * tuple_loss(loss, reps, t.anchor, t.positive, t.negatives));
  }
  RiskEstimate out;
  out.estimator = Estimator::Enumeration;
  out.value = sum.value();
  out.n_terms = all.size();
  return out;
}

RiskEstimate population_risk_mc(const RepresentationModel& f, const GaussianSpec& gen,
                                std::size_t k, const LossSpec& loss, std::uint64_t draws,
                                std::uint64_t seed) {
  gen.validate();
  if (draws == 0) throw PreconditionError("population_risk_mc needs at least one draw");
  if (k == 0) throw PreconditionError("k must be >= 1");
  if (gen.num_classes < 2) {
    throw PreconditionError("population risk needs |C| >= 2 (no negative distribution otherwise)");
  }
  if (f.input_dim() != gen.dim) {
    throw ConfigError("model input dimension " + std::to_string(f.input_dim()) +
                      " does not match generator dimension " + std::to_string(gen.dim));
  }
  std::vector<double> cumulative(gen.num_classes);
  double acc = 0.0;
  for (ClassId c = 0; c < gen.num_classes; ++c) cumulative[c] = (acc += gen.prior(c));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw_class = [&]() {
    const double u = unit(rng) * acc;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<ClassId>(std::min<std::size_t>(
        static_cast<std::size_t>(it - cumulative.begin()), gen.num_classes - 1));
  };

  constexpr std::uint64_t kChunk = 512;
  const std::size_t width = k + 2;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(gen.dim), static_cast<Eigen::Index>(kChunk * width));
  std::vector<SampleIndex> negatives(k);
  std::iota(negatives.begin(), negatives.end(), SampleIndex{2});
  RunningStats stats;
  CompensatedSum sum;
  for (std::uint64_t done = 0; done < draws;) {
    const std::uint64_t m = std::min(kChunk, draws - done);
    for (std::uint64_t j = 0; j < m; ++j) {
      const auto base = static_cast<Eigen::Index>(j * width);
      const ClassId c = draw_class();
      draw_gaussian_point(gen, c, rng, x.col(base));
      draw_gaussian_point(gen, c, rng, x.col(base + 1));
      for (std::size_t i = 0; i < k; ++i) {
        ClassId z = draw_class();
        while (z == c) z = draw_class();
        draw_gaussian_point(gen, z, rng, x.col(base + 2 + static_cast<Eigen::Index>(i)));
      }
    }
    const Eigen::MatrixXd reps = f.forward_batch(x.leftCols(static_cast<Eigen::Index>(m * width)));
    for (std::uint64_t j = 0; j < m; ++j) {
      const auto base = static_cast<SampleIndex>(j * width);
      for (std::size_t i = 0; i < k; ++i) negatives[i] = base + 2 + static_cast<SampleIndex>(i);
      const double l = tuple_loss(loss, reps, base, base + 1, negatives);
      stats.add(l);
      sum.add(l);
    }
    done += m;
  }
  RiskEstimate out;
  out.estimator = Estimator::PopulationMC;
  out.value = sum.value() / static_cast<double>(draws);
  out.n_terms = draws;
  out.std_error = stats.std_error();
  out.seed = seed;
  return out;
}

}  // namespace uscrl
