#ifndef USCRL_EXPERIMENTS_HPP_
#define USCRL_EXPERIMENTS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "uscrl/dataset.hpp"
#include "uscrl/trainer.hpp"

namespace uscrl {

struct RegimeRow {
  Regime regime = Regime::IidDisjoint;
  std::size_t m_tuples = 0;  // tuples trained on (|T| for AllTuples)
  std::uint64_t seed = 0;
  double final_risk = 0.0;
  double risk_std_error = 0.0;
  double initial_risk = 0.0;
  std::optional<double> probe_accuracy;
  double final_train_loss = 0.0;
  double loss_clip = 0.0;
  double seconds = 0.0;
};

struct RegimeOptions {
  std::size_t n_disjoint = 100;
  std::vector<std::size_t> m_grid{1000};
  std::vector<std::uint64_t> seeds{0};
  bool include_iid = true;
  bool include_all = true;   // added when |T| of the re-pooled samples fits the cap
  bool force_all = false;    // run AllTuples beyond the cap
  // Optional fixed step budgets; 0 keeps the TrainConfig value.
  std::size_t all_steps_per_epoch = 0;
};

/// Per seed: n_disjoint disjoint tuples are drawn from the pool; the
/// IidDisjoint run trains on exactly those, every SubSampled run re-pools
/// their n_disjoint (k+2) samples and draws M tuples from nu, and the
/// AllTuples run (if enabled and under the cap) trains on every valid tuple
/// of the re-pooled samples.
std::vector<RegimeRow> compare_regimes(const LabeledDataset& pool, const TrainConfig& base,
                                       const RegimeOptions& opt, const EvalSource& eval);

struct ComplexityOptions {
  double epsilon = 0.5;
  std::size_t lo = 50;
  std::size_t hi = 4000;
  std::size_t search_tol = 50;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::size_t ref_multiplier = 4;     // N_ref = ref_multiplier * hi
  std::size_t ref_epoch_factor = 3;   // reference trains for 3x the epochs
  bool m_equals_n_squared = true;     // M = N^2, else base.m_tuples
};

struct SearchProbe {
  std::size_t n = 0;
  double risk = 0.0;
  double gap = 0.0;
};

struct SeedSearch {
  std::uint64_t seed = 0;
  std::optional<std::size_t> n_eps;  // empty: gap never <= epsilon at hi
  double gap_at_hi = 0.0;
  std::vector<SearchProbe> probes;
};

struct ComplexityResult {
  std::size_t k = 0;
  std::size_t num_classes = 0;
  double epsilon = 0.0;
  double reference_risk = 0.0;
  double reference_std_error = 0.0;
  std::size_t n_ref = 0;
  std::vector<SeedSearch> seeds;
  std::optional<double> mean_n_eps;  // over seeds that reached epsilon
  std::size_t reached = 0;
};

/// Binary search per seed for the smallest N with
///   population_risk(train(N)) - reference_risk <= epsilon,
/// where the reference model is trained once on N_ref samples.
ComplexityResult sample_complexity_search(const GaussianSpec& spec, const TrainConfig& base,
                                          const ComplexityOptions& opt);

}  // namespace uscrl

#endif  // USCRL_EXPERIMENTS_HPP_
