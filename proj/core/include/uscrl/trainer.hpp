#ifndef USCRL_TRAINER_HPP_
#define USCRL_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uscrl/dataset.hpp"
#include "uscrl/loss.hpp"
#include "uscrl/model.hpp"
#include "uscrl/probe.hpp"
#include "uscrl/risk.hpp"
#include "uscrl/tuples.hpp"

namespace uscrl {

struct ModelConfig {
  ModelFamily family = ModelFamily::Mlp;
  std::vector<std::size_t> hidden{64};
  std::size_t output_dim = 32;
  Activation activation = Activation::ReLU;         // hidden layers
  Activation output_activation = Activation::Identity;
  double spectral_cap = 4.0;  // every layer (linear: s)
  double norm21_cap = kInf;   // linear family only

  void validate() const;
};

RepresentationModel build_model(const ModelConfig& cfg, std::size_t input_dim, std::uint64_t seed);

struct TrainConfig {
  ModelConfig model;
  LossSpec loss;
  std::size_t k = 2;
  Regime regime = Regime::SubSampled;
  std::size_t m_tuples = 1000;  // SubSampled only
  std::size_t epochs = 10;
  std::size_t batch = 32;
  double lr = 0.05;
  double momentum = 0.0;
  std::uint64_t seed = 0;
  std::size_t eval_every = 0;  // 0: evaluate only at the start and the end
  bool resample_per_epoch = true;
  // Mini-batch steps per epoch; 0 means one pass over the tuple set.
  // For AllTuples it is the number of full-batch steps per epoch (0 -> 1).
  std::size_t steps_per_epoch = 0;
  // Above this many sub-sampled tuples, batches are drawn from nu directly
  // instead of from a materialized T_sub.
  std::size_t materialize_limit = 2'000'000;
  std::uint64_t all_tuples_cap = kDefaultTupleCap;
  bool force_all_tuples = false;
  std::size_t monitor_tuples = 2048;  // tuples behind the reported training loss
  std::uint64_t eval_draws = 20000;
  std::uint64_t eval_seed = 0xe7a1;
  bool run_probe = true;
  std::size_t probe_samples = 1000;  // synthetic mode only
  ProbeConfig probe;

  void validate() const;
};

/// Where evaluation risk comes from: the generator (population Monte-Carlo)
/// or a held-out pool (Monte-Carlo U-statistic).
struct EvalSource {
  std::optional<GaussianSpec> generator;
  std::optional<LabeledDataset> heldout;
};

struct EvalPoint {
  std::size_t epoch = 0;
  double risk = 0.0;
  double risk_std_error = 0.0;
  std::optional<double> probe_accuracy;
};

struct TrainReport {
  RepresentationModel model;
  std::vector<double> train_loss;  // index e: objective after epoch e (0 = init)
  std::vector<EvalPoint> evals;
  std::string eval_kind;  // "population_mc", "heldout_ustat" or "none"
  std::size_t steps = 0;
  std::size_t n_tuples = 0;
  double seconds = 0.0;

  double final_risk() const { return evals.empty() ? 0.0 : evals.back().risk; }
};

// `fixed` overrides tuple construction for the IidDisjoint and SubSampled
// regimes (used by compare_regimes to train on a given tuple set).
TrainReport train(const LabeledDataset& ds, const TrainConfig& cfg, const EvalSource& eval = {},
                  const TupleSet* fixed = nullptr);

// Risk and probe accuracy of a model under an evaluation source.
EvalPoint evaluate(const RepresentationModel& f, const TrainConfig& cfg, const EvalSource& eval,
                   std::size_t epoch);

}  // namespace uscrl

#endif  // USCRL_TRAINER_HPP_
