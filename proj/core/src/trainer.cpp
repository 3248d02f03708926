#include "uscrl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "uscrl/combinatorics.hpp"
#include "uscrl/error.hpp"
#include "uscrl/summation.hpp"

namespace uscrl {

void ModelConfig::validate() const {
  if (output_dim == 0) throw ConfigError("model.output_dim must be >= 1");
  if (!(spectral_cap > 0.0)) throw ConfigError("model.spectral_cap must be > 0");
  if (!(norm21_cap > 0.0)) throw ConfigError("model.norm21_cap must be > 0");
  for (std::size_t w : hidden) {
    if (w == 0) throw ConfigError("model.hidden widths must be >= 1");
  }
}

RepresentationModel build_model(const ModelConfig& cfg, std::size_t input_dim, std::uint64_t seed) {
  cfg.validate();
  if (cfg.family == ModelFamily::Linear) {
    return RepresentationModel::init_linear(cfg.output_dim, input_dim, cfg.norm21_cap,
                                            cfg.spectral_cap, seed);
  }
  std::vector<std::size_t> widths{input_dim};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(cfg.output_dim);
  std::vector<Activation> acts(widths.size() - 1, cfg.activation);
  acts.back() = cfg.output_activation;
  std::vector<double> caps(widths.size() - 1, cfg.spectral_cap);
  return RepresentationModel::init_mlp(widths, acts, caps, seed);
}

void TrainConfig::validate() const {
  model.validate();
  loss.validate();
  if (k == 0) throw ConfigError("k must be >= 1");
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (batch == 0) throw ConfigError("batch must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be finite and >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (eval_draws == 0) throw ConfigError("eval_draws must be >= 1");
}

namespace {

// Streams derived from the run seed; fixed so reports are reproducible.
enum Stream : std::uint64_t {
  kInit = 1,
  kTuples = 2,
  kOrder = 3,
  kMonitor = 4,
  kLazy = 5,
  kResample = 1000,
};

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[static_cast<std::size_t>(uniform_below(i, rng))]);
  }
}

TupleSet gather(const TupleSet& src, std::span<const std::size_t> rows) {
  TupleSet out(src.regime(), src.k());
  out.reserve(rows.size());
  for (std::size_t r : rows) {
    const auto t = src[r];
    out.push_back(t.anchor, t.positive, t.negatives, t.class_id);
  }
  return out;
}

double mean_loss(const RepresentationModel& f, const LabeledDataset& ds, const TupleSet& tset,
                 const LossSpec& loss) {
  const Eigen::MatrixXd reps = representations(f, ds);
  CompensatedSum s;
  for (std::size_t j = 0; j < tset.size(); ++j) {
    const auto t = tset[j];
    s.add(tuple_loss(loss, reps, t.anchor, t.positive, t.negatives));
  }
  return s.value() / static_cast<double>(tset.size());
}

// Exact nu-weighted objective and its gradient over every valid tuple.
BatchGradient all_tuples_gradient(const RepresentationModel& f, const LabeledDataset& ds,
                                  std::size_t k, const LossSpec& loss) {
  const ForwardCache cache = forward_cached(f, ds.features());
  const Eigen::MatrixXd& reps = cache.output();
  Eigen::MatrixXd dreps = Eigen::MatrixXd::Zero(reps.rows(), reps.cols());
  CompensatedSum total;
  for (ClassId c = 0; c < ds.num_classes(); ++c) {
    const BigCount count = count_class_tuples(ds, c, k);
    if (count == 0) continue;
    const double w = static_cast<double>(ds.class_size(c)) / static_cast<double>(ds.size()) /
                     count.convert_to<double>();
    for_each_class_tuple(ds, c, k, [&](SampleIndex a, SampleIndex p, std::span<const SampleIndex> n) {
      total.add(w * accumulate_tuple_grad(loss, reps, a, p, n, w, dreps));
    });
  }
  return {total.value(), backprop(f, cache, dreps)};
}

void check_finite(const BatchGradient& bg, std::size_t step) {
  if (!std::isfinite(bg.loss) || !std::isfinite(bg.grad.squared_norm())) {
    throw NumericError("training diverged: non-finite loss or gradient at step " +
                       std::to_string(step));
  }
}

}  // namespace

EvalPoint evaluate(const RepresentationModel& f, const TrainConfig& cfg, const EvalSource& eval,
                   std::size_t epoch) {
  EvalPoint pt;
  pt.epoch = epoch;
  ProbeConfig pc = cfg.probe;
  pc.seed = derive_seed(cfg.eval_seed, 7);
  if (eval.generator) {
    const auto est = population_risk_mc(f, *eval.generator, cfg.k, cfg.loss, cfg.eval_draws,
                                        cfg.eval_seed);
    pt.risk = est.value;
    pt.risk_std_error = est.std_error.value_or(0.0);
    if (cfg.run_probe) {
      const auto probe_ds =
          generate_gaussian(*eval.generator, cfg.probe_samples, derive_seed(cfg.eval_seed, 11));
      pt.probe_accuracy = fit_probe(f.forward_batch(probe_ds.features()), probe_ds.labels(),
                                    probe_ds.num_classes(), pc)
                              .accuracy;
    }
  } else if (eval.heldout) {
    const auto est = ustat_overall(f, *eval.heldout, cfg.k, cfg.loss,
                                   EstimateMode::monte_carlo(cfg.eval_draws, cfg.eval_seed));
    pt.risk = est.value;
    pt.risk_std_error = est.std_error.value_or(0.0);
    if (cfg.run_probe) {
      pt.probe_accuracy = fit_probe(representations(f, *eval.heldout), eval.heldout->labels(),
                                    eval.heldout->num_classes(), pc)
                              .accuracy;
    }
  }
  return pt;
}

TrainReport train(const LabeledDataset& ds, const TrainConfig& cfg, const EvalSource& eval,
                  const TupleSet* fixed) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t k = cfg.k;
  if (fixed != nullptr && fixed->k() != k) throw PreconditionError("fixed tuple set has a different k");

  TrainReport rep;
  rep.model = build_model(cfg.model, ds.dim(), derive_seed(cfg.seed, kInit));
  rep.eval_kind = eval.generator ? "population_mc" : (eval.heldout ? "heldout_ustat" : "none");
  auto& f = rep.model;

  std::optional<TupleSampler> sampler;
  TupleSet tuples(cfg.regime, k);
  bool lazy = false;
  switch (cfg.regime) {
    case Regime::IidDisjoint:
      tuples = fixed != nullptr ? *fixed : greedy_iid_tuples(ds, k, {}, derive_seed(cfg.seed, kTuples));
      if (tuples.empty()) {
        throw PreconditionError("IidDisjoint regime: no class can form a tuple (sum of N_c = 0)");
      }
      break;
    case Regime::SubSampled:
      if (fixed == nullptr) {
        sampler.emplace(ds, k);
        if (cfg.m_tuples == 0) throw PreconditionError("SubSampled regime needs m_tuples >= 1");
        lazy = cfg.m_tuples > cfg.materialize_limit;
        if (lazy && cfg.steps_per_epoch == 0) {
          throw ConfigError("steps_per_epoch is required when m_tuples exceeds materialize_limit");
        }
        if (!lazy) tuples = subsample_tuples(ds, k, cfg.m_tuples, derive_seed(cfg.seed, kTuples));
      } else {
        tuples = *fixed;
        if (tuples.empty()) throw PreconditionError("SubSampled regime: empty tuple set");
      }
      break;
    case Regime::AllTuples: {
      const BigCount count = count_all_tuples(ds, k);
      if (count == 0) throw PreconditionError("AllTuples regime: no valid tuple exists");
      if (!cfg.force_all_tuples) check_tuple_cap(count, cfg.all_tuples_cap, "AllTuples regime");
      break;
    }
  }
  rep.n_tuples = cfg.regime == Regime::AllTuples
                     ? count_all_tuples(ds, k).convert_to<std::size_t>()
                     : (lazy ? cfg.m_tuples : tuples.size());

  // Fixed monitor set behind the reported training loss.
  TupleSet monitor(cfg.regime, k);
  const bool fixed_set = cfg.regime == Regime::IidDisjoint || fixed != nullptr ||
                         (!lazy && !cfg.resample_per_epoch);
  if (cfg.regime != Regime::AllTuples) {
    if (fixed_set && tuples.size() <= cfg.monitor_tuples) {
      monitor = tuples;
    } else if (fixed_set) {
      std::vector<std::size_t> rows(tuples.size());
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      std::mt19937_64 mrng(derive_seed(cfg.seed, kMonitor));
      shuffle(rows, mrng);
      rows.resize(cfg.monitor_tuples);
      monitor = gather(tuples, rows);
    } else {
      std::mt19937_64 mrng(derive_seed(cfg.seed, kMonitor));
      sampler->draw_into(cfg.monitor_tuples, mrng, monitor);
    }
  }
  auto objective = [&]() {
    if (cfg.regime == Regime::AllTuples) {
      return ustat_overall(f, ds, k, cfg.loss, EstimateMode::exact(std::numeric_limits<std::uint64_t>::max())).value;
    }
    return mean_loss(f, ds, monitor, cfg.loss);
  };
  auto maybe_eval = [&](std::size_t epoch) {
    if (!eval.generator && !eval.heldout) return;
    const bool due = epoch == 0 || epoch == cfg.epochs ||
                     (cfg.eval_every > 0 && epoch % cfg.eval_every == 0);
    if (due) rep.evals.push_back(evaluate(f, cfg, eval, epoch));
  };

  rep.train_loss.push_back(objective());
  maybe_eval(0);

  ModelGradient velocity = zero_gradient(f);
  std::mt19937_64 order_rng(derive_seed(cfg.seed, kOrder));
  std::mt19937_64 lazy_rng(derive_seed(cfg.seed, kLazy));
  std::vector<std::size_t> order(tuples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();  // forces a shuffle on first use

  auto step = [&](const BatchGradient& bg) {
    check_finite(bg, rep.steps);
    if (cfg.momentum > 0.0) {
      velocity *= cfg.momentum;
      velocity += bg.grad;
      apply_update(f, velocity, cfg.lr);
    } else {
      apply_update(f, bg.grad, cfg.lr);
    }
    f.project();
    ++rep.steps;
  };

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.regime == Regime::AllTuples) {
      const std::size_t steps = std::max<std::size_t>(1, cfg.steps_per_epoch);
      for (std::size_t s = 0; s < steps; ++s) step(all_tuples_gradient(f, ds, k, cfg.loss));
    } else if (lazy) {
      TupleSet batch(Regime::SubSampled, k);
      for (std::size_t s = 0; s < cfg.steps_per_epoch; ++s) {
        batch = TupleSet(Regime::SubSampled, k);
        sampler->draw_into(cfg.batch, lazy_rng, batch);
        step(backward(f, ds, batch, cfg.loss));
      }
    } else {
      if (cfg.regime == Regime::SubSampled && fixed == nullptr && cfg.resample_per_epoch &&
          epoch > 1) {
        tuples = subsample_tuples(ds, k, cfg.m_tuples, derive_seed(cfg.seed, kResample + epoch));
        cursor = order.size();
      }
      const std::size_t bsz = std::min(cfg.batch, tuples.size());
      const std::size_t steps = cfg.steps_per_epoch > 0
                                    ? cfg.steps_per_epoch
                                    : (tuples.size() + bsz - 1) / bsz;
      std::vector<std::size_t> rows;
      for (std::size_t s = 0; s < steps; ++s) {
        rows.clear();
        while (rows.size() < bsz) {
          if (cursor == order.size()) {
            shuffle(order, order_rng);
            cursor = 0;
          }
          const std::size_t take = std::min(bsz - rows.size(), order.size() - cursor);
          rows.insert(rows.end(), order.begin() + static_cast<std::ptrdiff_t>(cursor),
                      order.begin() + static_cast<std::ptrdiff_t>(cursor + take));
          cursor += take;
          if (cfg.steps_per_epoch == 0 && cursor == order.size()) break;  // ragged last batch
        }
        step(backward(f, ds, gather(tuples, rows), cfg.loss));
      }
    }
    rep.train_loss.push_back(objective());
    maybe_eval(epoch);
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace uscrl
