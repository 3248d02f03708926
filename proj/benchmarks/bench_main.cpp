#include <benchmark/benchmark.h>

#include <random>

#include "uscrl/bounds.hpp"
#include "uscrl/dataset.hpp"
#include "uscrl/loss.hpp"
#include "uscrl/model.hpp"
#include "uscrl/risk.hpp"
#include "uscrl/trainer.hpp"
#include "uscrl/tuples.hpp"

namespace {

using namespace uscrl;

LabeledDataset pool(std::size_t n, std::size_t classes, std::size_t dim) {
  return generate_gaussian(make_gaussian_spec(classes, dim, 0.1, 1.0, 7), n, 11);
}

void BM_TupleSampler(benchmark::State& state) {
  const auto ds = pool(static_cast<std::size_t>(state.range(0)), 5, 8);
  const TupleSampler sampler(ds, 2);
  std::mt19937_64 rng(1);
  SampleIndex a, p, negs[2];
  ClassId c;
  for (auto _ : state) {
    sampler.draw(rng, a, p, negs, c);
    benchmark::DoNotOptimize(a);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TupleSampler)->Arg(100)->Arg(10000);

void BM_UStatExact(benchmark::State& state) {
  const auto ds = pool(static_cast<std::size_t>(state.range(0)), 3, 8);
  const auto f = RepresentationModel::init_linear(4, 8, kInf, 1.0, 3);
  const auto reps = representations(f, ds);
  const LossSpec loss = logistic_loss(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ustat_overall(reps, ds, 1, loss, EstimateMode::exact(10'000'000)).value);
  }
}
BENCHMARK(BM_UStatExact)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_UStatMonteCarlo(benchmark::State& state) {
  const auto ds = pool(1000, 5, 16);
  const auto f = RepresentationModel::init_linear(8, 16, kInf, 1.0, 3);
  const auto reps = representations(f, ds);
  const LossSpec loss = logistic_loss(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ustat_overall(reps, ds, 2, loss, EstimateMode::monte_carlo(state.range(0), 5)).value);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_UStatMonteCarlo)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_PopulationRisk(benchmark::State& state) {
  const auto spec = make_gaussian_spec(5, 128, 0.1, 1.0, 7);
  const auto f = build_model(ModelConfig{}, 128, 1);
  const LossSpec loss = logistic_loss(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(population_risk_mc(f, spec, 2, loss, state.range(0), 9).value);
  }
}
BENCHMARK(BM_PopulationRisk)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_SpectralNorm(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_norm(a));
}
BENCHMARK(BM_SpectralNorm)->Arg(32)->Arg(128);

void BM_TrainEpoch(benchmark::State& state) {
  const auto spec = make_gaussian_spec(5, 32, 0.1, 1.0, 7);
  const auto ds = generate_gaussian(spec, 200, 3);
  TrainConfig cfg;
  cfg.model.hidden = {32};
  cfg.model.output_dim = 16;
  cfg.loss = logistic_loss(2);
  cfg.m_tuples = static_cast<std::size_t>(state.range(0));
  cfg.epochs = 1;
  cfg.run_probe = false;
  cfg.monitor_tuples = 256;
  for (auto _ : state) benchmark::DoNotOptimize(train(ds, cfg).steps);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainEpoch)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_BoundGrid(benchmark::State& state) {
  BoundInputs in;
  in.num_classes = 10;
  in.k = 4;
  in.delta = 0.05;
  in.loss_bound = 4.0;
  in.linear = LinearClassParams{1.0, 1.0, 1.0, 784};
  for (auto _ : state) {
    for (double n = 1e3; n < 1e7; n *= 1.5) {
      in.n = n;
      benchmark::DoNotOptimize(basic_linear_bound(in).total);
    }
  }
}
BENCHMARK(BM_BoundGrid);

}  // namespace
BENCHMARK_MAIN();
