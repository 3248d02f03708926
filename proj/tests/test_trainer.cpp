#include <doctest.h>

#include <Eigen/SVD>

#include "support.hpp"
#include "uscrl/error.hpp"
#include "uscrl/experiments.hpp"
#include "uscrl/trainer.hpp"

using namespace uscrl;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.model.hidden = {8};
  c.model.output_dim = 4;
  c.model.spectral_cap = 2.0;
  c.k = 2;
  c.m_tuples = 300;
  c.epochs = 4;
  c.batch = 16;
  c.lr = 0.05;
  c.eval_draws = 2000;
  c.probe_samples = 200;
  return c;
}

GaussianSpec blobs(std::size_t classes, std::uint64_t seed) {
  return make_gaussian_spec(classes, 6, 0.3, 3.0, seed);
}

double top_singular(const Eigen::MatrixXd& a) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues()[0];
}

}  // namespace

TEST_CASE("zero learning rate keeps the projected initialization") {
  const auto spec = blobs(3, 1);
  const auto ds = generate_gaussian(spec, 90, 2);
  auto cfg = small_config();
  cfg.lr = 0.0;
  cfg.resample_per_epoch = false;
  const auto rep = train(ds, cfg);
  auto init = build_model(cfg.model, ds.dim(), derive_seed(cfg.seed, 1));
  init.project();
  REQUIRE(init.num_layers() == rep.model.num_layers());
  for (std::size_t l = 0; l < init.num_layers(); ++l) {
    CHECK((init.layer(l).weight - rep.model.layer(l).weight).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(rep.steps > 0);
  for (double l : rep.train_loss) CHECK(l == rep.train_loss.front());
  CHECK(rep.train_loss.size() == cfg.epochs + 1);
  CHECK(rep.eval_kind == "none");
  CHECK(rep.evals.empty());
}

TEST_CASE("training is deterministic in the seed") {
  const auto spec = blobs(3, 3);
  const auto ds = generate_gaussian(spec, 120, 4);
  for (Regime r : {Regime::IidDisjoint, Regime::SubSampled}) {
    auto cfg = small_config();
    cfg.regime = r;
    const auto a = train(ds, cfg, EvalSource{spec, std::nullopt});
    const auto b = train(ds, cfg, EvalSource{spec, std::nullopt});
    CHECK(a.model == b.model);
    CHECK(a.train_loss == b.train_loss);
    CHECK(a.final_risk() == b.final_risk());
    cfg.seed = 1;
    CHECK_FALSE(train(ds, cfg).model == a.model);
  }
}

TEST_CASE("separable blobs: risk falls in most seeds") {
  const auto spec = blobs(3, 5);
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto ds = generate_gaussian(spec, 150, 100 + seed);
    auto cfg = small_config();
    cfg.seed = seed;
    cfg.epochs = 6;
    const auto rep = train(ds, cfg, EvalSource{spec, std::nullopt});
    REQUIRE(rep.evals.size() == 2);
    if (rep.evals.back().risk < rep.evals.front().risk) ++improved;
    REQUIRE(rep.evals.back().probe_accuracy.has_value());
  }
  CHECK(improved >= 4);
}

TEST_CASE("projected steps respect the spectral caps") {
  const auto spec = blobs(3, 7);
  const auto ds = generate_gaussian(spec, 120, 8);
  auto cfg = small_config();
  cfg.lr = 2.0;  // large steps push every layer onto its cap
  cfg.model.spectral_cap = 1.5;
  const auto rep = train(ds, cfg);
  for (const auto& layer : rep.model.layers()) {
    CHECK(top_singular(layer.weight) <= 1.5 * (1 + 1e-6));
  }

  cfg.model.family = ModelFamily::Linear;
  cfg.model.spectral_cap = 1.0;
  cfg.model.norm21_cap = 1.2;
  const auto lin = train(ds, cfg);
  CHECK(top_singular(lin.model.layer(0).weight) <= 1.0 + 1e-6);
  CHECK(norm21_transpose(lin.model.layer(0).weight) <= 1.2 * (1 + 1e-12));
}

TEST_CASE("all-tuples regime is full-batch descent on the U-statistic") {
  const auto ds = test::make_pool({4, 4, 3}, 3, 9);
  auto cfg = small_config();
  cfg.regime = Regime::AllTuples;
  cfg.lr = 0.02;
  cfg.epochs = 5;
  const auto rep = train(ds, cfg);
  CHECK(rep.n_tuples == count_all_tuples(ds, 2).convert_to<std::size_t>());
  CHECK(rep.steps == 5);
  const double u = ustat_overall(rep.model, ds, 2, cfg.loss, EstimateMode::exact()).value;
  CHECK(rep.train_loss.back() == doctest::Approx(u).epsilon(1e-12));
  CHECK(rep.train_loss.back() < rep.train_loss.front());

  cfg.all_tuples_cap = 10;
  CHECK_THROWS_AS(train(ds, cfg), SizeError);
  cfg.force_all_tuples = true;
  CHECK_NOTHROW(train(ds, cfg));
}

TEST_CASE("configuration errors") {
  const auto ds = test::make_pool({4, 4}, 3, 1);
  auto cfg = small_config();
  cfg.epochs = 0;
  CHECK_THROWS_AS(train(ds, cfg), ConfigError);
  cfg = small_config();
  cfg.lr = -1;
  CHECK_THROWS_AS(train(ds, cfg), ConfigError);
  cfg = small_config();
  cfg.m_tuples = 0;
  CHECK_THROWS_AS(train(ds, cfg), PreconditionError);
  cfg = small_config();
  cfg.m_tuples = 5000;
  cfg.materialize_limit = 100;
  CHECK_THROWS_AS(train(ds, cfg), ConfigError);
  cfg.steps_per_epoch = 3;
  const auto rep = train(ds, cfg);
  CHECK(rep.steps == 3 * cfg.epochs);
  CHECK(rep.n_tuples == 5000);
}

TEST_CASE("regime comparison rows") {
  const auto spec = blobs(3, 11);
  const auto pool = generate_gaussian(spec, 200, 12);
  auto cfg = small_config();
  cfg.epochs = 2;
  RegimeOptions opt;
  opt.n_disjoint = 4;
  opt.m_grid = {40, 80};
  opt.seeds = {0, 1};
  const auto rows = compare_regimes(pool, cfg, opt, EvalSource{spec, std::nullopt});
  // iid + two sub-sampled + all-tuples, per seed.
  REQUIRE(rows.size() == 8);
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(rows[4 * s].regime == Regime::IidDisjoint);
    CHECK(rows[4 * s].m_tuples == 4);
    CHECK(rows[4 * s + 1].m_tuples == 40);
    CHECK(rows[4 * s + 2].m_tuples == 80);
    CHECK(rows[4 * s + 3].regime == Regime::AllTuples);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(rows[4 * s + j].seed == s);
      CHECK(std::isfinite(rows[4 * s + j].final_risk));
    }
  }
  opt.n_disjoint = 1000;
  CHECK_THROWS_AS(compare_regimes(pool, cfg, opt, EvalSource{spec, std::nullopt}), PreconditionError);
}

TEST_CASE("sample complexity search") {
  const auto spec = blobs(3, 13);
  auto cfg = small_config();
  cfg.epochs = 1;
  cfg.m_tuples = 100;
  ComplexityOptions opt;
  opt.epsilon = 100.0;  // every N qualifies
  opt.lo = 20;
  opt.hi = 60;
  opt.search_tol = 10;
  opt.seeds = {0, 1};
  opt.ref_multiplier = 1;
  opt.ref_epoch_factor = 1;
  opt.m_equals_n_squared = false;
  const auto r = sample_complexity_search(spec, cfg, opt);
  CHECK(r.reached == 2);
  CHECK(*r.mean_n_eps == 20.0);
  for (const auto& s : r.seeds) CHECK(*s.n_eps == 20);

  opt.epsilon = 1e-9;
  opt.seeds = {0};
  const auto none = sample_complexity_search(spec, cfg, opt);
  CHECK(none.reached + (none.seeds[0].gap_at_hi <= 1e-9 ? 0 : 1) == 1);

  opt.lo = 60;
  CHECK_THROWS_AS(sample_complexity_search(spec, cfg, opt), PreconditionError);
}
