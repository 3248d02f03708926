#include <doctest.h>

#include <bit>
#include <random>

#include "bound_oracle.hpp"
#include "support.hpp"
#include "uscrl/bounds.hpp"
#include "uscrl/error.hpp"

using namespace uscrl;
using test::Big;
using test::Oracle;
using test::random_inputs;

namespace {

constexpr auto& kAll = test::kAllTheorems;

BoundInputs base_inputs() {
  BoundInputs in;
  in.n = 10000;
  in.k = 2;
  in.num_classes = 5;
  in.delta = 0.1;
  in.loss_bound = 1.0;
  in.m_tuples = 1e5;
  in.linear = LinearClassParams{1.0, 1.0, 1.0, 8.0};
  in.nn = NnClassParams{96, 1.0, {4.0, 4.0}, {1.0, 1.0}};
  return in;
}

}  // namespace

TEST_CASE("effective N") {
  const std::vector<double> uni(10, 0.1);
  CHECK(effective_n(1000, uni, 3) == doctest::Approx(50.0).epsilon(1e-15));
  CHECK_THROWS_AS(effective_n(1000, std::vector<double>{1.0}, 1), PreconditionError);

  for (std::size_t c = 2; c <= 12; ++c) {
    const std::vector<double> p(c, 1.0 / static_cast<double>(c));
    const double balanced = 1200.0 / (2.0 * c);
    const double cross = 2.0 * (c - 1.0);
    for (double k = 1; k <= 3 * cross; ++k) {
      const double nt = effective_n(1200, p, k);
      if (k <= cross) {
        CHECK(nt == doctest::Approx(balanced).epsilon(1e-12));
      } else {
        CHECK(nt < balanced * (1 - 1e-12));
        CHECK(effective_n(1200, p, 2 * k) == doctest::Approx(nt / 2).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("Chernoff radius") {
  CHECK(chernoff_lambda(1200, 0.1, 10, 0.1, 4) ==
        doctest::Approx(std::sqrt(3 * std::log(400.0) / 120)).epsilon(1e-14));
  CHECK(chernoff_lambda(1200, 0.1, 10, 0.1, 4) == doctest::Approx(0.3870228).epsilon(1e-6));
  CHECK(chernoff_lambda(1e14, 0.1, 10, 0.1, 4) < 1e-5);

  BoundInputs in = base_inputs();
  in.n = 20;
  in.k_per_class.assign(5, 0.0);
  CHECK(basic_bound(in).lambda_vacuous);
  in.n = 1e6;
  CHECK_FALSE(basic_bound(in).lambda_vacuous);
}

TEST_CASE("basic and sub-sampled bounds") {
  BoundInputs in;
  in.num_classes = 10;
  in.n = 1000;
  in.k = 3;  // N~ = 50
  in.delta = 0.1;
  in.loss_bound = 1.0;
  in.k_per_class.assign(10, 0.0);
  const auto r = basic_bound(in);
  CHECK(r.n_tilde == doctest::Approx(50));
  CHECK(r.term("complexity") == 0.0);
  CHECK(r.total == doctest::Approx(44 * std::sqrt(std::log(800.0) / 100)).epsilon(1e-14));
  CHECK(r.total == doctest::Approx(11.3760311).epsilon(1e-8));
  CHECK(r.vacuous);

  in.k_per_class.assign(10, 2.0);
  const auto one = basic_bound(in);
  in.n *= 4;
  const auto four = basic_bound(in);
  CHECK(four.term("complexity") == doctest::Approx(one.term("complexity") / 2).epsilon(1e-14));
  CHECK(four.term("confidence") == doctest::Approx(one.term("confidence") / 2).epsilon(1e-14));

  in.n = 1000;
  in.m_tuples = 400;
  const auto s = subsampled_bound(in, 0.0);
  CHECK(s.term("sub_confidence") == doctest::Approx(6 * std::sqrt(std::log(80.0) / 800)).epsilon(1e-14));
  CHECK(s.term("sub_confidence") == doctest::Approx(0.4440622).epsilon(1e-6));
  CHECK(subsampled_bound(in, 0.25).term("rademacher_sub") == doctest::Approx(1.0));

  in.m_tuples = 1e300;
  const auto lim = subsampled_bound(in, 0.0);
  CHECK(lim.term("sub_confidence") < 1e-140);
  CHECK(lim.total == doctest::Approx(lim.term("complexity") + lim.term("confidence")).epsilon(1e-14));

  in.m_tuples.reset();
  CHECK_THROWS_AS(subsampled_bound(in, 0.0), ConfigError);
  in.k_per_class.clear();
  CHECK_THROWS_AS(basic_bound(in), ConfigError);
  in.k_per_class.assign(10, 0.0);
  in.delta = 1.5;
  CHECK_THROWS_AS(basic_bound(in), ConfigError);
}

TEST_CASE("linear-class constants") {
  const double e = std::exp(1.0);
  const auto lk = linear_class_K(1, 1, 1, 1, e, 1, 1, e);
  const Big be = boost::multiprecision::exp(Big(1));
  const Big phi = boost::multiprecision::log((44 * be + 7) * be * 3) * 2;
  CHECK(std::abs(lk.phi - phi.convert_to<double>()) < 1e-13);

  const auto lo = linear_class_K(1, 1, 1, 1, 1e4, 2, 32, 1);
  const auto hi = linear_class_K(1, 1, 1, 1, 1e5, 2, 32, 1);
  CHECK(hi.phi > lo.phi);
  CHECK(hi.phi < 2 * lo.phi);

  const auto b2 = linear_class_K(1, 1, 1, 2, 1e4, 2, 32, 1);
  CHECK(b2.coefficient == doctest::Approx(4 * lo.coefficient).epsilon(1e-15));
  CHECK(lo.coefficient == doctest::Approx(3072 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(lo.k_constant == doctest::Approx(4e-4 + 384 * std::sqrt(2.0) * lo.phi).epsilon(1e-14));
}

TEST_CASE("network-class constants") {
  const std::vector<double> one{1.0};
  const auto nk = nn_class_K(1, 10, 1, 1, 1, 1, one, one);
  CHECK(nk.log_arg == doctest::Approx(13.0));
  CHECK(nk.k_constant == doctest::Approx(4 + 24 * std::sqrt(10 * std::log(13.0))).epsilon(1e-14));

  BoundInputs in = base_inputs();
  const double c1 = basic_nn_bound(in).term("complexity");
  in.nn->w *= 4;
  CHECK(basic_nn_bound(in).term("complexity") == doctest::Approx(2 * c1).epsilon(1e-14));

  in = base_inputs();
  const auto r = basic_nn_bound(in);
  CHECK(std::abs(r.total - Oracle{in}.total(TheoremId::BasicNn).convert_to<double>()) <= 1e-9 * r.total);
}

TEST_CASE("every theorem matches the 50-digit oracle on random grids") {
  std::mt19937_64 rng(2024);
  for (int g = 0; g < 50; ++g) {
    const BoundInputs in = random_inputs(rng);
    for (TheoremId id : kAll) {
      const auto r = evaluate_bound(id, in);
      const double want = Oracle{in}.total(id).convert_to<double>();
      CHECK(std::abs(r.total - want) <= 1e-9 * std::abs(want));
      double sum = 0;
      for (const auto& t : r.terms) {
        CHECK(t.value >= 0.0);
        sum += t.value;
      }
      CHECK(std::abs(sum - r.total) <= 1e-14 * r.total);
      CHECK(r.vacuous == (r.total >= in.loss_bound));
    }
  }
}

TEST_CASE("monotonicity on five-point axes") {
  const double ns[] = {200, 1000, 5000, 25000, 125000};
  const double deltas[] = {0.5, 0.2, 0.1, 0.05, 0.01};
  const double ms[] = {0.5, 1, 2, 4, 8};
  const double ws[] = {10, 50, 100, 500, 1000};
  const double ks[] = {1, 2, 4, 8, 16};
  for (TheoremId id : kAll) {
    BoundInputs in = base_inputs();
    in.k_per_class.assign(5, 0.7);
    in.emp_rad_sub = 0.01;
    auto sweep = [&](auto set, const auto& grid, int direction) {
      BoundInputs x = in;
      double prev = direction > 0 ? -kInf : kInf;
      for (double v : grid) {
        set(x, v);
        const double t = evaluate_bound(id, x).total;
        if (direction > 0) CHECK(t >= prev);
        else CHECK(t <= prev);
        prev = t;
      }
    };
    sweep([](BoundInputs& x, double v) { x.n = v; }, ns, -1);
    sweep([](BoundInputs& x, double v) { x.delta = v; }, deltas, +1);
    sweep([](BoundInputs& x, double v) { x.loss_bound = v; }, ms, +1);
    sweep([](BoundInputs& x, double v) { x.nn->w = v; }, ws, +1);
    sweep([](BoundInputs& x, double v) { x.k = v; }, ks, +1);
  }
}

TEST_CASE("Dudley entropy integral") {
  const double b = 2.0;
  const auto zero = dudley_bound([](double) { return 0.0; }, 100, b);
  CHECK(zero.value == doctest::Approx(4 * b * 1e-6).epsilon(1e-12));

  // log_cover = C / eps^2 integrates to sqrt(C/n) ln(B / alpha).
  const double c = 3.0, n = 50.0;
  const auto grid = default_alpha_grid(b);
  const auto r = dudley_bound([&](double e) { return c / (e * e); }, n, b);
  double best = kInf;
  for (double a : grid) best = std::min(best, 4 * a + 12 * std::sqrt(c / n) * std::log(b / a));
  CHECK(std::abs(r.value - best) <= 1e-6 * best);

  const double alpha[] = {0.01};
  const auto full = dudley_bound([&](double e) { return c / (e * e); }, n, b, alpha);
  const auto half = dudley_bound([&](double e) { return c / (e * e); }, n / 2, b, alpha);
  CHECK(half.integral == doctest::Approx(std::sqrt(2.0) * full.integral).epsilon(1e-9));

  CHECK_THROWS_AS(dudley_bound([](double) { return kInf; }, n, b), NumericError);
  CHECK_THROWS_AS(dudley_bound([](double) { return std::nan(""); }, n, b), NumericError);
  CHECK(adaptive_simpson([](double x) { return std::exp(x); }, 0, 1) ==
        doctest::Approx(std::exp(1.0) - 1).epsilon(1e-9));
}

TEST_CASE("Rademacher probe") {
  // Single constant candidate: E|sum sigma| / n * const, enumerated exactly.
  for (std::size_t n : {1, 4, 7, 12}) {
    const double cst = 0.8;
    double exact = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      const int s = 2 * std::popcount(mask) - static_cast<int>(n);
      exact += std::abs(s) * cst / static_cast<double>(n);
    }
    exact /= static_cast<double>(1u << n);
    const std::vector<std::vector<double>> table{std::vector<double>(n, cst)};
    const auto p = empirical_rademacher_probe(table, 40000, 5);
    CHECK(std::abs(p.value - exact) <= 4 * p.std_error + 1e-15);
    CHECK(p.lower_estimate);
  }

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1.5);
  std::vector<std::vector<double>> t(3, std::vector<double>(20));
  for (auto& row : t)
    for (auto& x : row) x = u(rng);
  const auto base = empirical_rademacher_probe(t, 500, 9);
  auto dup = t;
  dup.push_back(t[0]);
  dup.push_back(t[2]);
  CHECK(empirical_rademacher_probe(dup, 500, 9).value == base.value);
  CHECK(base.value <= 1.5);

  const auto ds = test::make_pool({5, 5}, 3, 1);
  const auto tset = subsample_tuples(ds, 1, 30, 2);
  LossSpec clipped;
  clipped.clip = 1.0;
  std::vector<RepresentationModel> cands{test::random_linear(2, 3, 1, 3.0), test::random_linear(2, 3, 2, 3.0)};
  CHECK(empirical_rademacher_probe(cands, ds, tset, clipped, 200, 3).value <= 1.0);
  CHECK_THROWS_AS(empirical_rademacher_probe(std::vector<std::vector<double>>{}, 10, 1), PreconditionError);
}
