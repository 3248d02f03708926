#include "uscrl/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "uscrl/combinatorics.hpp"
#include "uscrl/error.hpp"
#include "uscrl/risk.hpp"
#include "uscrl/summation.hpp"

namespace uscrl {

namespace {

// Columns: lambda_log_mult, complexity, confidence, confidence_log, rad,
// sub_confidence, sub_confidence_log, offset, sub_offset, class_coef, sqrt2.
constexpr std::array<TheoremConstants, 6> kTheorems{{
    {TheoremId::Basic, 8, 8, 44, 8, 0, 0, 0, 0, 0, 0, 0},
    {TheoremId::Subsampled, 16, 8, 44, 16, 4, 6, 8, 0, 0, 0, 0},
    {TheoremId::BasicLinear, 8, 0, 44, 8, 0, 0, 0, 32, 0, 3072, 1},
    {TheoremId::BasicNn, 8, 0, 44, 8, 0, 0, 0, 32, 0, 192, 0},
    {TheoremId::SubsampledLinear, 16, 0, 44, 16, 0, 6, 8, 32, 4, 3072, 1},
    {TheoremId::SubsampledNn, 16, 0, 44, 16, 0, 6, 8, 32, 4, 24, 0},
}};

constexpr std::array<std::pair<TheoremId, std::string_view>, 6> kNames{{
    {TheoremId::Basic, "basic"},
    {TheoremId::Subsampled, "subsampled"},
    {TheoremId::BasicLinear, "basic_linear"},
    {TheoremId::BasicNn, "basic_nn"},
    {TheoremId::SubsampledLinear, "subsampled_linear"},
    {TheoremId::SubsampledNn, "subsampled_nn"},
}};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

std::string_view to_string(TheoremId id) {
  for (const auto& [t, name] : kNames) {
    if (t == id) return name;
  }
  return "?";
}

TheoremId theorem_from_string(std::string_view s) {
  for (const auto& [t, name] : kNames) {
    if (name == s) return t;
  }
  throw ConfigError("unknown theorem id '" + std::string(s) + "'");
}

const TheoremConstants& theorem_constants(TheoremId id) {
  for (const auto& c : kTheorems) {
    if (c.id == id) return c;
  }
  throw ConfigError("no constants for theorem");
}

void BoundInputs::validate() const {
  require(positive_finite(n), "n must be finite and > 0");
  require(std::isfinite(k) && k >= 1.0, "k must be >= 1");
  require(num_classes >= 2, "num_classes must be >= 2");
  if (!priors.empty()) {
    require(priors.size() == num_classes, "priors must have num_classes entries");
    double sum = 0.0;
    for (std::size_t c = 0; c < priors.size(); ++c) {
      require(positive_finite(priors[c]), "priors[" + std::to_string(c) + "] must be > 0");
      sum += priors[c];
    }
    require(std::abs(sum - 1.0) <= 1e-9, "priors must sum to 1");
  }
  require(std::isfinite(delta) && delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(positive_finite(loss_bound), "loss_bound must be finite and > 0");
  require(positive_finite(eta), "eta must be finite and > 0");
  if (m_tuples) require(std::isfinite(*m_tuples) && *m_tuples >= 1.0, "m_tuples must be >= 1");
  if (!k_per_class.empty()) {
    require(k_per_class.size() == num_classes, "k_per_class must have num_classes entries");
    for (double v : k_per_class) require(std::isfinite(v) && v >= 0.0, "k_per_class entries must be >= 0");
  }
  require(std::isfinite(emp_rad_sub) && emp_rad_sub >= 0.0, "emp_rad_sub must be >= 0");
  if (linear) {
    require(positive_finite(linear->a), "linear.a must be > 0");
    require(positive_finite(linear->s), "linear.s must be > 0");
    require(positive_finite(linear->b), "linear.b must be > 0");
    require(positive_finite(linear->d), "linear.d must be > 0");
  }
  if (nn) {
    require(positive_finite(nn->w), "nn.w must be > 0");
    require(positive_finite(nn->b), "nn.b must be > 0");
    require(!nn->s.empty() && nn->s.size() == nn->xi.size(),
            "nn.s and nn.xi must be non-empty and of equal length");
    for (double v : nn->s) require(positive_finite(v), "nn.s entries must be > 0");
    for (double v : nn->xi) require(positive_finite(v), "nn.xi entries must be > 0");
  }
}

std::vector<double> BoundInputs::resolved_priors() const {
  if (!priors.empty()) return priors;
  return std::vector<double>(num_classes, 1.0 / static_cast<double>(num_classes));
}

double BoundReport::term(std::string_view name) const {
  for (const auto& t : terms) {
    if (t.name == name) return t.value;
  }
  throw PreconditionError("bound report has no term '" + std::string(name) + "'");
}

double effective_n(double n, std::span<const double> priors, double k) {
  if (priors.size() < 2) throw PreconditionError("effective_n needs |C| >= 2 (1 - rho_max = 0)");
  const auto [mn, mx] = std::minmax_element(priors.begin(), priors.end());
  if (!(*mx < 1.0)) throw PreconditionError("effective_n: rho_max must be < 1");
  return n * std::min(*mn / 2.0, (1.0 - *mx) / k);
}

double chernoff_lambda(double n, double rho_min, std::size_t num_classes, double delta,
                       double log_mult) {
  return std::sqrt(3.0 * std::log(log_mult * static_cast<double>(num_classes) / delta) /
                   (n * rho_min));
}

LinearK linear_class_K(double eta, double s, double a, double b, double n, double k, double d,
                       double loss_bound) {
  const auto& cc = kClassConstants;
  const double esab2 = eta * s * a * b * b;
  const double phi =
      std::log((cc.linear_log_a * n * esab2 + cc.linear_log_b) * n * (k + 2.0) * d) *
      std::log(n * loss_bound);
  const double k_const = cc.k_offset / n + cc.linear_coef * std::sqrt(2.0) * esab2 * phi;
  const double coef = theorem_constants(TheoremId::BasicLinear).class_coef * std::sqrt(2.0) * esab2;
  return {k_const, phi, coef};
}

NnK nn_class_K(double loss_bound, double w, double eta, double n, std::size_t depth, double b,
               std::span<const double> xi, std::span<const double> s) {
  const auto& cc = kClassConstants;
  double prod = 1.0;
  for (std::size_t l = 0; l < s.size(); ++l) prod *= xi[l] * xi[l] * s[l] * s[l];
  const double arg = cc.nn_log_a * eta * n * static_cast<double>(depth) * b * b * prod + 1.0;
  const double k_const = cc.k_offset / n + cc.nn_coef * loss_bound * std::sqrt(w * std::log(arg));
  return {k_const, arg};
}

namespace {

BoundReport start_report(TheoremId id, const BoundInputs& in) {
  in.validate();
  const auto& tc = theorem_constants(id);
  const auto priors = in.resolved_priors();
  BoundReport r;
  r.theorem = id;
  r.prior_source = in.prior_source;
  r.n_tilde = effective_n(in.n, priors, in.k);
  const double rho_min = *std::min_element(priors.begin(), priors.end());
  r.lambda = chernoff_lambda(in.n, rho_min, in.num_classes, in.delta, tc.lambda_log_mult);
  r.lambda_vacuous = r.lambda >= 1.0;
  return r;
}

void finish_report(BoundReport& r, const BoundInputs& in) {
  CompensatedSum s;
  for (const auto& t : r.terms) s.add(t.value);
  r.total = s.value();
  r.vacuous = r.total >= in.loss_bound;
}

double confidence_term(const TheoremConstants& tc, const BoundInputs& in, double n_tilde) {
  return tc.confidence_coef * in.loss_bound *
         std::sqrt(std::log(tc.confidence_log_mult * static_cast<double>(in.num_classes) / in.delta) /
                   (2.0 * n_tilde));
}

double sub_confidence_term(const TheoremConstants& tc, const BoundInputs& in) {
  return tc.sub_confidence_coef * in.loss_bound *
         std::sqrt(std::log(tc.sub_confidence_log / in.delta) / (2.0 * *in.m_tuples));
}

// sum_c rho(c) K_{F,c}, from explicit constants or the model-class formulas.
double weighted_k(const BoundInputs& in, BoundReport& r) {
  const auto priors = in.resolved_priors();
  if (!in.k_per_class.empty()) {
    double s = 0.0;
    for (std::size_t c = 0; c < priors.size(); ++c) s += priors[c] * in.k_per_class[c];
    return s;
  }
  if (in.linear) {
    const auto& p = *in.linear;
    const auto lk = linear_class_K(in.eta, p.s, p.a, p.b, in.n, in.k, p.d, in.loss_bound);
    r.k_constant = lk.k_constant;
    r.phi = lk.phi;
    return lk.k_constant;  // same K for every class, priors sum to 1
  }
  if (in.nn) {
    const auto& p = *in.nn;
    const auto nk = nn_class_K(in.loss_bound, p.w, in.eta, in.n, p.depth(), p.b, p.xi, p.s);
    r.k_constant = nk.k_constant;
    return nk.k_constant;
  }
  throw ConfigError("bound needs k_per_class or model-class parameters (linear or nn)");
}

void require_m(const BoundInputs& in) {
  if (!in.m_tuples) throw ConfigError("sub-sampled theorems need m_tuples");
}

}  // namespace

BoundReport basic_bound(const BoundInputs& in) {
  BoundReport r = start_report(TheoremId::Basic, in);
  const auto& tc = theorem_constants(TheoremId::Basic);
  const double wk = weighted_k(in, r);
  r.terms.push_back({"complexity", tc.complexity_coef / std::sqrt(r.n_tilde) * wk});
  r.terms.push_back({"confidence", confidence_term(tc, in, r.n_tilde)});
  finish_report(r, in);
  return r;
}

BoundReport subsampled_bound(const BoundInputs& in, double emp_rad_sub) {
  require_m(in);
  if (!(std::isfinite(emp_rad_sub) && emp_rad_sub >= 0.0)) {
    throw ConfigError("emp_rad_sub must be >= 0");
  }
  BoundReport r = start_report(TheoremId::Subsampled, in);
  const auto& tc = theorem_constants(TheoremId::Subsampled);
  const double wk = weighted_k(in, r);
  r.terms.push_back({"rademacher_sub", tc.rad_coef * emp_rad_sub});
  r.terms.push_back({"complexity", tc.complexity_coef / std::sqrt(r.n_tilde) * wk});
  r.terms.push_back({"sub_confidence", sub_confidence_term(tc, in)});
  r.terms.push_back({"confidence", confidence_term(tc, in, r.n_tilde)});
  finish_report(r, in);
  return r;
}

namespace {

void require_linear(const BoundInputs& in) {
  if (!in.linear) throw ConfigError("linear-class theorem needs the linear parameters");
}

void require_nn(const BoundInputs& in) {
  if (!in.nn) throw ConfigError("network-class theorem needs the nn parameters");
}

}  // namespace

BoundReport basic_linear_bound(const BoundInputs& in) {
  require_linear(in);
  BoundReport r = start_report(TheoremId::BasicLinear, in);
  const auto& tc = theorem_constants(TheoremId::BasicLinear);
  const auto& p = *in.linear;
  const auto lk = linear_class_K(in.eta, p.s, p.a, p.b, in.n, in.k, p.d, in.loss_bound);
  r.k_constant = lk.k_constant;
  r.phi = lk.phi;
  const double sq = std::sqrt(r.n_tilde);
  r.terms.push_back({"offset", tc.offset_coef / (in.n * sq)});
  r.terms.push_back({"complexity", lk.coefficient * lk.phi / sq});
  r.terms.push_back({"confidence", confidence_term(tc, in, r.n_tilde)});
  finish_report(r, in);
  return r;
}

BoundReport basic_nn_bound(const BoundInputs& in) {
  require_nn(in);
  BoundReport r = start_report(TheoremId::BasicNn, in);
  const auto& tc = theorem_constants(TheoremId::BasicNn);
  const auto& p = *in.nn;
  const auto nk = nn_class_K(in.loss_bound, p.w, in.eta, in.n, p.depth(), p.b, p.xi, p.s);
  r.k_constant = nk.k_constant;
  r.terms.push_back({"offset", tc.offset_coef / (in.n * std::sqrt(r.n_tilde))});
  r.terms.push_back({"complexity", tc.class_coef * in.loss_bound *
                                       std::sqrt(p.w / r.n_tilde * std::log(nk.log_arg))});
  r.terms.push_back({"confidence", confidence_term(tc, in, r.n_tilde)});
  finish_report(r, in);
  return r;
}

BoundReport subsampled_linear_bound(const BoundInputs& in) {
  require_linear(in);
  require_m(in);
  BoundReport r = start_report(TheoremId::SubsampledLinear, in);
  const auto& tc = theorem_constants(TheoremId::SubsampledLinear);
  const auto& p = *in.linear;
  const auto lk = linear_class_K(in.eta, p.s, p.a, p.b, in.n, in.k, p.d, in.loss_bound);
  r.k_constant = lk.k_constant;
  r.phi = lk.phi;
  const double m = *in.m_tuples;
  const double lead = lk.coefficient * lk.phi;
  r.terms.push_back({"sub_offset", tc.sub_offset_coef / m});
  r.terms.push_back({"offset", tc.offset_coef / (in.n * std::sqrt(r.n_tilde))});
  r.terms.push_back({"sub_complexity", lead / std::sqrt(m)});
  r.terms.push_back({"complexity", lead / std::sqrt(r.n_tilde)});
  r.terms.push_back({"sub_confidence", sub_confidence_term(tc, in)});
  r.terms.push_back({"confidence", confidence_term(tc, in, r.n_tilde)});
  finish_report(r, in);
  return r;
}

BoundReport subsampled_nn_bound(const BoundInputs& in) {
  require_nn(in);
  require_m(in);
  BoundReport r = start_report(TheoremId::SubsampledNn, in);
  const auto& tc = theorem_constants(TheoremId::SubsampledNn);
  const auto& p = *in.nn;
  const auto nk = nn_class_K(in.loss_bound, p.w, in.eta, in.n, p.depth(), p.b, p.xi, p.s);
  r.k_constant = nk.k_constant;
  const double m = *in.m_tuples;
  const double lead = tc.class_coef * in.loss_bound * std::sqrt(p.w) * std::sqrt(std::log(nk.log_arg));
  r.terms.push_back({"sub_offset", tc.sub_offset_coef / m});
  r.terms.push_back({"offset", tc.offset_coef / (in.n * std::sqrt(r.n_tilde))});
  r.terms.push_back({"complexity", lead / std::sqrt(r.n_tilde)});
  r.terms.push_back({"sub_complexity", lead / std::sqrt(m)});
  r.terms.push_back({"sub_confidence", sub_confidence_term(tc, in)});
  r.terms.push_back({"confidence", confidence_term(tc, in, r.n_tilde)});
  finish_report(r, in);
  return r;
}

BoundReport evaluate_bound(TheoremId id, const BoundInputs& in) {
  switch (id) {
    case TheoremId::Basic: return basic_bound(in);
    case TheoremId::Subsampled: return subsampled_bound(in, in.emp_rad_sub);
    case TheoremId::BasicLinear: return basic_linear_bound(in);
    case TheoremId::BasicNn: return basic_nn_bound(in);
    case TheoremId::SubsampledLinear: return subsampled_linear_bound(in);
    case TheoremId::SubsampledNn: return subsampled_nn_bound(in);
  }
  throw ConfigError("unknown theorem");
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  // A coarse 16-panel pass sets the scale for the relative tolerance.
  double coarse = 0.0;
  const double h = (b - a) / 16.0;
  for (int i = 0; i < 16; ++i) {
    const double x0 = a + h * i;
    coarse += h / 6.0 * (f(x0) + 4.0 * f(x0 + h / 2.0) + f(x0 + h));
  }
  const double tol = rel_tol * std::abs(coarse);
  const double r = simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
  if (!std::isfinite(r)) throw NumericError("quadrature produced a non-finite value");
  return r;
}

std::vector<double> default_alpha_grid(double b_sup, std::size_t points) {
  std::vector<double> grid(points);
  const double lo = std::log(b_sup * 1e-6);
  const double hi = std::log(b_sup);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = points == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(points - 1);
    grid[i] = std::exp(lo + t * (hi - lo));
  }
  grid.front() = b_sup * 1e-6;
  grid.back() = b_sup;
  return grid;
}

DudleyResult dudley_bound(const std::function<double(double)>& log_cover, double n,
                          double b_sup, std::span<const double> alpha_grid) {
  if (!positive_finite(b_sup)) throw PreconditionError("dudley_bound: B must be > 0");
  if (!positive_finite(n)) throw PreconditionError("dudley_bound: n must be > 0");
  std::vector<double> grid_store;
  if (alpha_grid.empty()) {
    grid_store = default_alpha_grid(b_sup);
    alpha_grid = grid_store;
  }
  auto integrand = [&](double u) {
    const double e = std::exp(u);
    const double lc = log_cover(e);
    if (!std::isfinite(lc)) {
      throw NumericError("log covering number is not finite at eps = " + std::to_string(e));
    }
    return std::sqrt(std::max(0.0, lc) / n) * e;
  };
  DudleyResult best;
  best.value = kInf;
  for (double alpha : alpha_grid) {
    if (!(alpha > 0.0) || alpha > b_sup) {
      throw PreconditionError("dudley_bound: alpha grid must lie in (0, B]");
    }
    const double integral = 12.0 * adaptive_simpson(integrand, std::log(alpha), std::log(b_sup));
    const double v = 4.0 * alpha + integral;
    if (v < best.value) best = {v, alpha, integral};
  }
  return best;
}

RademacherProbe empirical_rademacher_probe(const std::vector<std::vector<double>>& losses,
                                           std::size_t num_sigma, std::uint64_t seed) {
  if (losses.empty()) throw PreconditionError("rademacher probe needs at least one candidate");
  const std::size_t n = losses.front().size();
  if (n == 0) throw PreconditionError("rademacher probe needs a non-empty tuple set");
  for (const auto& row : losses) {
    if (row.size() != n) throw PreconditionError("loss rows differ in length");
  }
  if (num_sigma == 0) throw PreconditionError("rademacher probe needs num_sigma >= 1");
  std::mt19937_64 rng(seed);
  std::vector<double> sigma(n);
  RunningStats stats;
  for (std::size_t r = 0; r < num_sigma; ++r) {
    for (std::size_t j = 0; j < n; ++j) sigma[j] = (rng() >> 63) ? 1.0 : -1.0;
    double best = 0.0;
    for (const auto& row : losses) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += sigma[j] * row[j];
      best = std::max(best, std::abs(s) / static_cast<double>(n));
    }
    stats.add(best);
  }
  return {stats.mean(), stats.std_error(), num_sigma, true};
}

RademacherProbe empirical_rademacher_probe(std::span<const RepresentationModel> candidates,
                                           const LabeledDataset& ds, const TupleSet& tset,
                                           const LossSpec& loss, std::size_t num_sigma,
                                           std::uint64_t seed) {
  if (candidates.empty()) throw PreconditionError("rademacher probe needs at least one candidate");
  std::vector<std::vector<double>> table;
  table.reserve(candidates.size());
  for (const auto& f : candidates) {
    const Eigen::MatrixXd reps = representations(f, ds);
    std::vector<double> row(tset.size());
    for (std::size_t j = 0; j < tset.size(); ++j) {
      const auto t = tset[j];
      row[j] = tuple_loss(loss, reps, t.anchor, t.positive, t.negatives);
    }
    table.push_back(std::move(row));
  }
  return empirical_rademacher_probe(table, num_sigma, seed);
}

}  // namespace uscrl
