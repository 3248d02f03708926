#ifndef USCRL_BOUNDS_HPP_
#define USCRL_BOUNDS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uscrl/dataset.hpp"
#include "uscrl/loss.hpp"
#include "uscrl/model.hpp"
#include "uscrl/tuples.hpp"

namespace uscrl {

enum class TheoremId {
  Basic,             // U-statistic minimizer, explicit K_{F,c}
  Subsampled,        // sub-sampled risk minimizer, explicit K_{F,c}
  BasicLinear,
  BasicNn,
  SubsampledLinear,
  SubsampledNn,
};

std::string_view to_string(TheoremId id);
TheoremId theorem_from_string(std::string_view s);

/// Every numeric constant appearing in a theorem statement. Fields a theorem
/// does not use are zero.
struct TheoremConstants {
  TheoremId id;
  double lambda_log_mult;      // c in Lambda = sqrt(3 ln(c|C|/delta) / (N rho_min))
  double complexity_coef;      // (x/sqrt(N~)) sum_c rho(c) K_{F,c}
  double confidence_coef;      // x M sqrt(ln(c|C|/delta) / (2 N~))
  double confidence_log_mult;  // c in the line above
  double rad_coef;             // x R^_{T_sub}
  double sub_confidence_coef;  // x M sqrt(ln(c/delta) / (2 M_t))
  double sub_confidence_log;   // c in the line above
  double offset_coef;          // x / (N sqrt(N~))
  double sub_offset_coef;      // x / M_t
  double class_coef;           // leading coefficient of the class term
  double class_sqrt2;          // 1 if the class coefficient carries sqrt(2)
};

const TheoremConstants& theorem_constants(TheoremId id);

/// Constants of the per-class complexity constants K_{F,c}.
struct ClassConstants {
  double k_offset = 4.0;        // 4/N
  double linear_coef = 384.0;   // 384 sqrt(2) eta s a b^2 phi
  double linear_log_a = 44.0;   // ln((44 N eta s a b^2 + 7) N (k+2) d)
  double linear_log_b = 7.0;
  double nn_coef = 24.0;        // 24 M sqrt(W ln(12 eta N L b^2 prod + 1))
  double nn_log_a = 12.0;
};

inline constexpr ClassConstants kClassConstants{};

enum class PriorSource { True, PlugIn };

struct LinearClassParams {
  double a = 1.0;  // ||A^T||_{2,1} cap
  double s = 1.0;  // spectral cap
  double b = 1.0;  // input norm bound
  double d = 1.0;  // output dimension
};

struct NnClassParams {
  double w = 0.0;  // total neurons W
  double b = 1.0;
  std::vector<double> s;   // spectral caps per layer
  std::vector<double> xi;  // activation Lipschitz constants per layer
  std::size_t depth() const { return s.size(); }
};

struct BoundInputs {
  double n = 0.0;
  double k = 1.0;
  std::size_t num_classes = 0;
  std::vector<double> priors;  // empty means uniform
  PriorSource prior_source = PriorSource::True;
  double delta = 0.1;
  double loss_bound = 1.0;  // M
  double eta = 1.0;
  std::optional<LinearClassParams> linear;
  std::optional<NnClassParams> nn;
  std::optional<double> m_tuples;
  std::vector<double> k_per_class;  // explicit K_{F,c}; overrides model params
  double emp_rad_sub = 0.0;

  // Throws ConfigError naming the first bad field.
  void validate() const;
  std::vector<double> resolved_priors() const;
};

struct BoundTerm {
  std::string name;
  double value = 0.0;
};

struct BoundReport {
  TheoremId theorem = TheoremId::Basic;
  double n_tilde = 0.0;
  double lambda = 0.0;
  bool lambda_vacuous = false;  // Lambda >= 1
  std::vector<BoundTerm> terms;
  double total = 0.0;
  bool vacuous = false;  // total >= M
  PriorSource prior_source = PriorSource::True;
  std::optional<double> k_constant;
  std::optional<double> phi;

  double term(std::string_view name) const;
};

// N min(rho_min/2, (1 - rho_max)/k).
double effective_n(double n, std::span<const double> priors, double k);

// sqrt(3 ln(log_mult |C| / delta) / (N rho_min)).
double chernoff_lambda(double n, double rho_min, std::size_t num_classes, double delta,
                       double log_mult);

struct LinearK {
  double k_constant;   // 4/N + 384 sqrt(2) eta s a b^2 phi
  double phi;          // ln((44 N eta s a b^2 + 7) N (k+2) d) ln(N M)
  double coefficient;  // 3072 sqrt(2) eta s a b^2
};

LinearK linear_class_K(double eta, double s, double a, double b, double n, double k, double d,
                       double loss_bound);

struct NnK {
  double k_constant;  // 4/N + 24 M sqrt(W ln(arg))
  double log_arg;     // 12 eta N L b^2 prod xi^2 s^2 + 1
};

NnK nn_class_K(double loss_bound, double w, double eta, double n, std::size_t depth, double b,
               std::span<const double> xi, std::span<const double> s);

BoundReport basic_bound(const BoundInputs& in);
BoundReport subsampled_bound(const BoundInputs& in, double emp_rad_sub);
BoundReport basic_linear_bound(const BoundInputs& in);
BoundReport basic_nn_bound(const BoundInputs& in);
BoundReport subsampled_linear_bound(const BoundInputs& in);
BoundReport subsampled_nn_bound(const BoundInputs& in);

BoundReport evaluate_bound(TheoremId id, const BoundInputs& in);

// Adaptive Simpson quadrature of f over [a, b] to relative tolerance rel_tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-6, int max_depth = 50);

std::vector<double> default_alpha_grid(double b_sup, std::size_t points = 32);

struct DudleyResult {
  double value = 0.0;
  double alpha = 0.0;     // minimizing grid point
  double integral = 0.0;  // 12 * integral at that alpha
};

// inf over alpha in the grid of 4 alpha + 12 int_alpha^B sqrt(log_cover(e)/n) de,
// with log_cover(e) an upper bound on ln 2N(e).
DudleyResult dudley_bound(const std::function<double(double)>& log_cover, double n,
                          double b_sup, std::span<const double> alpha_grid = {});

struct RademacherProbe {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t num_sigma = 0;
  bool lower_estimate = true;  // max over a finite subset of F
};

// E_sigma max_f |(1/n) sum_j sigma_j l(f; T_j)| over the candidate list.
RademacherProbe empirical_rademacher_probe(std::span<const RepresentationModel> candidates,
                                           const LabeledDataset& ds, const TupleSet& tset,
                                           const LossSpec& loss, std::size_t num_sigma,
                                           std::uint64_t seed);

// Same from a precomputed loss table (one row per candidate).
RademacherProbe empirical_rademacher_probe(const std::vector<std::vector<double>>& losses,
                                           std::size_t num_sigma, std::uint64_t seed);

}  // namespace uscrl

#endif  // USCRL_BOUNDS_HPP_
