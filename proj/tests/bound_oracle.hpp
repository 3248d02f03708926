// Independent 50-digit evaluation of every theorem, written directly from
// the displayed bounds. Shared by the bound tests and the acceptance binary.
#ifndef USCRL_TESTS_BOUND_ORACLE_HPP_
#define USCRL_TESTS_BOUND_ORACLE_HPP_

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "uscrl/bounds.hpp"

namespace uscrl::test {

using Big = boost::multiprecision::cpp_bin_float_50;

struct Oracle {
  const BoundInputs& in;

  Big ntilde() const {
    const auto p = in.resolved_priors();
    const Big mn = *std::min_element(p.begin(), p.end());
    const Big mx = *std::max_element(p.begin(), p.end());
    const Big a = mn / 2, b = (1 - mx) / Big(in.k);
    return Big(in.n) * (a < b ? a : b);
  }
  Big conf(int mult) const {
    using boost::multiprecision::log;
    using boost::multiprecision::sqrt;
    return 44 * Big(in.loss_bound) *
           sqrt(log(Big(mult) * in.num_classes / Big(in.delta)) / (2 * ntilde()));
  }
  Big sub_conf() const {
    using boost::multiprecision::log;
    using boost::multiprecision::sqrt;
    return 6 * Big(in.loss_bound) * sqrt(log(8 / Big(in.delta)) / (2 * Big(*in.m_tuples)));
  }
  Big phi() const {
    using boost::multiprecision::log;
    const auto& l = *in.linear;
    const Big n = in.n, esab2 = Big(in.eta) * l.s * l.a * Big(l.b) * l.b;
    return log((44 * n * esab2 + 7) * n * (Big(in.k) + 2) * l.d) * log(n * in.loss_bound);
  }
  Big lin_lead() const {
    const auto& l = *in.linear;
    return 3072 * boost::multiprecision::sqrt(Big(2)) * in.eta * l.s * l.a * Big(l.b) * l.b * phi();
  }
  Big nn_root() const {
    const auto& p = *in.nn;
    Big prod = 1;
    for (std::size_t i = 0; i < p.s.size(); ++i) prod *= Big(p.xi[i]) * p.xi[i] * p.s[i] * p.s[i];
    const Big arg = 12 * Big(in.eta) * in.n * p.s.size() * Big(p.b) * p.b * prod + 1;
    return boost::multiprecision::sqrt(Big(p.w) * boost::multiprecision::log(arg));
  }
  Big wk() const {
    const auto p = in.resolved_priors();
    Big s = 0;
    for (std::size_t c = 0; c < p.size(); ++c) s += Big(p[c]) * in.k_per_class[c];
    return s;
  }

  Big total(TheoremId id) const {
    using boost::multiprecision::sqrt;
    const Big nt = ntilde(), sq = sqrt(nt);
    const Big offset = 32 / (Big(in.n) * sq);
    switch (id) {
      case TheoremId::Basic: return 8 / sq * wk() + conf(8);
      case TheoremId::Subsampled: return 4 * Big(in.emp_rad_sub) + 8 / sq * wk() + sub_conf() + conf(16);
      case TheoremId::BasicLinear: return offset + lin_lead() / sq + conf(8);
      case TheoremId::BasicNn: return offset + 192 * Big(in.loss_bound) * nn_root() / sq + conf(8);
      case TheoremId::SubsampledLinear: {
        const Big m = *in.m_tuples;
        return 4 / m + offset + lin_lead() * (1 / sqrt(m) + 1 / sq) + sub_conf() + conf(16);
      }
      case TheoremId::SubsampledNn: {
        const Big m = *in.m_tuples;
        return 4 / m + offset + 24 * Big(in.loss_bound) * nn_root() * (1 / sqrt(m) + 1 / sq) +
               sub_conf() + conf(16);
      }
    }
    return 0;
  }
};

inline BoundInputs random_inputs(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BoundInputs in;
  in.num_classes = 2 + rng() % 10;
  in.n = std::floor(100 + u(rng) * 1e5);
  in.k = static_cast<double>(1 + rng() % 20);
  std::vector<double> p(in.num_classes);
  double s = 0;
  for (auto& x : p) s += (x = 0.2 + u(rng));
  for (auto& x : p) x /= s;
  in.priors = p;
  in.delta = 0.01 + 0.9 * u(rng);
  in.loss_bound = 0.5 + 4 * u(rng);
  in.eta = 0.5 + 2 * u(rng);
  in.m_tuples = std::floor(10 + u(rng) * 1e6);
  in.emp_rad_sub = u(rng);
  for (std::size_t c = 0; c < in.num_classes; ++c) in.k_per_class.push_back(3 * u(rng));
  in.linear = LinearClassParams{0.5 + u(rng), 0.5 + 3 * u(rng), 0.5 + u(rng), 1.0 + std::floor(u(rng) * 64)};
  NnClassParams nn;
  nn.w = std::floor(10 + u(rng) * 500);
  nn.b = 0.5 + u(rng);
  for (std::size_t l = 0; l < 1 + rng() % 4; ++l) {
    nn.s.push_back(0.5 + 4 * u(rng));
    nn.xi.push_back(0.5 + u(rng));
  }
  in.nn = nn;
  return in;
}

inline constexpr TheoremId kAllTheorems[] = {TheoremId::Basic,       TheoremId::Subsampled,
                                             TheoremId::BasicLinear, TheoremId::BasicNn,
                                             TheoremId::SubsampledLinear, TheoremId::SubsampledNn};

}  // namespace uscrl::test

#endif  // USCRL_TESTS_BOUND_ORACLE_HPP_
