// Fixtures and brute-force oracles shared by the unit tests. The oracles
// are written with plain loops and deliberately avoid the library's
// enumeration, unranking and estimator code.
#ifndef USCRL_TESTS_SUPPORT_HPP_
#define USCRL_TESTS_SUPPORT_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "uscrl/dataset.hpp"
#include "uscrl/loss.hpp"
#include "uscrl/model.hpp"
#include "uscrl/tuples.hpp"

namespace uscrl::test {

// Pool with the given class sizes; labels interleaved round-robin, features
// standard normal.
inline LabeledDataset make_pool(const std::vector<std::size_t>& sizes, std::size_t dim,
                                std::uint64_t seed) {
  std::vector<ClassId> labels;
  std::vector<std::size_t> left = sizes;
  bool any = true;
  while (any) {
    any = false;
    for (ClassId c = 0; c < sizes.size(); ++c) {
      if (left[c] > 0) {
        labels.push_back(c);
        --left[c];
        any = true;
      }
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(labels.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  return LabeledDataset(std::move(x), std::move(labels), sizes.size());
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                                     double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  return a;
}

inline RepresentationModel random_linear(std::size_t out, std::size_t in, std::uint64_t seed,
                                         double scale = 0.5) {
  return RepresentationModel::linear(random_matrix(static_cast<Eigen::Index>(out),
                                                   static_cast<Eigen::Index>(in), seed, scale),
                                     kInf, kInf);
}

// All r-subsets of `items` by recursion, in lexicographic order of position.
inline void subsets(const std::vector<SampleIndex>& items, std::size_t r, std::size_t start,
                    std::vector<SampleIndex>& cur,
                    const std::function<void(const std::vector<SampleIndex>&)>& fn) {
  if (cur.size() == r) {
    fn(cur);
    return;
  }
  for (std::size_t i = start; i < items.size(); ++i) {
    cur.push_back(items[i]);
    subsets(items, r, i + 1, cur, fn);
    cur.pop_back();
  }
}

// Every valid tuple of class c by nested loops over the raw labels.
inline std::vector<Tuple> brute_class_tuples(const LabeledDataset& ds, ClassId c, std::size_t k) {
  std::vector<SampleIndex> pos, neg;
  for (SampleIndex i = 0; i < ds.size(); ++i) (ds.label(i) == c ? pos : neg).push_back(i);
  std::vector<Tuple> out;
  for (SampleIndex a : pos) {
    for (SampleIndex p : pos) {
      if (a == p) continue;
      std::vector<SampleIndex> cur;
      subsets(neg, k, 0, cur, [&](const std::vector<SampleIndex>& s) {
        out.push_back({a, p, s, c});
      });
    }
  }
  return out;
}

inline std::vector<Tuple> brute_all_tuples(const LabeledDataset& ds, std::size_t k) {
  std::vector<Tuple> out;
  for (ClassId c = 0; c < ds.num_classes(); ++c) {
    auto t = brute_class_tuples(ds, c, k);
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

// Scores with explicit loops over f.forward of each sample.
inline std::vector<double> naive_scores(const RepresentationModel& f, const LabeledDataset& ds,
                                        const Tuple& t) {
  const Eigen::VectorXd a = f.forward(ds.x(t.anchor));
  const Eigen::VectorXd p = f.forward(ds.x(t.positive));
  std::vector<double> v;
  for (SampleIndex n : t.negatives) {
    const Eigen::VectorXd q = f.forward(ds.x(n));
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += a[i] * p[i] - a[i] * q[i];
    v.push_back(s);
  }
  return v;
}

// log(1 + sum exp(-v)) the direct way, clipped like the library.
inline double naive_logistic(const std::vector<double>& v, double clip = kInf) {
  double s = 1.0;
  for (double x : v) s += std::exp(-x);
  return std::min(std::log(s), clip);
}

inline double naive_tuple_loss(const RepresentationModel& f, const LabeledDataset& ds,
                               const Tuple& t, double clip = kInf) {
  return naive_logistic(naive_scores(f, ds, t), clip);
}

inline double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

// Least-squares slope of y on x.
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace uscrl::test

#endif  // USCRL_TESTS_SUPPORT_HPP_
