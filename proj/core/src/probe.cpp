#include "uscrl/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "uscrl/combinatorics.hpp"
#include "uscrl/error.hpp"

namespace uscrl {

namespace {

void shuffle_indices(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[static_cast<std::size_t>(uniform_below(i, rng))]);
  }
}

}  // namespace

std::vector<ClassId> LinearProbe::predict(const Eigen::MatrixXd& reps) const {
  const Eigen::MatrixXd z = inv_scale.asDiagonal() * (reps.colwise() - mean);
  const Eigen::MatrixXd logits = (weight * z).colwise() + bias;
  std::vector<ClassId> out(static_cast<std::size_t>(reps.cols()));
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    Eigen::Index arg = 0;
    logits.col(j).maxCoeff(&arg);
    out[static_cast<std::size_t>(j)] = static_cast<ClassId>(arg);
  }
  return out;
}

double LinearProbe::accuracy(const Eigen::MatrixXd& reps, std::span<const ClassId> labels) const {
  if (labels.empty()) return 0.0;
  const auto pred = predict(reps);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += pred[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

ProbeResult fit_probe(const Eigen::MatrixXd& train_reps, std::span<const ClassId> train_labels,
                      const Eigen::MatrixXd& test_reps, std::span<const ClassId> test_labels,
                      std::size_t num_classes, const ProbeConfig& cfg) {
  const auto n = static_cast<std::size_t>(train_reps.cols());
  if (n == 0) throw PreconditionError("fit_probe: no training representations");
  if (n != train_labels.size() || static_cast<std::size_t>(test_reps.cols()) != test_labels.size()) {
    throw PreconditionError("fit_probe: representation and label counts differ");
  }
  if (num_classes == 0) throw PreconditionError("fit_probe: num_classes must be >= 1");
  const Eigen::Index d = train_reps.rows();
  const auto c = static_cast<Eigen::Index>(num_classes);

  ProbeResult res;
  auto& pr = res.probe;
  pr.mean = train_reps.rowwise().mean();
  const Eigen::VectorXd sd =
      ((train_reps.colwise() - pr.mean).array().square().rowwise().sum() / static_cast<double>(n))
          .sqrt()
          .matrix();
  pr.inv_scale = sd.unaryExpr([](double s) { return s > 1e-12 ? 1.0 / s : 0.0; });
  pr.weight = Eigen::MatrixXd::Zero(c, d);
  pr.bias = Eigen::VectorXd::Zero(c);

  const bool single = std::all_of(train_labels.begin(), train_labels.end(),
                                  [&](ClassId y) { return y == train_labels[0]; });
  if (single) {
    res.degenerate = true;
    res.warning = "degenerate probe: training labels contain a single class";
    pr.bias[train_labels[0]] = 1.0;
    res.accuracy = pr.accuracy(test_reps, test_labels);
    return res;
  }

  const Eigen::MatrixXd z = pr.inv_scale.asDiagonal() * (train_reps.colwise() - pr.mean);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t bs = std::max<std::size_t>(1, std::min(cfg.batch, n));
  Eigen::VectorXd logits(c), p(c);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_indices(order, rng);
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t stop = std::min(n, start + bs);
      Eigen::MatrixXd gw = Eigen::MatrixXd::Zero(c, d);
      Eigen::VectorXd gb = Eigen::VectorXd::Zero(c);
      for (std::size_t t = start; t < stop; ++t) {
        const auto j = static_cast<Eigen::Index>(order[t]);
        logits = pr.weight * z.col(j) + pr.bias;
        p = (logits.array() - logits.maxCoeff()).exp().matrix();
        p /= p.sum();
        p[train_labels[order[t]]] -= 1.0;
        gw.noalias() += p * z.col(j).transpose();
        gb += p;
      }
      const double step = cfg.lr / static_cast<double>(stop - start);
      pr.weight -= step * gw;
      pr.bias -= step * gb;
    }
  }
  if (!pr.weight.allFinite() || !pr.bias.allFinite()) {
    throw NumericError("fit_probe: non-finite weights; lower the learning rate");
  }
  res.accuracy = pr.accuracy(test_reps, test_labels);
  return res;
}

ProbeResult fit_probe(const Eigen::MatrixXd& reps, std::span<const ClassId> labels,
                      std::size_t num_classes, const ProbeConfig& cfg) {
  const auto n = static_cast<std::size_t>(reps.cols());
  if (n == 0) throw PreconditionError("fit_probe: no representations");
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
    throw ConfigError("probe.test_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  shuffle_indices(order, rng);
  auto n_test = static_cast<std::size_t>(std::round(cfg.test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, n > 1 ? 1 : 0, n > 1 ? n - 1 : 0);
  const std::size_t n_train = n - n_test;
  Eigen::MatrixXd tr(reps.rows(), static_cast<Eigen::Index>(n_train));
  Eigen::MatrixXd te(reps.rows(), static_cast<Eigen::Index>(n_test));
  std::vector<ClassId> ytr(n_train), yte(n_test);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = static_cast<Eigen::Index>(order[i]);
    if (i < n_train) {
      tr.col(static_cast<Eigen::Index>(i)) = reps.col(src);
      ytr[i] = labels[order[i]];
    } else {
      te.col(static_cast<Eigen::Index>(i - n_train)) = reps.col(src);
      yte[i - n_train] = labels[order[i]];
    }
  }
  if (n_test == 0) return fit_probe(tr, ytr, tr, ytr, num_classes, cfg);
  return fit_probe(tr, ytr, te, yte, num_classes, cfg);
}

}  // namespace uscrl
