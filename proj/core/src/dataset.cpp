#include "uscrl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "uscrl/error.hpp"

namespace uscrl {

LabeledDataset::LabeledDataset(Eigen::MatrixXd features,
                               std::vector<ClassId> labels,
                               std::size_t num_classes)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      members_(num_classes),
      complement_(num_classes) {
  if (static_cast<std::size_t>(features_.cols()) != labels_.size()) {
    throw ConfigError("dataset: " + std::to_string(features_.cols()) +
                      " feature columns but " + std::to_string(labels_.size()) +
                      " labels");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= num_classes) {
      throw ConfigError("dataset: label " + std::to_string(labels_[i]) +
                        " at index " + std::to_string(i) + " >= num_classes " +
                        std::to_string(num_classes));
    }
    members_[labels_[i]].push_back(static_cast<SampleIndex>(i));
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& comp = complement_[c];
    comp.reserve(labels_.size() - members_[c].size());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] != c) comp.push_back(static_cast<SampleIndex>(i));
    }
  }
}

LabeledDataset LabeledDataset::subset(
    std::span<const SampleIndex> indices) const {
  Eigen::MatrixXd feats(features_.rows(), static_cast<Eigen::Index>(indices.size()));
  std::vector<ClassId> labels(indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= size()) {
      throw PreconditionError("dataset subset: index " +
                              std::to_string(indices[j]) + " out of range");
    }
    feats.col(static_cast<Eigen::Index>(j)) = features_.col(indices[j]);
    labels[j] = labels_[indices[j]];
  }
  return LabeledDataset(std::move(feats), std::move(labels), num_classes());
}

double LabeledDataset::max_norm() const {
  if (features_.cols() == 0) return 0.0;
  return features_.colwise().norm().maxCoeff();
}

std::size_t disjoint_tuple_count(std::size_t n_plus, std::size_t n_minus,
                                 std::size_t k) {
  if (k == 0) throw PreconditionError("k must be >= 1");
  return std::min(n_plus / 2, n_minus / k);
}

std::vector<ClassStats> class_stats(const LabeledDataset& ds, std::size_t k) {
  if (k == 0) throw PreconditionError("class_stats: k must be >= 1");
  std::vector<ClassStats> out;
  out.reserve(ds.num_classes());
  const std::size_t n = ds.size();
  for (ClassId c = 0; c < ds.num_classes(); ++c) {
    ClassStats s;
    s.c = c;
    s.n_plus = ds.class_size(c);
    s.n_minus = n - s.n_plus;
    s.n_c = disjoint_tuple_count(s.n_plus, s.n_minus, k);
    s.rho_hat = n == 0 ? 0.0 : static_cast<double>(s.n_plus) / static_cast<double>(n);
    out.push_back(s);
  }
  return out;
}

void GaussianSpec::validate() const {
  if (num_classes == 0) throw ConfigError("gaussian spec: num_classes must be >= 1");
  if (dim == 0) throw ConfigError("gaussian spec: dim must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("gaussian spec: sigma must be positive, got " + std::to_string(sigma));
  }
  if (!priors.empty()) {
    if (priors.size() != num_classes) {
      throw ConfigError("gaussian spec: priors has " + std::to_string(priors.size()) +
                        " entries, expected " + std::to_string(num_classes));
    }
    double total = 0.0;
    for (double p : priors) {
      if (!(p > 0.0)) throw ConfigError("gaussian spec: priors must be positive");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ConfigError("gaussian spec: priors sum to " + std::to_string(total) +
                        ", expected 1");
    }
  }
  if (centers.size() != num_classes) {
    throw ConfigError("gaussian spec: " + std::to_string(centers.size()) +
                      " centers for " + std::to_string(num_classes) + " classes");
  }
  for (const auto& g : centers) {
    if (static_cast<std::size_t>(g.size()) != dim) {
      throw ConfigError("gaussian spec: center dimension " + std::to_string(g.size()) +
                        " != dim " + std::to_string(dim));
    }
  }
}

double GaussianSpec::prior(ClassId c) const {
  return priors.empty() ? 1.0 / static_cast<double>(num_classes) : priors.at(c);
}

GaussianSpec make_gaussian_spec(std::size_t num_classes, std::size_t dim,
                                double sigma, double center_scale,
                                std::uint64_t seed) {
  GaussianSpec spec;
  spec.num_classes = num_classes;
  spec.dim = dim;
  spec.sigma = sigma;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, center_scale / std::sqrt(static_cast<double>(dim)));
  spec.centers.reserve(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = normal(rng);
    spec.centers.push_back(std::move(g));
  }
  return spec;
}

std::vector<std::size_t> draw_class_sizes(std::span<const double> priors,
                                          std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> sizes(priors.size(), 0);
  std::size_t remaining = n;
  double mass_left = 1.0;
  for (std::size_t c = 0; c < priors.size(); ++c) {
    if (c + 1 == priors.size() || remaining == 0) {
      sizes[c] = remaining;
      remaining = 0;
      continue;
    }
    const double p = std::clamp(priors[c] / mass_left, 0.0, 1.0);
    std::binomial_distribution<std::int64_t> binom(static_cast<std::int64_t>(remaining), p);
    sizes[c] = static_cast<std::size_t>(binom(rng));
    remaining -= sizes[c];
    mass_left -= priors[c];
  }
  return sizes;
}

void draw_gaussian_point(const GaussianSpec& spec, ClassId c,
                         std::mt19937_64& rng, Eigen::Ref<Eigen::VectorXd> out) {
  std::normal_distribution<double> normal(0.0, spec.sigma);
  const auto& g = spec.centers[c];
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = g[i] + normal(rng);
}

LabeledDataset generate_gaussian(const GaussianSpec& spec, std::size_t n,
                                 std::uint64_t seed) {
  spec.validate();
  if (n == 0) throw ConfigError("generate_gaussian: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<double> priors(spec.num_classes);
  for (ClassId c = 0; c < spec.num_classes; ++c) priors[c] = spec.prior(c);
  const auto sizes = draw_class_sizes(priors, n, rng);

  std::vector<ClassId> labels;
  labels.reserve(n);
  for (ClassId c = 0; c < spec.num_classes; ++c) labels.insert(labels.end(), sizes[c], c);
  std::shuffle(labels.begin(), labels.end(), rng);

  Eigen::MatrixXd feats(static_cast<Eigen::Index>(spec.dim), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    draw_gaussian_point(spec, labels[i], rng, feats.col(static_cast<Eigen::Index>(i)));
  }
  return LabeledDataset(std::move(feats), std::move(labels), spec.num_classes);
}

}  // namespace uscrl
