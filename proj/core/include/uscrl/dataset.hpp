#ifndef USCRL_DATASET_HPP_
#define USCRL_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "uscrl/types.hpp"

namespace uscrl {

struct LabeledSample {
  Eigen::VectorXd x;
  ClassId y = 0;
};

/// The fixed pool S of labeled samples. Features are stored column-wise
/// (dim x N) so a batch of samples maps directly onto a matrix product.
/// Per-class index lists S_c and their complements are built once on
/// construction and kept sorted ascending.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  LabeledDataset(Eigen::MatrixXd features, std::vector<ClassId> labels,
                 std::size_t num_classes);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept {
    return static_cast<std::size_t>(features_.rows());
  }
  std::size_t num_classes() const noexcept { return members_.size(); }

  const Eigen::MatrixXd& features() const noexcept { return features_; }
  const std::vector<ClassId>& labels() const noexcept { return labels_; }
  auto x(std::size_t i) const { return features_.col(static_cast<Eigen::Index>(i)); }
  ClassId label(std::size_t i) const { return labels_[i]; }
  LabeledSample sample(std::size_t i) const { return {features_.col(static_cast<Eigen::Index>(i)), labels_[i]}; }

  // S_c and S-bar_c.
  std::span<const SampleIndex> members(ClassId c) const { return members_.at(c); }
  std::span<const SampleIndex> complement(ClassId c) const { return complement_.at(c); }
  std::size_t class_size(ClassId c) const { return members_.at(c).size(); }

  // New dataset holding the given samples in the given order; keeps |C|.
  LabeledDataset subset(std::span<const SampleIndex> indices) const;

  // max_i ||x_i||_2, the b of the norm-bounded theorems.
  double max_norm() const;

 private:
  Eigen::MatrixXd features_;
  std::vector<ClassId> labels_;
  std::vector<std::vector<SampleIndex>> members_;
  std::vector<std::vector<SampleIndex>> complement_;
};

struct ClassStats {
  ClassId c = 0;
  std::size_t n_plus = 0;   // N_c+
  std::size_t n_minus = 0;  // N_c- = N - N_c+
  std::size_t n_c = 0;      // min(floor(N_c+/2), floor(N_c-/k))
  double rho_hat = 0.0;     // N_c+ / N
};

std::vector<ClassStats> class_stats(const LabeledDataset& ds, std::size_t k);

// max number of disjoint tuples for one class.
std::size_t disjoint_tuple_count(std::size_t n_plus, std::size_t n_minus,
                                 std::size_t k);

/// Class-conditional isotropic Gaussians N(g_c, sigma^2 I) with class
/// priors rho.
struct GaussianSpec {
  std::size_t num_classes = 0;
  std::size_t dim = 128;
  double sigma = 0.1;
  std::vector<double> priors;          // empty means uniform
  std::vector<Eigen::VectorXd> centers;

  // Throws ConfigError on any violated invariant.
  void validate() const;
  double prior(ClassId c) const;
};

// Spec with uniform priors and centers drawn from N(0, (scale^2/dim) I), so
// that E||g_c||^2 = scale^2.
GaussianSpec make_gaussian_spec(std::size_t num_classes, std::size_t dim,
                                double sigma, double center_scale,
                                std::uint64_t seed);

// Class sizes ~ Multinom(n, priors) via sequential binomial conditioning.
std::vector<std::size_t> draw_class_sizes(std::span<const double> priors,
                                          std::size_t n, std::mt19937_64& rng);

// Fills `out` with one draw from D_c.
void draw_gaussian_point(const GaussianSpec& spec, ClassId c,
                         std::mt19937_64& rng, Eigen::Ref<Eigen::VectorXd> out);

// Sizes are drawn multinomially from the priors, then each class is filled
// from its Gaussian. Sample order is shuffled. Deterministic in `seed`.
LabeledDataset generate_gaussian(const GaussianSpec& spec, std::size_t n,
                                 std::uint64_t seed);

}  // namespace uscrl

#endif  // USCRL_DATASET_HPP_
