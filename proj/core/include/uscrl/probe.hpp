#ifndef USCRL_PROBE_HPP_
#define USCRL_PROBE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uscrl/types.hpp"

namespace uscrl {

/// Multinomial logistic regression on standardized representations.
struct LinearProbe {
  Eigen::MatrixXd weight;  // |C| x d
  Eigen::VectorXd bias;    // |C|
  Eigen::VectorXd mean;    // feature standardization
  Eigen::VectorXd inv_scale;

  std::size_t num_classes() const { return static_cast<std::size_t>(weight.rows()); }
  std::vector<ClassId> predict(const Eigen::MatrixXd& reps) const;
  double accuracy(const Eigen::MatrixXd& reps, std::span<const ClassId> labels) const;
};

struct ProbeConfig {
  std::size_t epochs = 30;
  double lr = 0.1;
  std::size_t batch = 32;
  double test_fraction = 0.3;  // used by the splitting overload
  std::uint64_t seed = 0;
};

struct ProbeResult {
  LinearProbe probe;
  double accuracy = 0.0;  // held-out
  bool degenerate = false;
  std::string warning;
};

// Columns of `*_reps` are samples.
ProbeResult fit_probe(const Eigen::MatrixXd& train_reps, std::span<const ClassId> train_labels,
                      const Eigen::MatrixXd& test_reps, std::span<const ClassId> test_labels,
                      std::size_t num_classes, const ProbeConfig& cfg);

// Seeded split into train/test by cfg.test_fraction, then the above.
ProbeResult fit_probe(const Eigen::MatrixXd& reps, std::span<const ClassId> labels,
                      std::size_t num_classes, const ProbeConfig& cfg);

}  // namespace uscrl

#endif  // USCRL_PROBE_HPP_
