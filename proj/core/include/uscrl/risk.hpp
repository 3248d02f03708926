#ifndef USCRL_RISK_HPP_
#define USCRL_RISK_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "uscrl/dataset.hpp"
#include "uscrl/loss.hpp"
#include "uscrl/model.hpp"
#include "uscrl/tuples.hpp"

namespace uscrl {

enum class Estimator {
  SubSampled,
  UStatExact,
  UStatMC,
  UStatDecoupled,
  VStat,
  VStatMC,
  PopulationMC,
  Enumeration,  // sum of nu(T) l(T) over the materialized T
};

std::string_view to_string(Estimator e);
Estimator estimator_from_string(std::string_view s);

struct RiskEstimate {
  Estimator estimator = Estimator::UStatExact;
  double value = 0.0;
  std::uint64_t n_terms = 0;
  std::optional<double> std_error;
  std::optional<std::uint64_t> seed;
};

/// Exact enumeration, or an average of `draws` uniform draws per class.
struct EstimateMode {
  enum class Kind { Exact, MonteCarlo } kind = Kind::Exact;
  std::uint64_t draws = 0;
  std::uint64_t seed = 0;
  std::uint64_t cap = kDefaultTupleCap;

  static EstimateMode exact(std::uint64_t cap = kDefaultTupleCap) {
    return {Kind::Exact, 0, 0, cap};
  }
  static EstimateMode monte_carlo(std::uint64_t draws, std::uint64_t seed) {
    return {Kind::MonteCarlo, draws, seed, kDefaultTupleCap};
  }
};

// Every estimator below evaluates f once per sample and works on the
// resulting d x N matrix. These overloads take that matrix directly.
Eigen::MatrixXd representations(const RepresentationModel& f, const LabeledDataset& ds);

RiskEstimate subsampled_risk(const Eigen::MatrixXd& reps, const TupleSet& tset,
                             const LossSpec& loss);
RiskEstimate subsampled_risk(const RepresentationModel& f, const LabeledDataset& ds,
                             const TupleSet& tset, const LossSpec& loss);

// U_N(f|c), defined as 0 when N_c = 0.
RiskEstimate ustat_conditional(const Eigen::MatrixXd& reps, const LabeledDataset& ds, ClassId c,
                               std::size_t k, const LossSpec& loss, const EstimateMode& mode);
RiskEstimate ustat_conditional(const RepresentationModel& f, const LabeledDataset& ds, ClassId c,
                               std::size_t k, const LossSpec& loss, const EstimateMode& mode);

// sum_c (N_c+/N) U_N(f|c).
RiskEstimate ustat_overall(const Eigen::MatrixXd& reps, const LabeledDataset& ds, std::size_t k,
                           const LossSpec& loss, const EstimateMode& mode);
RiskEstimate ustat_overall(const RepresentationModel& f, const LabeledDataset& ds, std::size_t k,
                           const LossSpec& loss, const EstimateMode& mode);

// V_{pi,pibar}(f|c): mean loss over the N_c greedy tuples of the permuted
// class lists.
RiskEstimate decoupled_block_estimate(const Eigen::MatrixXd& reps, const LabeledDataset& ds,
                                      ClassId c, std::size_t k, const LossSpec& loss,
                                      const ClassPermutation& perm);
RiskEstimate decoupled_block_estimate(const RepresentationModel& f, const LabeledDataset& ds,
                                      ClassId c, std::size_t k, const LossSpec& loss,
                                      const ClassPermutation& perm);

// With-replacement analogue over all (N_c+)^2 (N_c-)^k index combinations
// of each class with N_c+ >= 1 and N_c- >= 1.
RiskEstimate vstat_conditional(const Eigen::MatrixXd& reps, const LabeledDataset& ds, ClassId c,
                               std::size_t k, const LossSpec& loss, const EstimateMode& mode);
RiskEstimate vstat_overall(const Eigen::MatrixXd& reps, const LabeledDataset& ds, std::size_t k,
                           const LossSpec& loss, const EstimateMode& mode);
RiskEstimate vstat_overall(const RepresentationModel& f, const LabeledDataset& ds, std::size_t k,
                           const LossSpec& loss, const EstimateMode& mode);

// sum over T of nu(T) l(T) by materializing T (the cross-check for
// ustat_overall in Exact mode).
RiskEstimate enumeration_risk(const RepresentationModel& f, const LabeledDataset& ds,
                              std::size_t k, const LossSpec& loss,
                              std::uint64_t cap = kDefaultTupleCap);

// Monte-Carlo estimate of the population risk under a Gaussian generator.
RiskEstimate population_risk_mc(const RepresentationModel& f, const GaussianSpec& gen,
                                std::size_t k, const LossSpec& loss, std::uint64_t draws,
                                std::uint64_t seed);

}  // namespace uscrl

#endif  // USCRL_RISK_HPP_
