#ifndef USCRL_LOSS_HPP_
#define USCRL_LOSS_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>

#include <Eigen/Core>

#include "uscrl/types.hpp"

namespace uscrl {

class RepresentationModel;
class LabeledDataset;
struct TupleView;

enum class LossKind { Logistic, Hinge };

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view s);

/// A contrastive loss l: R^k -> [0, M]. `clip` = kInf disables clipping.
struct LossSpec {
  LossKind kind = LossKind::Logistic;
  double clip = kInf;
  double margin = 1.0;  // hinge only
  double eta = 1.0;     // l-infinity Lipschitz constant

  bool clipped() const noexcept { return std::isfinite(clip); }
  // Throws ConfigError on a non-positive clip or non-positive eta.
  void validate() const;
};

// 4 log(1+k): inactive at v = 0, where the logistic loss is log(1+k).
inline double default_clip(std::size_t k) {
  return 4.0 * std::log1p(static_cast<double>(k));
}

LossSpec logistic_loss(std::size_t k);  // clipped at default_clip(k)

double loss_value(const LossSpec& spec, std::span<const double> v);

// Writes dl/dv into `grad` (size k) and returns l(v). Inside the clipped
// region the gradient is zero.
double loss_grad(const LossSpec& spec, std::span<const double> v, std::span<double> grad);

// v_i = f(a)^T [f(p) - f(n_i)].
Eigen::VectorXd score_vector(const RepresentationModel& f, const LabeledDataset& ds,
                             const TupleView& t);

// Same, from precomputed representations (one column per sample).
void score_vector(const Eigen::MatrixXd& reps, const TupleView& t, std::span<double> out);

// Loss of one tuple evaluated on precomputed representations.
double tuple_loss(const LossSpec& spec, const Eigen::MatrixXd& reps,
                  SampleIndex anchor, SampleIndex positive,
                  std::span<const SampleIndex> negatives);

// Adds weight * d l(T) / d reps into `dreps` (columns indexed like `reps`)
// and returns l(T).
double accumulate_tuple_grad(const LossSpec& spec, const Eigen::MatrixXd& reps,
                             SampleIndex anchor, SampleIndex positive,
                             std::span<const SampleIndex> negatives, double weight,
                             Eigen::MatrixXd& dreps);

}  // namespace uscrl

#endif  // USCRL_LOSS_HPP_
