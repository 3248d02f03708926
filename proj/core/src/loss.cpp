#include "uscrl/loss.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "uscrl/dataset.hpp"
#include "uscrl/error.hpp"
#include "uscrl/model.hpp"
#include "uscrl/tuples.hpp"

namespace uscrl {

std::string_view to_string(LossKind kind) {
  return kind == LossKind::Logistic ? "logistic" : "hinge";
}

LossKind loss_kind_from_string(std::string_view s) {
  if (s == "logistic") return LossKind::Logistic;
  if (s == "hinge") return LossKind::Hinge;
  throw ConfigError("unknown loss kind '" + std::string(s) + "'");
}

void LossSpec::validate() const {
  if (!(clip > 0.0)) throw ConfigError("loss.clip must be > 0");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("loss.eta must be finite and > 0");
  if (!std::isfinite(margin)) throw ConfigError("loss.margin must be finite");
}

LossSpec logistic_loss(std::size_t k) {
  LossSpec s;
  s.clip = default_clip(k);
  return s;
}

namespace {

// log(1 + sum exp(-v_i)) with the largest exponent factored out. When
// `grad` is non-empty it also receives the softmax weights.
double logistic_raw(std::span<const double> v, std::span<double> grad) {
  double shift = 0.0;
  for (double x : v) shift = std::max(shift, -x);
  double tail = 0.0;
  for (double x : v) tail += std::exp(-x - shift);
  const double denom = std::exp(-shift) + tail;
  if (!grad.empty()) {
    for (std::size_t i = 0; i < v.size(); ++i) grad[i] = -std::exp(-v[i] - shift) / denom;
  }
  // All scores positive: the loss is log1p of a possibly tiny sum.
  if (shift == 0.0) return std::log1p(tail);
  return shift + std::log(denom);
}

double hinge_raw(double margin, std::span<const double> v, std::span<double> grad) {
  const auto it = std::min_element(v.begin(), v.end());
  const double value = std::max(0.0, margin - *it);
  if (!grad.empty()) {
    std::fill(grad.begin(), grad.end(), 0.0);
    if (value > 0.0) grad[static_cast<std::size_t>(it - v.begin())] = -1.0;
  }
  return value;
}

double raw_loss(const LossSpec& spec, std::span<const double> v, std::span<double> grad) {
  return spec.kind == LossKind::Logistic ? logistic_raw(v, grad)
                                         : hinge_raw(spec.margin, v, grad);
}

}  // namespace

double loss_value(const LossSpec& spec, std::span<const double> v) {
  if (v.empty()) throw PreconditionError("loss needs k >= 1 scores");
  return std::min(raw_loss(spec, v, {}), spec.clip);
}

double loss_grad(const LossSpec& spec, std::span<const double> v, std::span<double> grad) {
  if (v.empty()) throw PreconditionError("loss needs k >= 1 scores");
  if (grad.size() != v.size()) throw PreconditionError("gradient buffer has wrong size");
  const double raw = raw_loss(spec, v, grad);
  if (raw > spec.clip) {
    std::fill(grad.begin(), grad.end(), 0.0);
    return spec.clip;
  }
  return raw;
}

void score_vector(const Eigen::MatrixXd& reps, const TupleView& t, std::span<double> out) {
  const auto a = reps.col(t.anchor);
  const double ap = a.dot(reps.col(t.positive));
  for (std::size_t i = 0; i < t.negatives.size(); ++i) {
    out[i] = ap - a.dot(reps.col(t.negatives[i]));
  }
}

Eigen::VectorXd score_vector(const RepresentationModel& f, const LabeledDataset& ds,
                             const TupleView& t) {
  if (f.input_dim() != ds.dim()) {
    throw ConfigError("model input dimension " + std::to_string(f.input_dim()) +
                      " does not match dataset dimension " + std::to_string(ds.dim()));
  }
  const std::size_t k = t.negatives.size();
  Eigen::MatrixXd x(ds.dim(), k + 2);
  x.col(0) = ds.x(t.anchor);
  x.col(1) = ds.x(t.positive);
  for (std::size_t i = 0; i < k; ++i) x.col(static_cast<Eigen::Index>(i + 2)) = ds.x(t.negatives[i]);
  const Eigen::MatrixXd r = f.forward_batch(x);
  Eigen::VectorXd v(static_cast<Eigen::Index>(k));
  const double ap = r.col(0).dot(r.col(1));
  for (std::size_t i = 0; i < k; ++i) {
    v[static_cast<Eigen::Index>(i)] = ap - r.col(0).dot(r.col(static_cast<Eigen::Index>(i + 2)));
  }
  return v;
}

double tuple_loss(const LossSpec& spec, const Eigen::MatrixXd& reps, SampleIndex anchor,
                  SampleIndex positive, std::span<const SampleIndex> negatives) {
  double buf[16];
  std::vector<double> heap;
  std::span<double> v;
  if (negatives.size() <= 16) {
    v = std::span<double>(buf, negatives.size());
  } else {
    heap.resize(negatives.size());
    v = heap;
  }
  score_vector(reps, TupleView{anchor, positive, negatives, 0}, v);
  return loss_value(spec, v);
}

double accumulate_tuple_grad(const LossSpec& spec, const Eigen::MatrixXd& reps,
                             SampleIndex anchor, SampleIndex positive,
                             std::span<const SampleIndex> negatives, double weight,
                             Eigen::MatrixXd& dreps) {
  const std::size_t k = negatives.size();
  std::vector<double> v(k), g(k);
  score_vector(reps, TupleView{anchor, positive, negatives, 0}, v);
  const double value = loss_grad(spec, v, g);
  const auto a = reps.col(anchor);
  const auto p = reps.col(positive);
  double gsum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double gi = weight * g[i];
    if (gi == 0.0) continue;
    gsum += gi;
    // v_i = a.(p - n_i)
    dreps.col(anchor) += gi * (p - reps.col(negatives[i]));
    dreps.col(negatives[i]) -= gi * a;
  }
  if (gsum != 0.0) dreps.col(positive) += gsum * a;
  return value;
}

}  // namespace uscrl
