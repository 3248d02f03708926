#include "uscrl/model.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <unordered_map>

#include "uscrl/dataset.hpp"
#include "uscrl/error.hpp"
#include "uscrl/loss.hpp"
#include "uscrl/tuples.hpp"

namespace uscrl {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::ReLU: return "relu";
    case Activation::Tanh: return "tanh";
  }
  return "?";
}

Activation activation_from_string(std::string_view s) {
  if (s == "identity" || s == "linear") return Activation::Identity;
  if (s == "relu") return Activation::ReLU;
  if (s == "tanh") return Activation::Tanh;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

double activation_lipschitz(Activation) { return 1.0; }

std::string_view to_string(ModelFamily f) { return f == ModelFamily::Linear ? "linear" : "mlp"; }

ModelFamily model_family_from_string(std::string_view s) {
  if (s == "linear") return ModelFamily::Linear;
  if (s == "mlp") return ModelFamily::Mlp;
  throw ConfigError("unknown model family '" + std::string(s) + "'");
}

namespace {

Eigen::VectorXd start_vector(Eigen::Index n, std::uint64_t salt) {
  std::mt19937_64 rng(0x5eed5eedULL + salt);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v.normalized();
}

void apply_activation(Activation act, Eigen::MatrixXd& m) {
  switch (act) {
    case Activation::Identity: break;
    case Activation::ReLU: m = m.cwiseMax(0.0); break;
    case Activation::Tanh: m = m.array().tanh().matrix(); break;
  }
}

// dL/dz given dL/dh and z, in place on `g`.
void activation_backward(Activation act, const Eigen::MatrixXd& z, Eigen::MatrixXd& g) {
  switch (act) {
    case Activation::Identity: break;
    case Activation::ReLU: g = (z.array() > 0.0).select(g, 0.0); break;
    case Activation::Tanh: g = (g.array() * (1.0 - z.array().tanh().square())).matrix(); break;
  }
}

}  // namespace

double spectral_norm(const Eigen::MatrixXd& a, Eigen::VectorXd* warm,
                     const PowerIterationOptions& opt) {
  if (a.size() == 0) return 0.0;
  if (a.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  const Eigen::Index n = a.cols();
  Eigen::VectorXd v;
  if (warm != nullptr && warm->size() == n && warm->norm() > 0.0) {
    v = warm->normalized();
  } else {
    v = start_vector(n, 0);
  }
  double sigma = (a * v).norm();
  for (std::uint64_t salt = 1; sigma == 0.0 && salt < 8; ++salt) {
    v = start_vector(n, salt);
    sigma = (a * v).norm();
  }
  double change = kInf;
  for (int it = 0; it < opt.max_iter; ++it) {
    Eigen::VectorXd w = a.transpose() * (a * v);
    const double wn = w.norm();
    if (wn == 0.0) break;
    v = w / wn;
    const double next = (a * v).norm();
    change = std::abs(next - sigma) / next;
    sigma = next;
    if (change <= opt.tol) {
      if (warm != nullptr) *warm = v;
      return sigma;
    }
  }
  if (change <= opt.tol) return sigma;
  throw NumericError("power iteration did not converge after " + std::to_string(opt.max_iter) +
                     " iterations (last relative change " + std::to_string(change) + ")");
}

constexpr double kProjectSlack = 1e-7;

double norm21_transpose(const Eigen::MatrixXd& a) { return a.rowwise().norm().sum(); }

RepresentationModel RepresentationModel::linear(Eigen::MatrixXd a, double norm21_cap,
                                                double spectral_cap) {
  if (!(norm21_cap > 0.0) || !(spectral_cap > 0.0)) {
    throw ConfigError("linear model caps must be > 0");
  }
  RepresentationModel m;
  m.family_ = ModelFamily::Linear;
  m.norm21_cap_ = norm21_cap;
  Layer l;
  l.weight = std::move(a);
  l.activation = Activation::Identity;
  l.spectral_cap = spectral_cap;
  m.layers_.push_back(std::move(l));
  m.check_shapes();
  return m;
}

RepresentationModel RepresentationModel::mlp(std::vector<Layer> layers) {
  RepresentationModel m;
  m.family_ = ModelFamily::Mlp;
  m.layers_ = std::move(layers);
  for (const auto& l : m.layers_) {
    if (!(l.spectral_cap > 0.0)) throw ConfigError("spectral caps must be > 0");
  }
  m.check_shapes();
  return m;
}

namespace {

Eigen::MatrixXd uniform_init(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double r = 1.0 / std::sqrt(static_cast<double>(cols));
  std::uniform_real_distribution<double> u(-r, r);
  Eigen::MatrixXd w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = u(rng);
  }
  return w;
}

}  // namespace

RepresentationModel RepresentationModel::init_linear(std::size_t out_dim, std::size_t in_dim,
                                                     double norm21_cap, double spectral_cap,
                                                     std::uint64_t seed) {
  if (out_dim == 0 || in_dim == 0) throw ConfigError("linear model dimensions must be >= 1");
  std::mt19937_64 rng(seed);
  auto m = linear(uniform_init(out_dim, in_dim, rng), norm21_cap, spectral_cap);
  m.project();
  return m;
}

RepresentationModel RepresentationModel::init_mlp(std::span<const std::size_t> widths,
                                                  std::span<const Activation> activations,
                                                  std::span<const double> spectral_caps,
                                                  std::uint64_t seed) {
  if (widths.size() < 2) throw ConfigError("mlp needs at least an input and an output width");
  const std::size_t depth = widths.size() - 1;
  if (activations.size() != depth || spectral_caps.size() != depth) {
    throw ConfigError("mlp needs one activation and one spectral cap per layer");
  }
  std::mt19937_64 rng(seed);
  std::vector<Layer> layers(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    if (widths[l] == 0 || widths[l + 1] == 0) throw ConfigError("mlp widths must be >= 1");
    layers[l].weight = uniform_init(widths[l + 1], widths[l], rng);
    layers[l].activation = activations[l];
    layers[l].spectral_cap = spectral_caps[l];
  }
  auto m = mlp(std::move(layers));
  m.project();
  return m;
}

void RepresentationModel::check_shapes() const {
  if (layers_.empty()) throw ConfigError("model has no layers");
  for (std::size_t l = 1; l < layers_.size(); ++l) {
    if (layers_[l].weight.cols() != layers_[l - 1].weight.rows()) {
      throw ConfigError("layer " + std::to_string(l) + " expects input width " +
                        std::to_string(layers_[l].weight.cols()) + " but layer " +
                        std::to_string(l - 1) + " outputs " +
                        std::to_string(layers_[l - 1].weight.rows()));
    }
  }
}

std::size_t RepresentationModel::input_dim() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weight.cols());
}

std::size_t RepresentationModel::output_dim() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().weight.rows());
}

std::size_t RepresentationModel::neuron_count() const {
  std::size_t w = 0;
  for (const auto& l : layers_) w += static_cast<std::size_t>(l.weight.rows());
  return w;
}

std::size_t RepresentationModel::parameter_count() const {
  std::size_t p = 0;
  for (const auto& l : layers_) p += static_cast<std::size_t>(l.weight.size());
  return p;
}

Eigen::VectorXd RepresentationModel::forward(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return forward_batch(x);
}

Eigen::MatrixXd RepresentationModel::forward_batch(
    const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (static_cast<std::size_t>(x.rows()) != input_dim()) {
    throw ConfigError("input has dimension " + std::to_string(x.rows()) + ", model expects " +
                      std::to_string(input_dim()));
  }
  Eigen::MatrixXd h = x;
  for (const auto& l : layers_) {
    Eigen::MatrixXd z = l.weight * h;
    apply_activation(l.activation, z);
    h = std::move(z);
  }
  return h;
}

void RepresentationModel::project(const PowerIterationOptions& opt) {
  for (auto& l : layers_) {
    if (!std::isfinite(l.spectral_cap)) continue;
    // Power iteration approaches sigma from below, so re-check after
    // scaling. The slack sits above the estimator's own error, which keeps
    // project() idempotent, and far below the 1e-6 the caps promise.
    for (int round = 0; round < 4; ++round) {
      double sigma;
      try {
        sigma = spectral_norm(l.weight, &l.power_vector, opt);
      } catch (const NumericError&) {
        // A cluster of near-equal top singular values stalls the iteration;
        // the layers are small enough for an exact SVD.
        sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(l.weight).singularValues()(0);
        if (sigma > l.spectral_cap) l.weight *= l.spectral_cap / sigma;
        break;
      }
      if (sigma <= l.spectral_cap * (1.0 + kProjectSlack)) break;
      l.weight *= l.spectral_cap / sigma;
    }
  }
  if (family_ == ModelFamily::Linear && std::isfinite(norm21_cap_)) {
    auto& w = layers_.front().weight;
    const double n21 = norm21_transpose(w);
    if (n21 > norm21_cap_ * (1.0 + 1e-12)) w *= norm21_cap_ / n21;
  }
}

double RepresentationModel::lipschitz_bound() const {
  double p = 1.0;
  for (const auto& l : layers_) p *= activation_lipschitz(l.activation) * l.spectral_cap;
  return p;
}

double RepresentationModel::lipschitz_actual() const {
  double p = 1.0;
  for (const auto& l : layers_) {
    Eigen::VectorXd warm = l.power_vector;
    p *= activation_lipschitz(l.activation) * spectral_norm(l.weight, &warm);
  }
  return p;
}

void RepresentationModel::set_zero() {
  for (auto& l : layers_) l.weight.setZero();
}

bool RepresentationModel::operator==(const RepresentationModel& o) const {
  if (family_ != o.family_ || layers_.size() != o.layers_.size()) return false;
  if (!(norm21_cap_ == o.norm21_cap_)) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& a = layers_[l];
    const auto& b = o.layers_[l];
    if (a.activation != b.activation || !(a.spectral_cap == b.spectral_cap)) return false;
    if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols()) return false;
    if (a.weight != b.weight) return false;
  }
  return true;
}

void ModelGradient::set_zero() {
  for (auto& g : layers) g.setZero();
}

ModelGradient& ModelGradient::operator+=(const ModelGradient& o) {
  for (std::size_t l = 0; l < layers.size(); ++l) layers[l] += o.layers[l];
  return *this;
}

ModelGradient& ModelGradient::operator*=(double s) {
  for (auto& g : layers) g *= s;
  return *this;
}

double ModelGradient::squared_norm() const {
  double s = 0.0;
  for (const auto& g : layers) s += g.squaredNorm();
  return s;
}

ModelGradient zero_gradient(const RepresentationModel& f) {
  ModelGradient g;
  for (const auto& l : f.layers()) g.layers.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
  return g;
}

ForwardCache forward_cached(const RepresentationModel& f,
                            const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (static_cast<std::size_t>(x.rows()) != f.input_dim()) {
    throw ConfigError("input has dimension " + std::to_string(x.rows()) + ", model expects " +
                      std::to_string(f.input_dim()));
  }
  ForwardCache c;
  c.h.reserve(f.num_layers() + 1);
  c.z.reserve(f.num_layers());
  c.h.emplace_back(x);
  for (const auto& l : f.layers()) {
    c.z.push_back(l.weight * c.h.back());
    Eigen::MatrixXd h = c.z.back();
    apply_activation(l.activation, h);
    c.h.push_back(std::move(h));
  }
  return c;
}

ModelGradient backprop(const RepresentationModel& f, const ForwardCache& cache,
                       const Eigen::MatrixXd& doutput) {
  ModelGradient g;
  g.layers.resize(f.num_layers());
  Eigen::MatrixXd delta = doutput;
  for (std::size_t l = f.num_layers(); l-- > 0;) {
    const auto& layer = f.layer(l);
    activation_backward(layer.activation, cache.z[l], delta);
    g.layers[l] = delta * cache.h[l].transpose();
    if (l > 0) delta = layer.weight.transpose() * delta;
  }
  return g;
}

BatchGradient backward(const RepresentationModel& f, const LabeledDataset& ds,
                       const TupleSet& batch, const LossSpec& loss,
                       std::span<const double> weights) {
  if (batch.empty()) throw PreconditionError("backward: empty batch");
  if (!weights.empty() && weights.size() != batch.size()) {
    throw PreconditionError("backward: one weight per tuple required");
  }
  const std::size_t k = batch.k();

  // Compact the touched samples into local columns.
  std::unordered_map<SampleIndex, SampleIndex> local;
  std::vector<SampleIndex> global;
  std::vector<SampleIndex> remapped(batch.flat().size());
  for (std::size_t i = 0; i < batch.flat().size(); ++i) {
    const SampleIndex s = batch.flat()[i];
    auto [it, inserted] = local.try_emplace(s, static_cast<SampleIndex>(global.size()));
    if (inserted) global.push_back(s);
    remapped[i] = it->second;
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(ds.dim()), static_cast<Eigen::Index>(global.size()));
  for (std::size_t j = 0; j < global.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = ds.x(global[j]);

  const ForwardCache cache = forward_cached(f, x);
  const Eigen::MatrixXd& reps = cache.output();
  Eigen::MatrixXd dreps = Eigen::MatrixXd::Zero(reps.rows(), reps.cols());
  const double uniform = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const SampleIndex* row = remapped.data() + j * (k + 2);
    const double w = weights.empty() ? uniform : weights[j];
    total += w * accumulate_tuple_grad(loss, reps, row[0], row[1],
                                       std::span<const SampleIndex>(row + 2, k), w, dreps);
  }
  return {total, backprop(f, cache, dreps)};
}

void apply_update(RepresentationModel& f, const ModelGradient& g, double lr) {
  for (std::size_t l = 0; l < f.num_layers(); ++l) f.layer(l).weight -= lr * g.layers[l];
}

}  // namespace uscrl
