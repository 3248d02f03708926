#ifndef USCRL_MODEL_HPP_
#define USCRL_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "uscrl/types.hpp"

namespace uscrl {

class LabeledDataset;
class TupleSet;
struct LossSpec;

enum class Activation { Identity, ReLU, Tanh };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

// Lipschitz constant xi of the activation.
double activation_lipschitz(Activation a);

enum class ModelFamily { Linear, Mlp };

std::string_view to_string(ModelFamily f);
ModelFamily model_family_from_string(std::string_view s);

struct Layer {
  Eigen::MatrixXd weight;  // d_l x d_{l-1}
  Activation activation = Activation::Identity;
  double spectral_cap = kInf;
  // Warm start for power iteration; refreshed by every spectral norm call.
  Eigen::VectorXd power_vector;
};

struct PowerIterationOptions {
  double tol = 1e-8;
  int max_iter = 500;
};

// Largest singular value by power iteration on A^T A. `warm` (size cols)
// seeds the iteration and receives the converged right singular vector.
// Throws NumericError when the relative change has not dropped below tol
// after max_iter steps.
double spectral_norm(const Eigen::MatrixXd& a, Eigen::VectorXd* warm = nullptr,
                     const PowerIterationOptions& opt = {});

// ||A^T||_{2,1}: the sum of the Euclidean norms of the rows of A.
double norm21_transpose(const Eigen::MatrixXd& a);

/// f: R^m -> R^d, either x -> Ax under ||A^T||_{2,1} <= a and ||A||_sigma <= s,
/// or an L-layer network phi_L(A_L ... phi_1(A_1 x)) with ||A_l||_sigma <= s_l.
/// A linear model is stored as a single identity-activation layer.
class RepresentationModel {
 public:
  RepresentationModel() = default;

  static RepresentationModel linear(Eigen::MatrixXd a, double norm21_cap, double spectral_cap);
  static RepresentationModel mlp(std::vector<Layer> layers);

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, then projected.
  static RepresentationModel init_linear(std::size_t out_dim, std::size_t in_dim,
                                         double norm21_cap, double spectral_cap,
                                         std::uint64_t seed);
  static RepresentationModel init_mlp(std::span<const std::size_t> widths,
                                      std::span<const Activation> activations,
                                      std::span<const double> spectral_caps,
                                      std::uint64_t seed);

  ModelFamily family() const noexcept { return family_; }
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t num_layers() const noexcept { return layers_.size(); }
  const Layer& layer(std::size_t l) const { return layers_.at(l); }
  Layer& layer(std::size_t l) { return layers_.at(l); }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  double norm21_cap() const noexcept { return norm21_cap_; }

  // W = sum over l >= 1 of d_l.
  std::size_t neuron_count() const;
  std::size_t parameter_count() const;

  Eigen::VectorXd forward(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // Columns of `x` are inputs; columns of the result are representations.
  Eigen::MatrixXd forward_batch(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

  // Scales each weight by min(1, s_l/||A_l||_sigma) and, for the linear
  // family, by min(1, a/||A^T||_{2,1}).
  void project(const PowerIterationOptions& opt = {});

  // prod_l xi_l s_l (caps), the Lipschitz bound the theorems use.
  double lipschitz_bound() const;
  // prod_l xi_l ||A_l||_sigma, the bound attained by the current weights.
  double lipschitz_actual() const;

  void set_zero();
  bool operator==(const RepresentationModel& o) const;

 private:
  void check_shapes() const;

  ModelFamily family_ = ModelFamily::Mlp;
  std::vector<Layer> layers_;
  double norm21_cap_ = kInf;
};

struct ModelGradient {
  std::vector<Eigen::MatrixXd> layers;

  void set_zero();
  ModelGradient& operator+=(const ModelGradient& o);
  ModelGradient& operator*=(double s);
  double squared_norm() const;
};

ModelGradient zero_gradient(const RepresentationModel& f);

/// Activations kept from a batched forward pass: h[0] = input, and for each
/// layer l the pre-activation z[l] and output h[l+1].
struct ForwardCache {
  std::vector<Eigen::MatrixXd> h;
  std::vector<Eigen::MatrixXd> z;
  const Eigen::MatrixXd& output() const { return h.back(); }
};

ForwardCache forward_cached(const RepresentationModel& f,
                            const Eigen::Ref<const Eigen::MatrixXd>& x);

// Pulls dL/d(output) back to dL/dA_l for every layer.
ModelGradient backprop(const RepresentationModel& f, const ForwardCache& cache,
                       const Eigen::MatrixXd& doutput);

struct BatchGradient {
  double loss = 0.0;  // weighted mean of the (clipped) tuple losses
  ModelGradient grad;
};

// Gradient of sum_j w_j l(T_j) over the batch; `weights` empty means
// w_j = 1/|batch|. Only the samples the batch touches are forwarded.
BatchGradient backward(const RepresentationModel& f, const LabeledDataset& ds,
                       const TupleSet& batch, const LossSpec& loss,
                       std::span<const double> weights = {});

// w <- w - lr * g, layer by layer.
void apply_update(RepresentationModel& f, const ModelGradient& g, double lr);

}  // namespace uscrl

#endif  // USCRL_MODEL_HPP_
