// Copyright 2026 The ngd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal fully-connected network with the curvature products needed by
// geometric optimizers.
//
// Conventions
// -----------
//  * Batches are row-major in the sample index: inputs are (n x in_dim),
//    targets and outputs are (n x out_dim).
//  * Layer i computes s_i = W_i a_{i-1} + b_i and a_i = act_i(s_i); the network
//    output y is a_l, the value *after* the final activation.
//  * The flat parameter layout is layer-major: W_1 (row-major), b_1, W_2, b_2, ...
//  * Every product is an average over the batch.
//
// Directional derivatives along a parameter direction v are computed by
// forward-mode passes: R(.) is the first and S(.) the second directional
// derivative. Curvature-vector products then backpropagate a pseudo-loss
// sum_i c_i y_i with the coefficients c_i held constant.

#ifndef NGD_NETWORK_HPP
#define NGD_NETWORK_HPP

#include "ngd/geometry.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace ngd::nn {

enum class Activation { Sigmoid, Tanh, Identity, Softmax };

std::string_view activation_name(Activation act);
Activation parse_activation(std::string_view name);

struct Layer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation act = Activation::Identity;
};

class Network {
 public:
  /// Throws ShapeMismatch for incompatible layer sizes and ConfigError when
  /// softmax appears before the last layer.
  explicit Network(std::vector<Layer> layers);

  /// Gaussian(0, 0.5 / fan_in) weights, zero biases.
  static Network random(const std::vector<Index>& sizes, const std::vector<Activation>& acts,
                        std::uint64_t seed);

  const std::vector<Layer>& layers() const { return layers_; }
  Index input_dim() const { return layers_.front().weights.cols(); }
  Index output_dim() const { return layers_.back().weights.rows(); }
  Activation output_activation() const { return layers_.back().act; }
  Index param_count() const { return param_count_; }

  Vector flatten() const;
  /// Same architecture, parameters taken from `flat`. Throws LengthMismatch.
  Network unflatten(const Vector& flat) const;

  friend bool operator==(const Network& a, const Network& b);

 private:
  std::vector<Layer> layers_;
  Index param_count_ = 0;
};

struct Loss {
  enum class Kind { Squared, BinaryCE, MultiClassCE };

  Kind kind = Kind::Squared;
  double sigma2 = 1.0;
  /// NumericalUnderflow is raised when more than this fraction of the output
  /// entries had to be clamped into [kOutputClamp, 1 - kOutputClamp].
  double max_clamped_fraction = 0.5;

  static Loss squared(double sigma2 = 1.0) { return {Kind::Squared, sigma2}; }
  static Loss binary_ce() { return {Kind::BinaryCE}; }
  static Loss multi_class_ce() { return {Kind::MultiClassCE}; }
};

inline constexpr double kOutputClamp = 1e-12;

std::string_view loss_name(Loss::Kind kind);
Loss::Kind parse_loss(std::string_view name);

struct Batch {
  Matrix inputs;   // n x in_dim
  Matrix targets;  // n x out_dim
};

/// Squared loss needs an identity output, BCE a sigmoid output and MCE a
/// softmax output. Throws ConfigError otherwise.
void validate_loss(const Network& net, const Loss& loss);
/// Shape and label checks. Throws ShapeMismatch / ConfigError.
void validate_batch(const Network& net, const Loss& loss, const Batch& batch);

struct DirectionalPass {
  Matrix y;   // outputs
  Matrix ry;  // d/de y(theta + e v)
  Matrix sy;  // d^2/de^2 y(theta + e v)
};

struct LossAndGrad {
  double loss;
  Vector grad;
};

Matrix forward(const Network& net, const Matrix& inputs);

/// Mean negative log-likelihood (additive constants dropped) and its gradient.
LossAndGrad loss_and_grad(const Network& net, const Loss& loss, const Batch& batch);
double loss_value(const Network& net, const Loss& loss, const Batch& batch);

DirectionalPass rs_pass(const Network& net, const Matrix& inputs, const Vector& v);

/// G v with G the Fisher metric of the loss's output distribution.
Vector fisher_vp(const Network& net, const Loss& loss, const Batch& batch, const Vector& v);

/// Exact diagonal of G, one backward pass per output unit.
Vector fisher_diagonal(const Network& net, const Loss& loss, const Batch& batch);

/// Lowered connection contraction u_nu = g_{nu mu} Gamma^mu_{ab} v^a v^b,
/// i.e. mean_x sum_i [l1(y_i) S(y_i) + l2(y_i) R(y_i)^2] d_nu y_i.
Vector connection_vp(const Network& net, const Loss& loss, const Batch& batch, const Vector& v);

/// mean_x sum_i l(y_i) d_nu d_a y_i d_b y_i v^a v^b, with l the metric
/// coefficient of the loss.
Vector term3_vp(const Network& net, const Loss& loss, const Batch& batch, const Vector& v);

/// Right-hand sides of the second-order correction obtained by expanding the
/// loss around the network's pre-activation outputs z (Gauss-Newton view).
/// `small_curvature` keeps only 1/2 L_zz d_j d_k z d_nu z v^j v^k;
/// `perturbation` additionally keeps the mixed second-derivative term and the
/// residual-weighted term L_z d_nu d_j z v^j.
/// The corresponding correction is -G^{-1} rhs.
struct SecondOrderRhs {
  Vector small_curvature;
  Vector perturbation;
};
SecondOrderRhs second_order_rhs(const Network& net, const Loss& loss, const Batch& batch,
                                const Vector& v);

}  // namespace ngd::nn

#endif  // NGD_NETWORK_HPP
