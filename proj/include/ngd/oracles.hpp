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

// Brute-force reference quantities built only from forward evaluations.
// They share no code with the analytic products they are used to verify:
// output Jacobians and Hessians come from finite differences, and the
// per-loss coefficient formulas are restated here.

#ifndef NGD_ORACLES_HPP
#define NGD_ORACLES_HPP

#include "ngd/network.hpp"

#include <functional>
#include <vector>

namespace ngd::oracle {

using ScalarFn = std::function<double(const Vector&)>;
using VectorFn = std::function<Vector(const Vector&)>;

/// Fourth-order central difference of a scalar function.
Vector fd_gradient(const ScalarFn& f, const Vector& x, double h = 1e-4);
/// Fourth-order central difference Jacobian (rows = outputs).
Matrix fd_jacobian(const VectorFn& f, const Vector& x, double h = 1e-4);

/// Second-order central differences along a single direction.
Matrix fd_first_directional(const nn::Network& net, const Matrix& inputs, const Vector& v,
                            double eps);
Matrix fd_second_directional(const nn::Network& net, const Matrix& inputs, const Vector& v,
                             double eps);

/// Output derivatives per sample: jac[s] is (out x P); hess[s][i] is (P x P).
struct OutputDerivatives {
  Matrix outputs;
  std::vector<Matrix> jac;
  std::vector<std::vector<Matrix>> hess;
};
OutputDerivatives output_derivatives(const nn::Network& net, const Matrix& inputs,
                                     bool with_hessians);

/// mean_x sum_i l(y_i) J_i^T J_i.
Matrix brute_fisher(const nn::Network& net, const nn::Loss& loss, const nn::Batch& batch);

/// Symmetric bilinear lowered connection
/// mean_x sum_i [l1 (v^T H_i w) + l2 (J_i v)(J_i w)] J_i^T.
Vector brute_connection(const nn::Network& net, const nn::Loss& loss, const nn::Batch& batch,
                        const Vector& v, const Vector& w);

/// mean_x sum_i l(y_i) (H_i v) (J_i v).
Vector brute_term3(const nn::Network& net, const nn::Loss& loss, const nn::Batch& batch,
                   const Vector& v);

/// max |a - b| / max(|b|_inf, floor).
double rel_err(const Vector& a, const Vector& b, double floor = 1e-12);
double rel_err(const Matrix& a, const Matrix& b, double floor = 1e-12);

}  // namespace ngd::oracle

#endif  // NGD_ORACLES_HPP
