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

#ifndef NGD_GEOMETRY_HPP
#define NGD_GEOMETRY_HPP

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace ngd {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense n x n x n array of doubles, stored with the last index fastest.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Index n) : n_(n), data_(static_cast<std::size_t>(n * n * n), 0.0) {}

  Index dim() const { return n_; }

  double& operator()(Index i, Index j, Index k) { return data_[offset(i, j, k)]; }
  double operator()(Index i, Index j, Index k) const { return data_[offset(i, j, k)]; }

  /// Largest absolute entry; 0 for an empty tensor.
  double max_abs() const;

 private:
  std::size_t offset(Index i, Index j, Index k) const {
    return static_cast<std::size_t>((i * n_ + j) * n_ + k);
  }

  Index n_ = 0;
  std::vector<double> data_;
};

/// d(sigma, mu, nu) = partial_sigma g_{mu nu}. Symmetric in (mu, nu).
class MetricPartials : public Tensor3 {
 public:
  using Tensor3::Tensor3;
};

/// Christoffel symbols of the second kind, G(mu, alpha, beta) = Gamma^mu_{alpha beta}.
class ChristoffelTensor : public Tensor3 {
 public:
  using Tensor3::Tensor3;

  /// Returns Gamma^mu_{alpha beta} u^alpha w^beta.
  Vector contract(const Vector& u, const Vector& w) const;
  Vector contract(const Vector& v) const { return contract(v, v); }
};

/// Applies the inverse metric: x = g^{-1} rhs.
using LinearSolve = std::function<Vector(const Vector&)>;

/// Cholesky-backed solver for an SPD metric. Throws SingularMetric if the
/// factorization fails.
LinearSolve cholesky_solver(const Matrix& metric);

/// Assembles the Levi-Civita connection
///   Gamma^mu_{ab} = 1/2 g^{mu nu} (d_a g_{nu b} + d_b g_{nu a} - d_nu g_{ab})
/// one (a, b) column at a time through `solve`. The result is symmetrized in
/// its lower indices. Throws SingularMetric if a solve returns non-finite values.
ChristoffelTensor christoffel_from_metric(const LinearSolve& solve, const MetricPartials& dg);

/// Convenience overload that factors `metric` with Cholesky.
ChristoffelTensor christoffel_from_metric(const Matrix& metric, const MetricPartials& dg);

struct GeodesicState {
  Vector position;
  Vector velocity;
};

using ChristoffelProvider = std::function<ChristoffelTensor(const Vector&)>;

/// First-order form of the geodesic equation: (v, -Gamma(x) v v).
GeodesicState geodesic_rhs(const ChristoffelProvider& connection, const GeodesicState& state);

using VectorField = std::function<Vector(double, const Vector&)>;
using StepObserver = std::function<void(double, const Vector&)>;

/// Classical fourth-order Runge-Kutta with `n_steps` uniform steps on [t0, t1].
/// `observer`, when set, is called at t0 and after every step.
/// Throws NonFiniteState when any stage produces NaN/Inf.
Vector rk4_integrate(const VectorField& field, const Vector& x0, double t0, double t1,
                     int n_steps, const StepObserver& observer = {});

/// Integrates the geodesic through (p, v) over unit time and returns every
/// substep state, starting with (p, v). Domain errors raised by `connection`
/// are reported as DomainExit.
std::vector<GeodesicState> geodesic_path(const ChristoffelProvider& connection, const Vector& p,
                                         const Vector& v, int n_substeps);

/// Exp(p, v): the endpoint of the unit-time geodesic with initial velocity v.
Vector exponential_map(const ChristoffelProvider& connection, const Vector& p, const Vector& v,
                       int n_substeps);

}  // namespace ngd

#endif  // NGD_GEOMETRY_HPP
