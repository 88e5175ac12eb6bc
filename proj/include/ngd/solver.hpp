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

// Damped linear solves (G + eps diag(G)) x = b and damping adaptation.

#ifndef NGD_SOLVER_HPP
#define NGD_SOLVER_HPP

#include "ngd/geometry.hpp"

#include <functional>
#include <string_view>

namespace ngd {

using MatVec = std::function<Vector(const Vector&)>;

struct DampingState {
  double epsilon = 45.0;
  /// Second-order corrections are disabled while epsilon > threshold.
  double threshold = 5.0;
  double grow = 1.5;
  double shrink = 2.0 / 3.0;
  /// rho below `lower` grows epsilon, rho above `upper` shrinks it.
  double lower = 0.25;
  double upper = 0.75;

  /// Throws ConfigError naming the violated field.
  void validate() const;
};

struct CgConfig {
  int max_iters = 50;
  double tol = 1e-8;  // on ||r|| / ||b||

  void validate() const;
};

struct SolveResult {
  Vector solution;
  int iters = 0;
  double residual = 0.0;  // ||b - A x||
};

/// Conjugate gradient on v -> matvec(v) + eps * diag ⊙ v from x = 0.
/// Returns the iterate with the smallest residual seen. Throws Breakdown when
/// a curvature p^T A p is negative beyond round-off.
SolveResult damped_solve(const MatVec& matvec, const Vector& diag, const Vector& rhs,
                         const DampingState& damping, const CgConfig& cfg);

/// Direct solve of (G + eps diag(G)) x = b. Throws SingularMetric when the
/// damped matrix is not numerically positive definite.
SolveResult dense_damped_solve(const Matrix& metric, const Vector& diag, const Vector& rhs,
                               double epsilon);

enum class DiagMode { ExactProbes, Ones };

std::string_view diag_mode_name(DiagMode mode);
DiagMode parse_diag_mode(std::string_view name);

/// ExactProbes: e_i^T G e_i with n matvecs. Ones: all-ones (identity damping).
Vector diag_estimate(const MatVec& matvec, Index n, DiagMode mode);

/// Materializes G column by column.
Matrix dense_from_matvec(const MatVec& matvec, Index n);

/// Marquardt rule on rho = actual / predicted decrease.
DampingState marquardt_adapt(DampingState damping, double rho);

}  // namespace ngd

#endif  // NGD_SOLVER_HPP
