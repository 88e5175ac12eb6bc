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

#include "ngd/solver.hpp"

#include "ngd/errors.hpp"

#include <cmath>
#include <string>

namespace ngd {

void DampingState::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("damping.epsilon must be >= 0");
  if (!(threshold >= 0.0)) throw ConfigError("damping.threshold must be >= 0");
  if (!(grow > 1.0) || !std::isfinite(grow)) throw ConfigError("damping.grow must be > 1");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("damping.shrink must lie in (0, 1)");
  if (!(lower >= 0.0 && lower <= upper)) throw ConfigError("damping.lower must lie in [0, upper]");
}

void CgConfig::validate() const {
  if (max_iters < 1) throw ConfigError("cg.max_iters must be >= 1");
  if (!(tol > 0.0)) throw ConfigError("cg.tol must be > 0");
}

SolveResult damped_solve(const MatVec& matvec, const Vector& diag, const Vector& rhs,
                         const DampingState& damping, const CgConfig& cfg) {
  const Index n = rhs.size();
  if (diag.size() != n) throw ShapeMismatch("damping diagonal length != rhs length");
  if (!rhs.allFinite()) throw NonFiniteState("CG right-hand side is not finite");
  const double eps = damping.epsilon;
  auto apply = [&](const Vector& v) -> Vector {
    Vector out = matvec(v);
    if (eps != 0.0) out += eps * diag.cwiseProduct(v);
    return out;
  };

  SolveResult best{Vector::Zero(n), 0, rhs.norm()};
  const double target = cfg.tol * best.residual;
  if (best.residual == 0.0) return best;

  Vector x = Vector::Zero(n);
  Vector r = rhs;
  Vector p = r;
  double rr = r.squaredNorm();
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const Vector ap = apply(p);
    const double pap = p.dot(ap);
    const double scale = p.norm() * ap.norm();
    if (pap < -1e-12 * scale) throw Breakdown("CG met negative curvature p^T A p = " + std::to_string(pap));
    if (pap <= 1e-12 * scale) break;
    const double alpha = rr / pap;
    x += alpha * p;
    r -= alpha * ap;
    const double res = r.norm();
    if (!std::isfinite(res)) throw NonFiniteState("CG residual is not finite");
    if (res < best.residual) best = {x, it, res};
    if (res <= target) break;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return best;
}

SolveResult dense_damped_solve(const Matrix& metric, const Vector& diag, const Vector& rhs,
                               double epsilon) {
  const Index n = rhs.size();
  if (metric.rows() != n || metric.cols() != n || diag.size() != n)
    throw ShapeMismatch("dense solve: inconsistent sizes");
  Matrix a = metric;
  if (epsilon != 0.0) a.diagonal() += epsilon * diag;
  const Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw SingularMetric("damped metric is not positive definite");
  SolveResult out;
  out.solution = llt.solve(rhs);
  if (!out.solution.allFinite()) throw SingularMetric("damped metric solve produced non-finite values");
  out.iters = 0;
  out.residual = (rhs - a * out.solution).norm();
  return out;
}

std::string_view diag_mode_name(DiagMode mode) {
  return mode == DiagMode::Ones ? "ones" : "exact_probes";
}

DiagMode parse_diag_mode(std::string_view name) {
  if (name == "exact_probes") return DiagMode::ExactProbes;
  if (name == "ones") return DiagMode::Ones;
  throw ConfigError("unknown diag mode '" + std::string(name) + "'");
}

Vector diag_estimate(const MatVec& matvec, Index n, DiagMode mode) {
  if (mode == DiagMode::Ones) return Vector::Ones(n);
  Vector d(n);
  Vector e = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    e(i) = 1.0;
    d(i) = matvec(e)(i);
    e(i) = 0.0;
  }
  return d;
}

Matrix dense_from_matvec(const MatVec& matvec, Index n) {
  Matrix g(n, n);
  Vector e = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    e(i) = 1.0;
    g.col(i) = matvec(e);
    e(i) = 0.0;
  }
  return g;
}

DampingState marquardt_adapt(DampingState damping, double rho) {
  if (rho > damping.upper) damping.epsilon *= damping.shrink;
  else if (rho < damping.lower) damping.epsilon *= damping.grow;
  return damping;
}

}  // namespace ngd
