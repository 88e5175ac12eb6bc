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

#include "ngd/geometry.hpp"

#include "ngd/errors.hpp"

#include <cmath>
#include <string>

namespace ngd {

double Tensor3::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

Vector ChristoffelTensor::contract(const Vector& u, const Vector& w) const {
  const Index n = dim();
  Vector out = Vector::Zero(n);
  for (Index mu = 0; mu < n; ++mu) {
    double acc = 0.0;
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) acc += (*this)(mu, a, b) * u(a) * w(b);
    out(mu) = acc;
  }
  return out;
}

LinearSolve cholesky_solver(const Matrix& metric) {
  Eigen::LLT<Matrix> llt(metric);
  if (llt.info() != Eigen::Success)
    throw SingularMetric("Cholesky factorization of the metric failed");
  return [llt = std::move(llt)](const Vector& rhs) -> Vector { return llt.solve(rhs); };
}

ChristoffelTensor christoffel_from_metric(const LinearSolve& solve, const MetricPartials& dg) {
  const Index n = dg.dim();
  ChristoffelTensor gamma(n);
  Vector rhs(n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = a; b < n; ++b) {
      for (Index nu = 0; nu < n; ++nu)
        rhs(nu) = 0.5 * (dg(a, nu, b) + dg(b, nu, a) - dg(nu, a, b));
      const Vector col = solve(rhs);
      if (!col.allFinite()) throw SingularMetric("metric solve produced non-finite values");
      for (Index mu = 0; mu < n; ++mu) {
        gamma(mu, a, b) = col(mu);
        gamma(mu, b, a) = col(mu);
      }
    }
  }
  // Solving once per unordered pair makes the lower-index symmetry exact.
  return gamma;
}

ChristoffelTensor christoffel_from_metric(const Matrix& metric, const MetricPartials& dg) {
  return christoffel_from_metric(cholesky_solver(metric), dg);
}

GeodesicState geodesic_rhs(const ChristoffelProvider& connection, const GeodesicState& state) {
  const ChristoffelTensor gamma = connection(state.position);
  return {state.velocity, -gamma.contract(state.velocity)};
}

Vector rk4_integrate(const VectorField& field, const Vector& x0, double t0, double t1,
                     int n_steps, const StepObserver& observer) {
  if (n_steps < 1) throw DomainError("rk4_integrate: n_steps must be >= 1");
  if (t1 < t0) throw DomainError("rk4_integrate: t1 must be >= t0");
  const double h = (t1 - t0) / n_steps;
  Vector x = x0;
  auto check = [](const Vector& v, int step) {
    if (!v.allFinite())
      throw NonFiniteState("rk4_integrate: non-finite state at step " + std::to_string(step));
  };
  check(x, 0);
  if (observer) observer(t0, x);
  for (int k = 0; k < n_steps; ++k) {
    const double t = t0 + k * h;
    const Vector k1 = field(t, x);
    check(k1, k);
    const Vector k2 = field(t + 0.5 * h, x + 0.5 * h * k1);
    check(k2, k);
    const Vector k3 = field(t + 0.5 * h, x + 0.5 * h * k2);
    check(k3, k);
    const Vector k4 = field(t + h, x + h * k3);
    check(k4, k);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check(x, k + 1);
    if (observer) observer(t0 + (k + 1) * h, x);
  }
  return x;
}

namespace {

Vector pack(const Vector& p, const Vector& v) {
  Vector x(p.size() + v.size());
  x << p, v;
  return x;
}

}  // namespace

std::vector<GeodesicState> geodesic_path(const ChristoffelProvider& connection, const Vector& p,
                                         const Vector& v, int n_substeps) {
  if (p.size() != v.size()) throw ShapeMismatch("geodesic_path: position/velocity size differ");
  const Index n = p.size();
  std::vector<GeodesicState> path;
  path.reserve(static_cast<std::size_t>(n_substeps) + 1);

  auto field = [&](double, const Vector& x) -> Vector {
    GeodesicState s{x.head(n), x.tail(n)};
    GeodesicState d;
    try {
      d = geodesic_rhs(connection, s);
    } catch (const DomainError& e) {
      throw DomainExit(std::string("geodesic left the model domain: ") + e.what());
    }
    return pack(d.position, d.velocity);
  };
  auto record = [&](double, const Vector& x) { path.push_back({x.head(n), x.tail(n)}); };
  rk4_integrate(field, pack(p, v), 0.0, 1.0, n_substeps, record);
  return path;
}

Vector exponential_map(const ChristoffelProvider& connection, const Vector& p, const Vector& v,
                       int n_substeps) {
  if (v.isZero(0.0)) return p;
  return geodesic_path(connection, p, v, n_substeps).back().position;
}

}  // namespace ngd
