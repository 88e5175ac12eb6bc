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

#include "ngd/errors.hpp"
#include "ngd/gamma_model.hpp"
#include "ngd/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>

using namespace ngd;

namespace {

// Flat plane in polar coordinates (r, phi): g = diag(1, r^2).
Matrix polar_metric(double r) {
  Matrix g = Matrix::Identity(2, 2);
  g(1, 1) = r * r;
  return g;
}

MetricPartials polar_partials(double r) {
  MetricPartials d(2);
  d(0, 1, 1) = 2.0 * r;
  return d;
}

ChristoffelTensor polar_connection(const Vector& x) {
  return christoffel_from_metric(polar_metric(x(0)), polar_partials(x(0)));
}

// A smooth SPD metric field on R^2 used for generic identity checks.
Matrix bumpy_metric(const Vector& x) {
  Matrix g(2, 2);
  g << 2.0 + std::sin(x(0)), 0.3 * x(0) * x(1), 0.3 * x(0) * x(1), 1.5 + x(1) * x(1);
  return g;
}

MetricPartials fd_partials(const std::function<Matrix(const Vector&)>& metric, const Vector& x,
                           double h) {
  MetricPartials d(2);
  for (Index s = 0; s < 2; ++s) {
    Vector xp = x, xm = x;
    xp(s) += h;
    xm(s) -= h;
    const Matrix dg = (metric(xp) - metric(xm)) / (2.0 * h);
    for (Index m = 0; m < 2; ++m)
      for (Index n = 0; n < 2; ++n) d(s, m, n) = dg(m, n);
  }
  return d;
}

}  // namespace

TEST_CASE("christoffel: constant metric gives zero") {
  Matrix g(2, 2);
  g << 2.0, 0.5, 0.5, 1.0;
  CHECK(christoffel_from_metric(g, MetricPartials(2)).max_abs() == 0.0);
}

TEST_CASE("christoffel: polar coordinates at r = 2") {
  Vector x(2);
  x << 2.0, 0.3;
  const ChristoffelTensor c = polar_connection(x);
  CHECK(c(0, 1, 1) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(c(1, 0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(c(1, 1, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(c(0, 0, 0) == 0.0);
  CHECK(c(0, 0, 1) == 0.0);
  CHECK(c(1, 0, 0) == 0.0);
  CHECK(c(1, 1, 1) == 0.0);

  // Same symbols from finite differences of the metric.
  const ChristoffelTensor fd = christoffel_from_metric(
      polar_metric(2.0), fd_partials([](const Vector& y) { return polar_metric(y(0)); }, x, 1e-5));
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j)
      for (Index k = 0; k < 2; ++k) CHECK(fd(i, j, k) == doctest::Approx(c(i, j, k)).epsilon(1e-9));
}

TEST_CASE("christoffel: exact symmetry and lowered identity on a generic metric") {
  Vector x(2);
  x << 0.7, -0.4;
  const Matrix g = bumpy_metric(x);
  const MetricPartials dg = fd_partials(bumpy_metric, x, 1e-5);
  const ChristoffelTensor c = christoffel_from_metric(g, dg);
  for (Index mu = 0; mu < 2; ++mu) {
    for (Index a = 0; a < 2; ++a) {
      for (Index b = 0; b < 2; ++b) {
        CHECK(c(mu, a, b) == c(mu, b, a));
      }
    }
  }
  for (Index a = 0; a < 2; ++a) {
    for (Index b = 0; b < 2; ++b) {
      Vector col(2), lowered(2);
      for (Index mu = 0; mu < 2; ++mu) col(mu) = c(mu, a, b);
      lowered = g * col;
      for (Index nu = 0; nu < 2; ++nu) {
        const double want = 0.5 * (dg(a, nu, b) + dg(b, nu, a) - dg(nu, a, b));
        CHECK(std::abs(lowered(nu) - want) <= 1e-10 * std::max(1.0, std::abs(want)));
      }
    }
  }
}

TEST_CASE("christoffel: singular metric is reported") {
  Matrix g(2, 2);
  g << 1.0, 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(christoffel_from_metric(g, MetricPartials(2)), SingularMetric);
}

TEST_CASE("geodesic_rhs: flat, zero velocity and polar acceleration") {
  const ChristoffelProvider flat = [](const Vector&) { return ChristoffelTensor(2); };
  Vector v(2);
  v << 1.0, 2.0;
  const GeodesicState d = geodesic_rhs(flat, {Vector::Ones(2), v});
  CHECK(d.position == v);
  CHECK(d.velocity.norm() == 0.0);

  Vector p(2);
  p << 2.0, 0.0;
  const GeodesicState z = geodesic_rhs(polar_connection, {p, Vector::Zero(2)});
  CHECK(z.position.norm() == 0.0);
  CHECK(z.velocity.norm() == 0.0);

  Vector w(2);
  w << 0.0, 1.0;
  const GeodesicState a = geodesic_rhs(polar_connection, {p, w});
  CHECK(a.position == w);
  CHECK(a.velocity(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(a.velocity(1) == 0.0);
}

TEST_CASE("rk4: constant, exponential, rotation and fourth order") {
  const Vector three = Vector::Constant(1, 3.0);
  CHECK(rk4_integrate([](double, const Vector& x) { return Vector(Vector::Zero(x.size())); }, three,
                      0.0, 5.0, 7)(0) == 3.0);

  const VectorField expo = [](double, const Vector& x) { return x; };
  CHECK(std::abs(rk4_integrate(expo, Vector::Ones(1), 0.0, 1.0, 100)(0) - std::numbers::e) <= 1e-8);

  const VectorField rot = [](double, const Vector& x) {
    Vector d(2);
    d << -x(1), x(0);
    return d;
  };
  Vector x0(2);
  x0 << 1.0, 0.0;
  CHECK((rk4_integrate(rot, x0, 0.0, 2.0 * std::numbers::pi, 1000) - x0).norm() <= 1e-9);

  // Least-squares slope of log error against log step.
  std::vector<double> lx, ly;
  for (int n : {4, 8, 16, 32, 64}) {
    lx.push_back(std::log(1.0 / n));
    ly.push_back(std::log(std::abs(rk4_integrate(expo, Vector::Ones(1), 0.0, 1.0, n)(0) - std::numbers::e)));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / 5.0;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / 5.0;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 5; ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  CHECK(num / den == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("rk4: argument and non-finite errors") {
  const VectorField id = [](double, const Vector& x) { return x; };
  CHECK_THROWS_AS(rk4_integrate(id, Vector::Ones(1), 0.0, 1.0, 0), DomainError);
  CHECK_THROWS_AS(rk4_integrate(id, Vector::Ones(1), 1.0, 0.0, 4), DomainError);
  const VectorField blow = [](double, const Vector& x) { return Vector(x.array() * NAN); };
  CHECK_THROWS_AS(rk4_integrate(blow, Vector::Ones(1), 0.0, 1.0, 4), NonFiniteState);
}

TEST_CASE("exponential map: zero velocity, flat metric, rescaled velocity") {
  Vector p(2);
  p << 2.0, 0.3;
  CHECK(exponential_map(polar_connection, p, Vector::Zero(2), 16) == p);

  const ChristoffelProvider flat = [](const Vector&) { return ChristoffelTensor(2); };
  Vector q = Vector::Ones(2), v(2);
  v << 0.5, -0.5;
  const Vector end = exponential_map(flat, q, v, 8);
  CHECK(end(0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(end(1) == doctest::Approx(0.5).epsilon(1e-15));

  // Exp(p, s v) is the geodesic from (p, v) evaluated at time s.
  Vector w(2);
  w << 0.4, 0.9;
  const auto path = geodesic_path(polar_connection, p, w, 512);
  for (double s : {0.25, 0.5, 1.0}) {
    const Vector e = exponential_map(polar_connection, p, s * w, 512);
    const auto& at = path[static_cast<std::size_t>(std::lround(s * 512))].position;
    CHECK((e - at).norm() <= 1e-9);
  }

  // Polar geodesics are straight lines in Cartesian coordinates.
  const Vector e = exponential_map(polar_connection, p, w, 256);
  const double cx = p(0) * std::cos(p(1)), cy = p(0) * std::sin(p(1));
  const double vx = w(0) * std::cos(p(1)) - p(0) * std::sin(p(1)) * w(1);
  const double vy = w(0) * std::sin(p(1)) + p(0) * std::cos(p(1)) * w(1);
  CHECK(e(0) * std::cos(e(1)) == doctest::Approx(cx + vx).epsilon(1e-9));
  CHECK(e(0) * std::sin(e(1)) == doctest::Approx(cy + vy).epsilon(1e-9));
}

TEST_CASE("exponential map: leaving the domain is a DomainExit") {
  const ChristoffelProvider conn = [](const Vector& x) {
    return gamma::gamma_connection(x, gamma::Chart::Original);
  };
  Vector p(2), v(2);
  p << 1.0, 1.0;
  v << -100.0, -100.0;
  CHECK_THROWS_AS(exponential_map(conn, p, v, 64), DomainExit);
}
