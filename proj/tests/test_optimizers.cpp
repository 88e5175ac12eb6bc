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

#include "fixtures.hpp"

#include "ngd/errors.hpp"
#include "ngd/gamma_model.hpp"
#include "ngd/objective.hpp"
#include "ngd/optimizers.hpp"
#include "ngd/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace ngd;
using ngd::testing::random_vector;

namespace {

// L = 1/2 (x - c)^T B (x - c) on a flat space with constant metric A.
class Quadratic final : public ManifoldObjective {
 public:
  Quadratic(Matrix a, Matrix b, Vector c) : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {}
  Index dim() const override { return c_.size(); }
  double loss(const Vector& x) const override { return 0.5 * (x - c_).dot(b_ * (x - c_)); }
  Vector grad(const Vector& x) const override { return b_ * (x - c_); }
  Vector metric_vp(const Vector&, const Vector& v) const override { return a_ * v; }
  Vector connection_vp_lowered(const Vector&, const Vector& v) const override {
    return Vector::Zero(v.size());
  }
  bool has_full_connection() const override { return true; }
  ChristoffelTensor full_connection(const Vector&) const override { return ChristoffelTensor(dim()); }

 private:
  Matrix a_, b_;
  Vector c_;
};

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Matrix spd(double a, double b, double c) {
  Matrix m(2, 2);
  m << a, b, b, c;
  return m;
}

const gamma::GammaDataset& fig2_data() {
  static const gamma::GammaDataset data = gamma::gamma_sample({20.0, 20.0}, 10000, 7);
  return data;
}

OptimizerState start(const Vector& theta, double hl, double epsilon, double threshold = 5.0) {
  OptimizerState s;
  s.theta = theta;
  s.h_lambda = hl;
  s.damping.epsilon = epsilon;
  s.damping.threshold = threshold;
  return s;
}

StepOptions exact_options() {
  StepOptions o;
  o.adapt_damping = false;
  o.backtracking = false;
  return o;
}

NetworkObjective network_objective(nn::Loss::Kind kind, std::uint64_t seed) {
  nn::Network net = ngd::testing::net_232(kind, seed);
  nn::Batch batch = ngd::testing::batch_for(kind, 2, 2, 8, seed + 500);
  return NetworkObjective(std::move(net), ngd::testing::loss_of(kind), std::move(batch));
}

NetworkObjective linear_objective(std::uint64_t seed) {
  nn::Network net({nn::Layer{ngd::testing::random_matrix(2, 3, seed), random_vector(2, seed + 1),
                             nn::Activation::Identity}});
  nn::Batch batch = ngd::testing::batch_for(nn::Loss::Kind::Squared, 3, 2, 6, seed + 2);
  return NetworkObjective(std::move(net), nn::Loss::squared(), std::move(batch));
}

double fit_slope(const std::vector<double>& h, const std::vector<double>& e) {
  const std::size_t n = h.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(h[i]) / n;
    my += std::log(e[i]) / n;
  }
  double num = 0, den = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (std::log(h[i]) - mx) * (std::log(e[i]) - my);
    den += (std::log(h[i]) - mx) * (std::log(h[i]) - mx);
  }
  return num / den;
}

}  // namespace

TEST_CASE("method names round trip") {
  for (Method m : {Method::Ng, Method::Mid, Method::Geo, Method::GeoFast, Method::GeoExact,
                   Method::NgExact, Method::Perturb, Method::SmallCurvature})
    CHECK(parse_method(method_name(m)) == m);
  CHECK_THROWS_AS(parse_method("adam"), ConfigError);
}

TEST_CASE("backtrack: full step, uphill and overshoot") {
  const Quadratic q(Matrix::Identity(1, 1), Matrix::Identity(1, 1), Vector::Zero(1));
  const Vector x = Vector::Ones(1);
  const BacktrackResult small = backtrack(q, x, Vector::Constant(1, -0.1), Vector::Zero(1), 10);
  CHECK(small.scale == 1.0);
  CHECK(small.count == 0);

  const BacktrackResult up = backtrack(q, x, Vector::Constant(1, 0.5), Vector::Zero(1), 10);
  CHECK(up.scale == 0.0);
  CHECK(up.count == 11);

  const BacktrackResult over = backtrack(q, x, Vector::Constant(1, -3.0), Vector::Zero(1), 10);
  CHECK(over.scale == 0.5);
  CHECK(over.count == 1);
  CHECK(over.loss_after == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("backtrack: the correction scales quadratically") {
  const Quadratic q(Matrix::Identity(1, 1), Matrix::Identity(1, 1), Vector::Zero(1));
  std::vector<double> seen;
  const TrialPoint trial = [&](double s) {
    seen.push_back(s);
    return Vector(Vector::Ones(1) + s * Vector::Constant(1, -3.0) + s * s * Vector::Constant(1, 1.0));
  };
  const BacktrackResult r = backtrack(q, 0.5, trial, 10);
  // s = 1 lands on -1 (rejected); s = 1/2 lands on -0.25 (accepted).
  CHECK(r.scale == 0.5);
  CHECK(r.loss_after == doctest::Approx(0.5 * 0.0625).epsilon(1e-15));
}

TEST_CASE("ng: identity metric is gradient descent; stationary point is fixed") {
  const Quadratic q(Matrix::Identity(2, 2), spd(2.0, 0.5, 1.0), vec2(1.0, -1.0));
  const OptimizerState s = start(vec2(0.3, 0.2), 0.25, 0.0);
  const StepOutcome o = step_ng(s, q, exact_options());
  CHECK(oracle::rel_err(o.state.theta, Vector(s.theta - 0.25 * q.grad(s.theta))) <= 1e-15);

  StepOptions bt;
  bt.adapt_damping = false;
  const StepOutcome fixed = step_ng(start(vec2(1.0, -1.0), 0.5, 0.0), q, bt);
  CHECK(fixed.state.theta == vec2(1.0, -1.0));
}

TEST_CASE("ng: Gamma loss decreases on the first step in every chart") {
  StepOptions opts;
  for (gamma::Chart c : gamma::kAllCharts) {
    CAPTURE(gamma::chart_name(c));
    const GammaObjective obj(fig2_data(), c);
    const Vector theta = gamma::from_base({1.0, 1.0}, c);
    const StepOutcome o = step_ng(start(theta, 0.5, 0.0), obj, opts);
    CHECK(o.report.loss_after < o.report.loss_before);
  }
}

TEST_CASE("ng: direction minimizes the damped quadratic model") {
  const GammaObjective obj(fig2_data(), gamma::Chart::Original);
  const Vector theta = vec2(1.3, 0.8);
  const double e = 0.7;
  const StepOutcome o = step_ng(start(theta, 1.0, e), obj, exact_options());
  Matrix a = gamma::gamma_metric(theta, gamma::Chart::Original);
  a.diagonal() *= 1.0 + e;
  const Vector want = -a.partialPivLu().solve(obj.grad(theta));
  CHECK(oracle::rel_err(Vector(o.state.theta - theta), want) <= 1e-10);
}

TEST_CASE("mid: equals RK2 on a constant-metric quadratic") {
  const Matrix a = spd(2.0, 0.3, 1.0), b = spd(1.0, -0.2, 3.0);
  const Vector c = vec2(0.5, -0.5);
  const Quadratic q(a, b, c);
  const Vector x0 = vec2(2.0, 1.0);
  const double h = 0.3;
  auto f = [&](const Vector& x) -> Vector { return -a.llt().solve(b * (x - c)); };
  const Vector rk2 = x0 + h * f(x0 + 0.5 * h * f(x0));
  const StepOutcome o = step_mid(start(x0, h, 0.0), q, exact_options());
  CHECK(oracle::rel_err(o.state.theta, rk2) <= 1e-14);
  CHECK(o.report.corrections_active);

  StepOptions bt;
  bt.adapt_damping = false;
  CHECK(step_mid(start(c, h, 0.0), q, bt).state.theta == c);
}

TEST_CASE("ng_exact: matches the closed-form flow when metric equals the Hessian") {
  const Matrix a = spd(2.0, 0.3, 1.0);
  const Vector c = vec2(0.5, -0.5);
  const Quadratic q(a, a, c);
  const Vector x0 = vec2(2.0, 1.0);
  StepOptions opts = exact_options();
  opts.exact_ode_steps = 64;
  const StepOutcome o = step_ng_exact(start(x0, 0.7, 0.0), q, opts);
  CHECK(oracle::rel_err(o.state.theta, Vector(c + std::exp(-0.7) * (x0 - c))) <= 1e-9);
}

TEST_CASE("geo: flat objective equals ng bit for bit over a damped, backtracked run") {
  const NetworkObjective obj = linear_objective(11);
  StepOptions opts;
  OptimizerState a = start(obj.architecture().flatten(), 1.0, 1.0);
  OptimizerState b = a;
  for (int k = 0; k < 8; ++k) {
    const StepOutcome ng = step_ng(a, obj, opts);
    const StepOutcome geo = step_geo(b, obj, opts);
    CHECK(geo.report.corrections_active);
    CHECK(ng.state.theta == geo.state.theta);
    CHECK(ng.state.damping.epsilon == geo.state.damping.epsilon);
    a = ng.state;
    b = geo.state;
  }
}

TEST_CASE("corrections switch off above the damping threshold") {
  const NetworkObjective obj = network_objective(nn::Loss::Kind::BinaryCE, 12);
  const OptimizerState s = start(obj.architecture().flatten(), 1.0, 6.0, 5.0);
  StepOptions opts;
  const StepOutcome ng = step_ng(s, obj, opts);
  for (Method m : {Method::Mid, Method::Geo, Method::GeoFast, Method::Perturb, Method::SmallCurvature}) {
    CAPTURE(method_name(m));
    OptimizerState with_prev = s;
    with_prev.prev_delta = random_vector(obj.dim(), 3);
    const StepOutcome o = step(m, with_prev, obj, opts);
    CHECK_FALSE(o.report.corrections_active);
    CHECK(o.state.theta == ng.state.theta);
  }
}

TEST_CASE("geo_f: first step and flat objective reduce to ng") {
  const NetworkObjective bce = network_objective(nn::Loss::Kind::BinaryCE, 13);
  StepOptions opts;
  const OptimizerState s = start(bce.architecture().flatten(), 1.0, 1.0);
  CHECK(step_geo_fast(s, bce, opts).state.theta == step_ng(s, bce, opts).state.theta);

  const NetworkObjective flat = linear_objective(14);
  OptimizerState a = start(flat.architecture().flatten(), 1.0, 1.0);
  OptimizerState b = a;
  for (int k = 0; k < 6; ++k) {
    a = step_ng(a, flat, opts).state;
    b = step_geo_fast(b, flat, opts).state;
    CHECK(a.theta == b.theta);
  }
}

TEST_CASE("geo_exact: zero gradient, flat metric and chart invariance") {
  const Quadratic q(spd(2.0, 0.3, 1.0), spd(1.0, -0.2, 3.0), vec2(0.5, -0.5));
  StepOptions opts = exact_options();
  CHECK(step_riemannian_euler(start(vec2(0.5, -0.5), 0.5, 0.0), q, opts).state.theta == vec2(0.5, -0.5));
  const OptimizerState s = start(vec2(2.0, 1.0), 0.5, 0.0);
  CHECK(oracle::rel_err(step_riemannian_euler(s, q, opts).state.theta, step_ng(s, q, opts).state.theta) <= 1e-14);

  opts.exp_substeps = 128;
  const Vector base = vec2(1.0, 1.0);
  const GammaObjective orig(fig2_data(), gamma::Chart::Original);
  const Vector ref = step_riemannian_euler(start(base, 0.5, 0.0), orig, opts).state.theta;
  for (gamma::Chart c : gamma::kAllCharts) {
    CAPTURE(gamma::chart_name(c));
    const GammaObjective obj(fig2_data(), c);
    const Vector p = gamma::from_base({1.0, 1.0}, c);
    const Vector next = step_riemannian_euler(start(p, 0.5, 0.0), obj, opts).state.theta;
    CHECK(oracle::rel_err(gamma::reparam(next, c, gamma::Chart::Original), ref) <= 1e-5);
  }

  const NetworkObjective net = linear_objective(15);
  CHECK_THROWS_AS(step_riemannian_euler(start(net.architecture().flatten(), 1.0, 0.0), net, opts),
                  ConfigError);
}

TEST_CASE("geo differs from Riemannian Euler at third order in h") {
  const GammaObjective obj(fig2_data(), gamma::Chart::Original);
  StepOptions opts = exact_options();
  opts.exp_substeps = 256;
  std::vector<double> hs, errs;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256}) {
    const OptimizerState s = start(vec2(1.0, 1.0), h, 0.0);
    const Vector geo = step_geo(s, obj, opts).state.theta;
    const Vector exact = step_riemannian_euler(s, obj, opts).state.theta;
    hs.push_back(h);
    errs.push_back((geo - exact).norm());
  }
  CHECK(fit_slope(hs, errs) == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("small-curvature correction equals the geodesic correction for squared loss") {
  StepOptions opts;
  opts.backtracking = false;
  opts.adapt_damping = false;
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const NetworkObjective obj = network_objective(nn::Loss::Kind::Squared, seed);
    const OptimizerState s = start(obj.architecture().flatten(), 1.0, 1.0);
    const Vector geo = step_geo(s, obj, opts).report.correction;
    const Vector sc = step(Method::SmallCurvature, s, obj, opts).report.correction;
    CHECK(geo.norm() > 1e-6);
    CHECK(oracle::rel_err(sc, geo) <= 1e-8);
  }
}

TEST_CASE("perturbation corrections vanish on a one-layer linear net") {
  StepOptions opts;
  opts.backtracking = false;
  opts.adapt_damping = false;
  const NetworkObjective obj = linear_objective(30);
  const OptimizerState s = start(obj.architecture().flatten(), 1.0, 1.0);
  CHECK(step_perturb(s, obj, opts).report.correction.norm() == 0.0);
  CHECK(step(Method::SmallCurvature, s, obj, opts).report.correction.norm() == 0.0);
}

TEST_CASE("BCE: small-curvature and geodesic corrections differ") {
  StepOptions opts;
  opts.backtracking = false;
  opts.adapt_damping = false;
  for (std::uint64_t seed = 40; seed < 45; ++seed) {
    const NetworkObjective obj = network_objective(nn::Loss::Kind::BinaryCE, seed);
    const OptimizerState s = start(obj.architecture().flatten(), 1.0, 1.0);
    const Vector geo = step_geo(s, obj, opts).report.correction;
    const Vector sc = step(Method::SmallCurvature, s, obj, opts).report.correction;
    CHECK((sc - geo).norm() > 1e-6);
  }
}

TEST_CASE("accepted steps always decrease the loss; damping adapts") {
  for (Method m : {Method::Ng, Method::Mid, Method::Geo, Method::GeoFast, Method::Perturb,
                   Method::SmallCurvature}) {
    CAPTURE(method_name(m));
    const NetworkObjective obj = network_objective(nn::Loss::Kind::MultiClassCE, 50);
    OptimizerState s = start(obj.architecture().flatten(), 1.0, 45.0);
    StepOptions opts;
    opts.dense_limit = 0;  // exercise CG
    for (int k = 0; k < 15; ++k) {
      const StepOutcome o = step(m, s, obj, opts);
      if (o.report.scale > 0.0) CHECK(o.report.loss_after < o.report.loss_before);
      else CHECK(o.state.theta == s.theta);
      CHECK(o.report.backtrack_count >= 0);
      s = o.state;
    }
    CHECK(s.damping.epsilon < 45.0);
  }
}

TEST_CASE("step rejects mismatched state") {
  const Quadratic q(Matrix::Identity(2, 2), Matrix::Identity(2, 2), Vector::Zero(2));
  CHECK_THROWS_AS(step_ng(start(Vector::Zero(3), 1.0, 0.0), q, {}), LengthMismatch);
  CHECK_THROWS_AS(step_ng(start(Vector::Zero(2), 0.0, 0.0), q, {}), ConfigError);
}
