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
#include "ngd/network.hpp"
#include "ngd/network_io.hpp"
#include "ngd/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace ngd;
using namespace ngd::nn;
using ngd::testing::batch_for;
using ngd::testing::loss_of;
using ngd::testing::net_232;
using ngd::testing::random_vector;

namespace {

constexpr Loss::Kind kKinds[3] = {Loss::Kind::Squared, Loss::Kind::BinaryCE,
                                  Loss::Kind::MultiClassCE};

Network single_layer(Matrix w, Vector b, Activation act) {
  return Network({Layer{std::move(w), std::move(b), act}});
}

Network linear_one_layer(std::uint64_t seed) {
  return single_layer(ngd::testing::random_matrix(2, 3, seed), random_vector(2, seed + 1),
                      Activation::Identity);
}

}  // namespace

TEST_CASE("forward: affine, sigmoid and softmax closed forms") {
  Matrix w(1, 1);
  w << 2.0;
  Vector b(1);
  b << 1.0;
  Matrix x(1, 1);
  x << 3.0;
  CHECK(forward(single_layer(w, b, Activation::Identity), x)(0, 0) == 7.0);

  const Matrix xs = ngd::testing::random_matrix(4, 3, 11);
  const Matrix ys = forward(single_layer(Matrix::Zero(2, 3), Vector::Zero(2), Activation::Sigmoid), xs);
  CHECK((ys.array() == 0.5).all());

  const Matrix p = forward(single_layer(Matrix::Zero(3, 1), Vector::Zero(3), Activation::Softmax),
                           Matrix::Ones(1, 1));
  for (Index i = 0; i < 3; ++i) CHECK(p(0, i) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("forward: shape mismatch is reported") {
  const Network net = net_232(Loss::Kind::Squared, 1);
  CHECK_THROWS_AS(forward(net, Matrix::Zero(3, 5)), ShapeMismatch);
  CHECK_THROWS_AS(Network({Layer{Matrix::Zero(3, 2), Vector::Zero(3), Activation::Sigmoid},
                           Layer{Matrix::Zero(2, 4), Vector::Zero(2), Activation::Identity}}),
                  ShapeMismatch);
}

TEST_CASE("network: softmax only as final activation") {
  CHECK_THROWS_AS(Network({Layer{Matrix::Zero(3, 2), Vector::Zero(3), Activation::Softmax},
                           Layer{Matrix::Zero(2, 3), Vector::Zero(2), Activation::Identity}}),
                  ConfigError);
}

TEST_CASE("loss/activation pairing is enforced") {
  const Network sig = net_232(Loss::Kind::BinaryCE, 1);
  CHECK_THROWS_AS(validate_loss(sig, Loss::squared()), ConfigError);
  CHECK_THROWS_AS(validate_loss(sig, Loss::multi_class_ce()), ConfigError);
  CHECK_NOTHROW(validate_loss(sig, Loss::binary_ce()));
  CHECK_THROWS_AS(validate_loss(net_232(Loss::Kind::Squared, 1), Loss::squared(0.0)), ConfigError);
}

TEST_CASE("batch label validation") {
  const Network net = net_232(Loss::Kind::BinaryCE, 1);
  Batch b = batch_for(Loss::Kind::BinaryCE, 2, 2, 3, 5);
  CHECK_NOTHROW(validate_batch(net, Loss::binary_ce(), b));
  b.targets(0, 0) = 0.5;
  CHECK_THROWS_AS(validate_batch(net, Loss::binary_ce(), b), ConfigError);

  const Network soft = net_232(Loss::Kind::MultiClassCE, 1);
  Batch m = batch_for(Loss::Kind::MultiClassCE, 2, 2, 3, 5);
  CHECK_NOTHROW(validate_batch(soft, Loss::multi_class_ce(), m));
  m.targets.row(1).setOnes();
  CHECK_THROWS_AS(validate_batch(soft, Loss::multi_class_ce(), m), ConfigError);
}

TEST_CASE("flatten/unflatten: layout, length and round trip") {
  const Network net = net_232(Loss::Kind::Squared, 3);
  const Vector flat = net.flatten();
  CHECK(flat.size() == 17);
  CHECK(net.param_count() == 17);
  CHECK(flat(0) == net.layers()[0].weights(0, 0));
  CHECK(flat(1) == net.layers()[0].weights(0, 1));
  CHECK(flat(6) == net.layers()[0].bias(0));
  CHECK(net.unflatten(flat) == net);
  CHECK_THROWS_AS(net.unflatten(Vector::Zero(16)), LengthMismatch);
}

TEST_CASE("network JSON round trip and field errors") {
  const Network net = net_232(Loss::Kind::MultiClassCE, 4);
  const auto j = network_to_json(net);
  CHECK(j["layers"][1]["act"] == "softmax");
  CHECK(j["layers"][0]["w"].size() == 6);
  CHECK(network_from_json(j) == net);

  auto bad = j;
  bad["layers"][0].erase("b");
  CHECK_THROWS_WITH_AS(network_from_json(bad), doctest::Contains("layers[0].b"), ConfigError);
  bad = j;
  bad["layers"][1]["in"] = 4;
  CHECK_THROWS_AS(network_from_json(bad), ConfigError);
}

TEST_CASE("loss_and_grad: minimum, BCE value and finite differences") {
  // y = t exactly.
  const Network lin = linear_one_layer(7);
  Batch exact{ngd::testing::random_matrix(4, 3, 8), Matrix()};
  exact.targets = forward(lin, exact.inputs);
  const LossAndGrad zero = loss_and_grad(lin, Loss::squared(), exact);
  CHECK(zero.loss == 0.0);
  CHECK(zero.grad.norm() == 0.0);

  // y = 0.5, t = 1.
  const Network half = single_layer(Matrix::Zero(1, 1), Vector::Zero(1), Activation::Sigmoid);
  const Batch one{Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
  CHECK(loss_and_grad(half, Loss::binary_ce(), one).loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  for (Loss::Kind kind : kKinds) {
    CAPTURE(loss_name(kind));
    const Network net = net_232(kind, 21);
    const Batch batch = batch_for(kind, 2, 2, 6, 22);
    const Loss loss = loss_of(kind);
    const Vector g = loss_and_grad(net, loss, batch).grad;
    const Vector fd = oracle::fd_gradient(
        [&](const Vector& t) { return loss_value(net.unflatten(t), loss, batch); }, net.flatten());
    CHECK(oracle::rel_err(g, fd) <= 1e-6);
  }
}

TEST_CASE("rs_pass: zero direction, linear net and finite differences") {
  const Network net = net_232(Loss::Kind::BinaryCE, 31);
  const Matrix x = ngd::testing::random_matrix(5, 2, 32);
  const DirectionalPass z = rs_pass(net, x, Vector::Zero(17));
  CHECK(z.ry.norm() == 0.0);
  CHECK(z.sy.norm() == 0.0);
  CHECK(z.y == forward(net, x));

  const Network lin = linear_one_layer(33);
  const DirectionalPass l = rs_pass(lin, ngd::testing::random_matrix(4, 3, 34), random_vector(8, 35));
  CHECK(l.sy.norm() == 0.0);

  CHECK_THROWS_AS(rs_pass(net, x, Vector::Zero(16)), ShapeMismatch);

  for (Loss::Kind kind : kKinds) {
    CAPTURE(loss_name(kind));
    const Network n2 = net_232(kind, 36);
    const Vector v = random_vector(17, 37);
    const DirectionalPass p = rs_pass(n2, x, v);
    CHECK(oracle::rel_err(p.ry, oracle::fd_first_directional(n2, x, v, 1e-5)) <= 1e-6);
    CHECK(oracle::rel_err(p.sy, oracle::fd_second_directional(n2, x, v, 1e-3)) <= 1e-4);
  }
}

TEST_CASE("fisher_vp: zero, scalar closed form, brute force, symmetry and PSD") {
  const Network net = net_232(Loss::Kind::BinaryCE, 41);
  const Batch batch = batch_for(Loss::Kind::BinaryCE, 2, 2, 6, 42);
  CHECK(fisher_vp(net, Loss::binary_ce(), batch, Vector::Zero(17)).norm() == 0.0);

  // y = w x with a single sample: G = x^2 / sigma^2 on w, plus bias terms.
  Matrix w(1, 1);
  w << 0.3;
  const Network scalar = single_layer(w, Vector::Zero(1), Activation::Identity);
  const Batch single{Matrix::Constant(1, 1, 1.7), Matrix::Zero(1, 1)};
  Vector v(2);
  v << 0.9, 0.0;
  const Vector gv = fisher_vp(scalar, Loss::squared(2.0), single, v);
  CHECK(gv(0) == doctest::Approx(1.7 * 1.7 * 0.9 / 2.0).epsilon(1e-14));

  for (Loss::Kind kind : kKinds) {
    CAPTURE(loss_name(kind));
    const Network n2 = net_232(kind, 43);
    const Batch b2 = batch_for(kind, 2, 2, 6, 44);
    const Loss loss = loss_of(kind);
    const Matrix g = oracle::brute_fisher(n2, loss, b2);
    const Vector a = random_vector(17, 45), c = random_vector(17, 46);
    CHECK(oracle::rel_err(fisher_vp(n2, loss, b2, a), Vector(g * a)) <= 1e-5);

    const double ab = a.dot(fisher_vp(n2, loss, b2, c));
    const double ba = c.dot(fisher_vp(n2, loss, b2, a));
    CHECK(std::abs(ab - ba) <= 1e-10 * std::abs(ab));
    CHECK(a.dot(fisher_vp(n2, loss, b2, a)) >= -1e-12 * a.squaredNorm());

    Vector diag(17);
    for (Index i = 0; i < 17; ++i) diag(i) = fisher_vp(n2, loss, b2, Vector::Unit(17, i))(i);
    CHECK(oracle::rel_err(fisher_diagonal(n2, loss, b2), diag) <= 1e-12);
  }
}

TEST_CASE("connection_vp: brute force, quadratic scaling and polarization") {
  const Network lin = linear_one_layer(51);
  const Batch lb = batch_for(Loss::Kind::Squared, 3, 2, 4, 52);
  CHECK(connection_vp(lin, Loss::squared(), lb, random_vector(8, 53)).norm() == 0.0);

  for (Loss::Kind kind : kKinds) {
    CAPTURE(loss_name(kind));
    const Network net = net_232(kind, 54);
    const Batch batch = batch_for(kind, 2, 2, 5, 55);
    const Loss loss = loss_of(kind);
    const Vector v = random_vector(17, 56), w = random_vector(17, 57);
    CHECK(connection_vp(net, loss, batch, Vector::Zero(17)).norm() == 0.0);

    const Vector u = connection_vp(net, loss, batch, v);
    CHECK(u.norm() > 1e-3);
    CHECK(oracle::rel_err(u, oracle::brute_connection(net, loss, batch, v, v)) <= 1e-5);

    const Vector scaled = connection_vp(net, loss, batch, 2.5 * v);
    CHECK(oracle::rel_err(scaled, Vector(6.25 * u)) <= 1e-10);

    const Vector cross = connection_vp(net, loss, batch, v + w) - u - connection_vp(net, loss, batch, w);
    CHECK(oracle::rel_err(cross, Vector(2.0 * oracle::brute_connection(net, loss, batch, v, w))) <= 1e-5);
  }
}

TEST_CASE("term3_vp: zero, linear net and brute force") {
  const Network lin = linear_one_layer(61);
  const Batch lb = batch_for(Loss::Kind::Squared, 3, 2, 4, 62);
  CHECK(term3_vp(lin, Loss::squared(), lb, random_vector(8, 63)).norm() == 0.0);

  for (Loss::Kind kind : kKinds) {
    CAPTURE(loss_name(kind));
    const Network net = net_232(kind, 64);
    const Batch batch = batch_for(kind, 2, 2, 5, 65);
    const Loss loss = loss_of(kind);
    CHECK(term3_vp(net, loss, batch, Vector::Zero(17)).norm() == 0.0);
    const Vector v = random_vector(17, 66);
    CHECK(term3_vp(net, loss, batch, v).norm() > 1e-3);
    CHECK(oracle::rel_err(term3_vp(net, loss, batch, v), oracle::brute_term3(net, loss, batch, v)) <= 1e-4);
  }
}

TEST_CASE("second-order corrections: squared loss matches half the connection") {
  for (std::uint64_t seed = 70; seed < 75; ++seed) {
    const Network net = net_232(Loss::Kind::Squared, seed);
    const Batch batch = batch_for(Loss::Kind::Squared, 2, 2, 6, seed + 100);
    const Loss loss = Loss::squared(0.7);
    const Vector v = random_vector(17, seed + 200);
    const SecondOrderRhs r = second_order_rhs(net, loss, batch, v);
    const Vector half = 0.5 * connection_vp(net, loss, batch, v);
    CHECK(oracle::rel_err(r.small_curvature, half) <= 1e-12);
  }
}

TEST_CASE("second-order corrections: linear one-layer net vanishes") {
  const Network lin = linear_one_layer(81);
  const Batch b = batch_for(Loss::Kind::Squared, 3, 2, 4, 82);
  const SecondOrderRhs r = second_order_rhs(lin, Loss::squared(), b, random_vector(8, 83));
  CHECK(r.small_curvature.norm() == 0.0);
  CHECK(r.perturbation.norm() == 0.0);
}

TEST_CASE("second-order corrections: BCE z-level terms match the y-level composition") {
  // Reference terms rewritten in y through z = logit(y), from finite-difference
  // output Jacobians and Hessians.
  const Network net = net_232(Loss::Kind::BinaryCE, 91);
  const Batch batch = batch_for(Loss::Kind::BinaryCE, 2, 2, 5, 92);
  const Loss loss = Loss::binary_ce();
  const Vector v = random_vector(17, 93);

  const oracle::OutputDerivatives d = oracle::output_derivatives(net, batch.inputs, true);
  Vector small = Vector::Zero(17), full = Vector::Zero(17);
  for (Index s = 0; s < batch.inputs.rows(); ++s) {
    for (Index i = 0; i < 2; ++i) {
      const auto su = static_cast<std::size_t>(s);
      const double y = d.outputs(s, i), q = y * (1.0 - y);
      const double k2 = (2.0 * y - 1.0) / (q * q);
      const Vector j = d.jac[su].row(i).transpose();
      const Matrix& h = d.hess[su][static_cast<std::size_t>(i)];
      const double jv = j.dot(v), vhv = v.dot(h * v);
      const Vector hv = h * v;
      const Vector a = (1.0 / q) * jv * hv + k2 * jv * jv * j;
      const Vector b = 0.5 * ((1.0 / q) * vhv * j + k2 * jv * jv * j);
      const Vector c = ((1.0 / q) * hv + k2 * jv * j) * (y - batch.targets(s, i));
      small += b;
      full += a + b + c;
    }
  }
  small /= 5.0;
  full /= 5.0;
  const SecondOrderRhs r = second_order_rhs(net, loss, batch, v);
  CHECK(oracle::rel_err(r.small_curvature, small) <= 1e-4);
  CHECK((r.perturbation - r.small_curvature).norm() > 1e-3);
  CHECK(oracle::rel_err(r.perturbation, full) <= 1e-4);
}

TEST_CASE("output clamping raises underflow past the configured fraction") {
  Matrix w(1, 1);
  w << 100.0;
  const Network net = single_layer(w, Vector::Zero(1), Activation::Sigmoid);
  Batch b{Matrix::Ones(4, 1), Matrix::Ones(4, 1)};
  Loss loss = Loss::binary_ce();
  CHECK_THROWS_AS(loss_and_grad(net, loss, b), NumericalUnderflow);
  loss.max_clamped_fraction = 1.0;
  CHECK(std::isfinite(loss_and_grad(net, loss, b).loss));
}
