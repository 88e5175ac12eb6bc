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

#include "ngd/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace ngd::oracle {

namespace {

// Weights of the five-point first-derivative stencil at offsets -2h..2h.
constexpr double kStencil[4] = {1.0, -8.0, 8.0, -1.0};
constexpr double kOffsets[4] = {-2.0, -1.0, 1.0, 2.0};

Vector flat_outputs(const nn::Network& arch, const Matrix& inputs, const Vector& theta) {
  const Matrix y = nn::forward(arch.unflatten(theta), inputs);
  Vector out(y.size());
  for (Index s = 0; s < y.rows(); ++s)
    for (Index i = 0; i < y.cols(); ++i) out(s * y.cols() + i) = y(s, i);
  return out;
}

struct Coefficients {
  double metric, first, second;
};

// Loss coefficient families in terms of the post-activation output y.
Coefficients coefficients(const nn::Loss& loss, double y) {
  switch (loss.kind) {
    case nn::Loss::Kind::Squared:
      return {1.0 / loss.sigma2, 1.0 / loss.sigma2, 0.0};
    case nn::Loss::Kind::BinaryCE: {
      const double q = y * (1.0 - y);
      return {1.0 / q, 1.0 / q, (2.0 * y - 1.0) / (2.0 * q * q)};
    }
    case nn::Loss::Kind::MultiClassCE:
      return {1.0 / y, 1.0 / y, -1.0 / (2.0 * y * y)};
  }
  return {0, 0, 0};
}

}  // namespace

Vector fd_gradient(const ScalarFn& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    double acc = 0.0;
    for (int k = 0; k < 4; ++k) {
      Vector xp = x;
      xp(j) += kOffsets[k] * h;
      acc += kStencil[k] * f(xp);
    }
    g(j) = acc / (12.0 * h);
  }
  return g;
}

Matrix fd_jacobian(const VectorFn& f, const Vector& x, double h) {
  Matrix jac;
  for (Index j = 0; j < x.size(); ++j) {
    Vector acc;
    for (int k = 0; k < 4; ++k) {
      Vector xp = x;
      xp(j) += kOffsets[k] * h;
      const Vector fx = f(xp);
      if (acc.size() == 0) acc = Vector::Zero(fx.size());
      acc += kStencil[k] * fx;
    }
    if (jac.size() == 0) jac.resize(acc.size(), x.size());
    jac.col(j) = acc / (12.0 * h);
  }
  return jac;
}

Matrix fd_first_directional(const nn::Network& net, const Matrix& inputs, const Vector& v,
                            double eps) {
  const Vector theta = net.flatten();
  return (nn::forward(net.unflatten(theta + eps * v), inputs) -
          nn::forward(net.unflatten(theta - eps * v), inputs)) /
         (2.0 * eps);
}

Matrix fd_second_directional(const nn::Network& net, const Matrix& inputs, const Vector& v,
                             double eps) {
  const Vector theta = net.flatten();
  return (nn::forward(net.unflatten(theta + eps * v), inputs) - 2.0 * nn::forward(net, inputs) +
          nn::forward(net.unflatten(theta - eps * v), inputs)) /
         (eps * eps);
}

OutputDerivatives output_derivatives(const nn::Network& net, const Matrix& inputs,
                                     bool with_hessians) {
  const Vector theta = net.flatten();
  const Index n = inputs.rows(), out = net.output_dim(), p = theta.size();
  const VectorFn f = [&](const Vector& t) { return flat_outputs(net, inputs, t); };

  OutputDerivatives d;
  d.outputs = nn::forward(net, inputs);
  const Matrix jac = fd_jacobian(f, theta, 1e-4);
  for (Index s = 0; s < n; ++s) d.jac.push_back(jac.middleRows(s * out, out));

  if (with_hessians) {
    // Column j of every Hessian is the derivative of the Jacobian along e_j.
    const VectorFn jac_flat = [&](const Vector& t) {
      const Matrix j = fd_jacobian(f, t, 1e-4);
      return Vector(Eigen::Map<const Vector>(j.data(), j.size()));
    };
    const Matrix dj = fd_jacobian(jac_flat, theta, 1e-3);  // (n*out*p) x p
    d.hess.assign(static_cast<std::size_t>(n), std::vector<Matrix>(static_cast<std::size_t>(out)));
    for (Index s = 0; s < n; ++s) {
      for (Index i = 0; i < out; ++i) {
        Matrix h(p, p);
        for (Index a = 0; a < p; ++a)
          for (Index b = 0; b < p; ++b) h(a, b) = dj(a * n * out + s * out + i, b);
        d.hess[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)] = 0.5 * (h + h.transpose());
      }
    }
  }
  return d;
}

Matrix brute_fisher(const nn::Network& net, const nn::Loss& loss, const nn::Batch& batch) {
  const OutputDerivatives d = output_derivatives(net, batch.inputs, false);
  const Index p = net.param_count();
  Matrix g = Matrix::Zero(p, p);
  for (Index s = 0; s < batch.inputs.rows(); ++s) {
    for (Index i = 0; i < net.output_dim(); ++i) {
      const Vector j = d.jac[static_cast<std::size_t>(s)].row(i).transpose();
      g += coefficients(loss, d.outputs(s, i)).metric * j * j.transpose();
    }
  }
  return g / static_cast<double>(batch.inputs.rows());
}

Vector brute_connection(const nn::Network& net, const nn::Loss& loss, const nn::Batch& batch,
                        const Vector& v, const Vector& w) {
  const OutputDerivatives d = output_derivatives(net, batch.inputs, true);
  Vector u = Vector::Zero(net.param_count());
  for (Index s = 0; s < batch.inputs.rows(); ++s) {
    for (Index i = 0; i < net.output_dim(); ++i) {
      const auto su = static_cast<std::size_t>(s);
      const Vector j = d.jac[su].row(i).transpose();
      const Matrix& h = d.hess[su][static_cast<std::size_t>(i)];
      const Coefficients c = coefficients(loss, d.outputs(s, i));
      u += (c.first * v.dot(h * w) + c.second * j.dot(v) * j.dot(w)) * j;
    }
  }
  return u / static_cast<double>(batch.inputs.rows());
}

Vector brute_term3(const nn::Network& net, const nn::Loss& loss, const nn::Batch& batch,
                   const Vector& v) {
  const OutputDerivatives d = output_derivatives(net, batch.inputs, true);
  Vector u = Vector::Zero(net.param_count());
  for (Index s = 0; s < batch.inputs.rows(); ++s) {
    for (Index i = 0; i < net.output_dim(); ++i) {
      const auto su = static_cast<std::size_t>(s);
      const Vector j = d.jac[su].row(i).transpose();
      const Matrix& h = d.hess[su][static_cast<std::size_t>(i)];
      u += coefficients(loss, d.outputs(s, i)).metric * j.dot(v) * (h * v);
    }
  }
  return u / static_cast<double>(batch.inputs.rows());
}

double rel_err(const Vector& a, const Vector& b, double floor) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(b.lpNorm<Eigen::Infinity>(), floor);
}

double rel_err(const Matrix& a, const Matrix& b, double floor) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(b.lpNorm<Eigen::Infinity>(), floor);
}

}  // namespace ngd::oracle
