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

#include "ngd/objective.hpp"

#include "ngd/errors.hpp"

namespace ngd {

Vector ManifoldObjective::metric_diagonal(const Vector& theta, DiagMode mode) const {
  return diag_estimate([&](const Vector& v) { return metric_vp(theta, v); }, dim(), mode);
}

ChristoffelTensor ManifoldObjective::full_connection(const Vector&) const {
  throw ConfigError("objective does not provide a full connection");
}

nn::SecondOrderRhs ManifoldObjective::second_order_rhs(const Vector&, const Vector&) const {
  throw ConfigError("objective does not provide second-order correction terms");
}

// ---------------------------------------------------------------------------

double GammaObjective::loss(const Vector& theta) const {
  return gamma::gamma_nll(theta, chart_, data_);
}

Vector GammaObjective::grad(const Vector& theta) const {
  return gamma::gamma_nll_grad(theta, chart_, data_);
}

Vector GammaObjective::metric_vp(const Vector& theta, const Vector& v) const {
  return gamma::gamma_metric(theta, chart_) * v;
}

Vector GammaObjective::connection_vp_lowered(const Vector& theta, const Vector& v) const {
  return gamma::gamma_metric(theta, chart_) * gamma::gamma_connection(theta, chart_).contract(v);
}

Vector GammaObjective::metric_diagonal(const Vector& theta, DiagMode mode) const {
  if (mode == DiagMode::Ones) return Vector::Ones(2);
  return gamma::gamma_metric(theta, chart_).diagonal();
}

std::optional<Matrix> GammaObjective::dense_metric(const Vector& theta) const {
  return gamma::gamma_metric(theta, chart_);
}

ChristoffelTensor GammaObjective::full_connection(const Vector& theta) const {
  return gamma::gamma_connection(theta, chart_);
}

// ---------------------------------------------------------------------------

NetworkObjective::NetworkObjective(nn::Network architecture, nn::Loss loss, nn::Batch batch)
    : net_(std::move(architecture)), loss_(loss), batch_(std::move(batch)) {
  nn::validate_batch(net_, loss_, batch_);
}

double NetworkObjective::loss(const Vector& theta) const {
  return nn::loss_value(net_.unflatten(theta), loss_, batch_);
}

Vector NetworkObjective::grad(const Vector& theta) const {
  return nn::loss_and_grad(net_.unflatten(theta), loss_, batch_).grad;
}

Vector NetworkObjective::metric_vp(const Vector& theta, const Vector& v) const {
  return nn::fisher_vp(net_.unflatten(theta), loss_, batch_, v);
}

Vector NetworkObjective::connection_vp_lowered(const Vector& theta, const Vector& v) const {
  return nn::connection_vp(net_.unflatten(theta), loss_, batch_, v);
}

Vector NetworkObjective::metric_diagonal(const Vector& theta, DiagMode mode) const {
  if (mode == DiagMode::Ones) return Vector::Ones(dim());
  return nn::fisher_diagonal(net_.unflatten(theta), loss_, batch_);
}

nn::SecondOrderRhs NetworkObjective::second_order_rhs(const Vector& theta, const Vector& v) const {
  return nn::second_order_rhs(net_.unflatten(theta), loss_, batch_, v);
}

Vector NetworkObjective::term3_vp(const Vector& theta, const Vector& v) const {
  return nn::term3_vp(net_.unflatten(theta), loss_, batch_, v);
}

}  // namespace ngd
