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

// Loss functions on a statistical manifold, as seen by the optimizers.

#ifndef NGD_OBJECTIVE_HPP
#define NGD_OBJECTIVE_HPP

#include "ngd/gamma_model.hpp"
#include "ngd/geometry.hpp"
#include "ngd/network.hpp"
#include "ngd/solver.hpp"

#include <optional>

namespace ngd {

class ManifoldObjective {
 public:
  virtual ~ManifoldObjective() = default;

  virtual Index dim() const = 0;
  /// Throws DomainError when theta is outside the parameter domain.
  virtual double loss(const Vector& theta) const = 0;
  virtual Vector grad(const Vector& theta) const = 0;
  virtual Vector metric_vp(const Vector& theta, const Vector& v) const = 0;
  /// u_nu = g_{nu mu} Gamma^mu_{ab} v^a v^b.
  virtual Vector connection_vp_lowered(const Vector& theta, const Vector& v) const = 0;

  virtual Vector metric_diagonal(const Vector& theta, DiagMode mode) const;
  /// Closed-form metric when cheap; otherwise callers probe metric_vp.
  virtual std::optional<Matrix> dense_metric(const Vector& /*theta*/) const { return std::nullopt; }

  virtual bool has_full_connection() const { return false; }
  /// Throws ConfigError unless has_full_connection().
  virtual ChristoffelTensor full_connection(const Vector& theta) const;

  virtual bool has_second_order_rhs() const { return false; }
  /// Throws ConfigError unless has_second_order_rhs().
  virtual nn::SecondOrderRhs second_order_rhs(const Vector& theta, const Vector& v) const;
};

class GammaObjective final : public ManifoldObjective {
 public:
  GammaObjective(gamma::GammaDataset data, gamma::Chart chart)
      : data_(std::move(data)), chart_(chart) {}

  gamma::Chart chart() const { return chart_; }

  Index dim() const override { return 2; }
  double loss(const Vector& theta) const override;
  Vector grad(const Vector& theta) const override;
  Vector metric_vp(const Vector& theta, const Vector& v) const override;
  Vector connection_vp_lowered(const Vector& theta, const Vector& v) const override;
  Vector metric_diagonal(const Vector& theta, DiagMode mode) const override;
  std::optional<Matrix> dense_metric(const Vector& theta) const override;
  bool has_full_connection() const override { return true; }
  ChristoffelTensor full_connection(const Vector& theta) const override;

 private:
  gamma::GammaDataset data_;
  gamma::Chart chart_;
};

class NetworkObjective final : public ManifoldObjective {
 public:
  /// Validates the loss/batch pairing up front.
  NetworkObjective(nn::Network architecture, nn::Loss loss, nn::Batch batch);

  const nn::Network& architecture() const { return net_; }
  const nn::Loss& loss_kind() const { return loss_; }
  const nn::Batch& batch() const { return batch_; }

  Index dim() const override { return net_.param_count(); }
  double loss(const Vector& theta) const override;
  Vector grad(const Vector& theta) const override;
  Vector metric_vp(const Vector& theta, const Vector& v) const override;
  Vector connection_vp_lowered(const Vector& theta, const Vector& v) const override;
  /// ExactProbes uses one backward pass per output unit instead of n probes.
  Vector metric_diagonal(const Vector& theta, DiagMode mode) const override;
  bool has_second_order_rhs() const override { return true; }
  nn::SecondOrderRhs second_order_rhs(const Vector& theta, const Vector& v) const override;

  Vector term3_vp(const Vector& theta, const Vector& v) const;

 private:
  nn::Network net_;
  nn::Loss loss_;
  nn::Batch batch_;
};

}  // namespace ngd

#endif  // NGD_OBJECTIVE_HPP
