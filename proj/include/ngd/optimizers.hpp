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

// Natural-gradient update rules.
//
// With step size hl = h * lambda and delta = -hl (G + eps D)^{-1} dL:
//
//   ng               theta + delta
//   mid              theta - hl G(m)^{-1} dL(m),  m = theta + delta / 2
//   geo              theta + delta - 1/2 Gamma(delta, delta)
//   geo_f            theta - hl G^{-1} [dL + hl/2 G Gamma(p, p)],  p the previous velocity
//   geo_exact        Exp(theta, delta)
//   ng_exact         RK4 integration of the flow d theta/dt = -G^{-1} dL over [0, hl]
//   perturb          theta + delta - G^{-1} r_full(delta)
//   small_curvature  theta + delta - G^{-1} r_sc(delta)
//
// All solves use the same damped operator within a step. Corrections are
// dropped (the step falls back to ng) while eps exceeds the damping threshold.

#ifndef NGD_OPTIMIZERS_HPP
#define NGD_OPTIMIZERS_HPP

#include "ngd/objective.hpp"
#include "ngd/solver.hpp"

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace ngd {

enum class Method { Ng, Mid, Geo, GeoFast, GeoExact, NgExact, Perturb, SmallCurvature };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

struct StepOptions {
  CgConfig cg;
  DiagMode diag_mode = DiagMode::ExactProbes;
  bool adapt_damping = true;
  bool backtracking = true;
  int max_halvings = 10;
  /// RK4 substeps for the exponential map.
  int exp_substeps = 128;
  /// RK4 substeps per ng_exact step.
  int exact_ode_steps = 64;
  /// Objectives up to this dimension are solved densely.
  Index dense_limit = 64;

  void validate() const;
};

struct OptimizerState {
  Vector theta;
  std::optional<Vector> prev_delta;  // previous velocity, displacement / hl
  DampingState damping;
  double h_lambda = 1.0;
  int iter = 0;
};

struct StepReport {
  double loss_before = 0.0;
  double loss_after = 0.0;
  double step_norm = 0.0;
  int cg_iters = 0;
  double epsilon = 0.0;  // damping used by this step
  bool corrections_active = false;
  int backtrack_count = 0;
  double scale = 1.0;
  /// Second-order part of the accepted displacement (zero for first-order rules).
  Vector correction;
};

struct StepOutcome {
  OptimizerState state;
  StepReport report;
};

/// (G + eps D) at a fixed point, solved densely or by CG.
class DampedSystem {
 public:
  DampedSystem(const ManifoldObjective& obj, const Vector& theta, double epsilon,
               const StepOptions& opts);

  SolveResult solve(const Vector& rhs);
  Vector apply(const Vector& v) const;
  int cg_iters() const { return cg_iters_; }
  double epsilon() const { return damping_.epsilon; }

 private:
  const ManifoldObjective& obj_;
  Vector theta_;
  DampingState damping_;
  CgConfig cg_;
  Vector diag_;
  std::optional<Matrix> dense_;
  int cg_iters_ = 0;
};

struct BacktrackResult {
  double scale = 0.0;
  double loss_after = 0.0;
  int count = 0;  // rejected trials
};

/// Maps a step scale s to the trial point.
using TrialPoint = std::function<Vector(double)>;

/// Largest s in {1, 1/2, ..., 2^-max_halvings} with loss(trial(s)) < loss_before.
/// Points outside the domain count as rejections. Scale 0 when none qualifies.
BacktrackResult backtrack(const ManifoldObjective& obj, double loss_before, const TrialPoint& trial,
                          int max_halvings);
/// Trial points theta + s delta + s^2 correction.
BacktrackResult backtrack(const ManifoldObjective& obj, const Vector& theta, const Vector& delta,
                          const Vector& correction, int max_halvings);

StepOutcome step(Method method, const OptimizerState& state, const ManifoldObjective& obj,
                 const StepOptions& opts);

inline StepOutcome step_ng(const OptimizerState& s, const ManifoldObjective& o, const StepOptions& p) {
  return step(Method::Ng, s, o, p);
}
inline StepOutcome step_mid(const OptimizerState& s, const ManifoldObjective& o, const StepOptions& p) {
  return step(Method::Mid, s, o, p);
}
inline StepOutcome step_geo(const OptimizerState& s, const ManifoldObjective& o, const StepOptions& p) {
  return step(Method::Geo, s, o, p);
}
inline StepOutcome step_geo_fast(const OptimizerState& s, const ManifoldObjective& o,
                                 const StepOptions& p) {
  return step(Method::GeoFast, s, o, p);
}
inline StepOutcome step_riemannian_euler(const OptimizerState& s, const ManifoldObjective& o,
                                         const StepOptions& p) {
  return step(Method::GeoExact, s, o, p);
}
inline StepOutcome step_ng_exact(const OptimizerState& s, const ManifoldObjective& o,
                                 const StepOptions& p) {
  return step(Method::NgExact, s, o, p);
}
inline StepOutcome step_perturb(const OptimizerState& s, const ManifoldObjective& o,
                                const StepOptions& p) {
  return step(Method::Perturb, s, o, p);
}

/// Undamped natural-gradient vector field -G^{-1} dL.
Vector natural_gradient_field(const ManifoldObjective& obj, const Vector& theta,
                              const StepOptions& opts);

}  // namespace ngd

#endif  // NGD_OPTIMIZERS_HPP
