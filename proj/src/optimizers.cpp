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

#include "ngd/optimizers.hpp"

#include "ngd/errors.hpp"

#include <cmath>
#include <string>

namespace ngd {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Ng: return "ng";
    case Method::Mid: return "mid";
    case Method::Geo: return "geo";
    case Method::GeoFast: return "geo_f";
    case Method::GeoExact: return "geo_exact";
    case Method::NgExact: return "ng_exact";
    case Method::Perturb: return "perturb";
    case Method::SmallCurvature: return "small_curvature";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::Ng, Method::Mid, Method::Geo, Method::GeoFast, Method::GeoExact,
                   Method::NgExact, Method::Perturb, Method::SmallCurvature})
    if (method_name(m) == name) return m;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

void StepOptions::validate() const {
  cg.validate();
  if (max_halvings < 0) throw ConfigError("max_halvings must be >= 0");
  if (exp_substeps < 1) throw ConfigError("exp_substeps must be >= 1");
  if (exact_ode_steps < 1) throw ConfigError("exact_ode_steps must be >= 1");
  if (dense_limit < 0) throw ConfigError("dense_limit must be >= 0");
}

// ---------------------------------------------------------------------------

DampedSystem::DampedSystem(const ManifoldObjective& obj, const Vector& theta, double epsilon,
                           const StepOptions& opts)
    : obj_(obj), theta_(theta), cg_(opts.cg) {
  damping_.epsilon = epsilon;
  const Index n = obj.dim();
  if (n <= opts.dense_limit) {
    dense_ = obj.dense_metric(theta);
    if (!dense_)
      dense_ = dense_from_matvec([&](const Vector& v) { return obj.metric_vp(theta, v); }, n);
  }
  if (epsilon == 0.0) {
    diag_ = Vector::Zero(n);
  } else if (dense_ && opts.diag_mode == DiagMode::ExactProbes) {
    diag_ = dense_->diagonal();
  } else {
    diag_ = obj.metric_diagonal(theta, opts.diag_mode);
  }
}

SolveResult DampedSystem::solve(const Vector& rhs) {
  if (dense_) return dense_damped_solve(*dense_, diag_, rhs, damping_.epsilon);
  SolveResult r = damped_solve([&](const Vector& v) { return obj_.metric_vp(theta_, v); }, diag_,
                               rhs, damping_, cg_);
  cg_iters_ += r.iters;
  return r;
}

Vector DampedSystem::apply(const Vector& v) const {
  Vector out = dense_ ? Vector(*dense_ * v) : obj_.metric_vp(theta_, v);
  if (damping_.epsilon != 0.0) out += damping_.epsilon * diag_.cwiseProduct(v);
  return out;
}

// ---------------------------------------------------------------------------

BacktrackResult backtrack(const ManifoldObjective& obj, double loss_before, const TrialPoint& trial,
                          int max_halvings) {
  BacktrackResult out{0.0, loss_before, 0};
  double scale = 1.0;
  for (int k = 0; k <= max_halvings; ++k, scale *= 0.5) {
    double trial_loss;
    try {
      trial_loss = obj.loss(trial(scale));
    } catch (const DomainError&) {
      trial_loss = NAN;
    } catch (const DomainExit&) {
      trial_loss = NAN;
    } catch (const NumericalUnderflow&) {
      trial_loss = NAN;
    }
    if (std::isfinite(trial_loss) && trial_loss < loss_before) {
      out.scale = scale;
      out.loss_after = trial_loss;
      return out;
    }
    ++out.count;
  }
  return out;
}

BacktrackResult backtrack(const ManifoldObjective& obj, const Vector& theta, const Vector& delta,
                          const Vector& correction, int max_halvings) {
  return backtrack(
      obj, obj.loss(theta),
      [&](double s) -> Vector { return theta + s * delta + (s * s) * correction; }, max_halvings);
}

Vector natural_gradient_field(const ManifoldObjective& obj, const Vector& theta,
                              const StepOptions& opts) {
  DampedSystem sys(obj, theta, 0.0, opts);
  return -sys.solve(obj.grad(theta)).solution;
}

namespace {

bool uses_corrections(Method m) {
  return m == Method::Mid || m == Method::Geo || m == Method::GeoFast || m == Method::Perturb ||
         m == Method::SmallCurvature;
}

// A proposed step: trial(s) gives the point for scale s; `delta` and
// `correction` describe trial(1) - theta split into first- and second-order parts.
struct Proposal {
  TrialPoint trial;
  Vector delta;
  Vector correction;
};

Proposal affine_proposal(const Vector& theta, Vector delta, Vector correction) {
  Proposal p;
  p.delta = std::move(delta);
  p.correction = std::move(correction);
  p.trial = [theta, d = p.delta, c = p.correction](double s) -> Vector {
    return theta + s * d + (s * s) * c;
  };
  return p;
}

StepOutcome ng_exact_step(const OptimizerState& state, const ManifoldObjective& obj,
                          const StepOptions& opts) {
  StepOutcome out{state, {}};
  StepReport& rep = out.report;
  rep.loss_before = obj.loss(state.theta);
  rep.epsilon = 0.0;
  const VectorField field = [&](double, const Vector& x) {
    try {
      return natural_gradient_field(obj, x, opts);
    } catch (const DomainError& e) {
      throw DomainExit(std::string("ng_exact left the domain: ") + e.what());
    }
  };
  const Vector next = rk4_integrate(field, state.theta, 0.0, state.h_lambda, opts.exact_ode_steps);
  rep.loss_after = obj.loss(next);
  rep.step_norm = (next - state.theta).norm();
  rep.correction = Vector::Zero(obj.dim());
  out.state.prev_delta = (next - state.theta) / state.h_lambda;
  out.state.theta = next;
  out.state.iter += 1;
  return out;
}

}  // namespace

StepOutcome step(Method method, const OptimizerState& state, const ManifoldObjective& obj,
                 const StepOptions& opts) {
  if (state.theta.size() != obj.dim())
    throw LengthMismatch("theta has length " + std::to_string(state.theta.size()) +
                         ", objective dimension is " + std::to_string(obj.dim()));
  if (!(state.h_lambda > 0.0)) throw ConfigError("h_lambda must be > 0");
  if (state.prev_delta && state.prev_delta->size() != obj.dim())
    throw LengthMismatch("prev_delta length != objective dimension");
  if (method == Method::NgExact) return ng_exact_step(state, obj, opts);
  if (method == Method::GeoExact && !obj.has_full_connection())
    throw ConfigError("geo_exact needs an objective with a full connection");
  if ((method == Method::Perturb || method == Method::SmallCurvature) && !obj.has_second_order_rhs())
    throw ConfigError(std::string(method_name(method)) + " needs a network objective");

  const Vector& theta = state.theta;
  const double hl = state.h_lambda;
  const double eps = state.damping.epsilon;
  const Index n = obj.dim();

  StepOutcome out{state, {}};
  StepReport& rep = out.report;
  rep.epsilon = eps;
  rep.loss_before = obj.loss(theta);
  const bool active = uses_corrections(method) && eps <= state.damping.threshold;
  rep.corrections_active = active;

  DampedSystem sys(obj, theta, eps, opts);
  const Vector g = obj.grad(theta);
  if (!g.allFinite()) throw NonFiniteState("gradient is not finite");
  int extra_cg = 0;

  Proposal prop;
  const Vector zero = Vector::Zero(n);
  if (method == Method::GeoFast) {
    Vector rhs = -g;
    if (active && state.prev_delta) rhs -= (0.5 * hl) * obj.connection_vp_lowered(theta, *state.prev_delta);
    prop = affine_proposal(theta, hl * sys.solve(rhs).solution, zero);
  } else {
    const Vector delta = -hl * sys.solve(g).solution;
    if (!active && method != Method::GeoExact) {
      prop = affine_proposal(theta, delta, zero);
    } else {
      switch (method) {
        case Method::Mid: {
          const Vector half = theta + 0.5 * delta;
          Vector g_half;
          try {
            g_half = obj.grad(half);
          } catch (const DomainError& e) {
            throw DomainExit(std::string("midpoint left the domain: ") + e.what());
          }
          DampedSystem sys_half(obj, half, eps, opts);
          const Vector full = -hl * sys_half.solve(g_half).solution;
          extra_cg += sys_half.cg_iters();
          prop = affine_proposal(theta, full, zero);
          break;
        }
        case Method::Geo: {
          const Vector c = -0.5 * sys.solve(obj.connection_vp_lowered(theta, delta)).solution;
          prop = affine_proposal(theta, delta, c);
          break;
        }
        case Method::Perturb:
        case Method::SmallCurvature: {
          const nn::SecondOrderRhs rhs = obj.second_order_rhs(theta, delta);
          const Vector& r = method == Method::Perturb ? rhs.perturbation : rhs.small_curvature;
          prop = affine_proposal(theta, delta, -sys.solve(r).solution);
          break;
        }
        case Method::GeoExact: {
          const ChristoffelProvider conn = [&obj](const Vector& x) { return obj.full_connection(x); };
          const int substeps = opts.exp_substeps;
          prop.delta = delta;
          prop.correction = zero;
          prop.trial = [conn, theta, delta, substeps](double s) -> Vector {
            return exponential_map(conn, theta, s * delta, substeps);
          };
          break;
        }
        default:
          prop = affine_proposal(theta, delta, zero);
      }
    }
  }

  BacktrackResult bt;
  if (opts.backtracking) {
    bt = backtrack(obj, rep.loss_before, prop.trial, opts.max_halvings);
  } else {
    bt.scale = 1.0;
    try {
      bt.loss_after = obj.loss(prop.trial(1.0));
    } catch (const DomainError& e) {
      throw DomainExit(std::string(method_name(method)) + " step left the domain: " + e.what());
    }
    if (!std::isfinite(bt.loss_after)) throw NonFiniteState("loss is not finite after the step");
  }

  const Vector next = bt.scale > 0.0 ? prop.trial(bt.scale) : theta;
  const Vector disp = next - theta;
  rep.scale = bt.scale;
  rep.backtrack_count = bt.count;
  rep.loss_after = bt.scale > 0.0 ? bt.loss_after : rep.loss_before;
  rep.step_norm = disp.norm();
  rep.correction = (bt.scale * bt.scale) * prop.correction;

  if (opts.adapt_damping) {
    double rho = 0.0;
    if (bt.scale > 0.0) {
      const double predicted = -(0.5 * disp.dot(sys.apply(disp)) + g.dot(disp));
      const double actual = rep.loss_before - rep.loss_after;
      rho = predicted > 0.0 ? actual / predicted : 0.0;
      if (!std::isfinite(rho)) rho = 0.0;
    }
    out.state.damping = marquardt_adapt(state.damping, rho);
  }
  rep.cg_iters = sys.cg_iters() + extra_cg;

  out.state.theta = next;
  out.state.prev_delta = disp / hl;
  out.state.iter += 1;
  return out;
}

}  // namespace ngd
