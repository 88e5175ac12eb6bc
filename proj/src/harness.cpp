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

#include "ngd/harness.hpp"

#include "ngd/csv.hpp"
#include "ngd/errors.hpp"
#include "ngd/objective.hpp"
#include "ngd/optimizers.hpp"
#include "ngd/rng.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace ngd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double x) { return std::isnan(x) ? std::string() : csv::format_double(x); }

std::string error_status(const Error& e) { return "error:" + e.kind(); }

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  long long micros() const {
    if (!enabled_) return 0;
    return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() -
                                                                 start_)
        .count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

OptimizerState initial_state(const ExperimentConfig& cfg, Vector theta) {
  OptimizerState s;
  s.theta = std::move(theta);
  s.damping = cfg.damping;
  s.h_lambda = cfg.h_lambda;
  return s;
}

Vector base_coords(const Vector& theta, gamma::Chart chart) {
  const gamma::GammaParams p = gamma::to_base(theta, chart);
  Vector v(2);
  v << p.shape, p.rate;
  return v;
}

RunRow error_row(const std::string& experiment, const std::string& method, const std::string& chart,
                 int iteration, const Error& e) {
  RunRow r{experiment, method, chart, iteration, kNaN, kNaN, kNaN, kNaN, kNaN, 0, error_status(e)};
  return r;
}

// Runs one (method, objective) cell; `coords` maps theta to the two logged coordinates.
template <typename Coords>
void run_cell(const ExperimentConfig& cfg, Method method, const std::string& chart,
              const ManifoldObjective& obj, OptimizerState state, Coords coords,
              std::vector<RunRow>& rows) {
  const std::string exp(experiment_name(cfg.experiment));
  const std::string name(method_name(method));
  try {
    const Vector c = coords(state.theta);
    rows.push_back({exp, name, chart, 0, c(0), c(1), obj.loss(state.theta), 0.0,
                    state.damping.epsilon, 0, "ok"});
  } catch (const Error& e) {
    rows.push_back(error_row(exp, name, chart, 0, e));
    return;
  }
  for (int k = 1; k <= cfg.iters; ++k) {
    try {
      const Stopwatch clock(cfg.record_wall_time);
      const StepOutcome o = step(method, state, obj, cfg.step);
      const long long micros = clock.micros();
      if (!std::isfinite(o.report.loss_after)) throw NonFiniteState("loss is not finite");
      state = o.state;
      const Vector c = coords(state.theta);
      RunRow r{exp, name, chart, k, c(0), c(1), o.report.loss_after, o.report.step_norm,
               o.report.epsilon, micros, "ok"};
      r.cg_iters = o.report.cg_iters;
      r.backtracks = o.report.backtrack_count;
      rows.push_back(std::move(r));
    } catch (const Error& e) {
      rows.push_back(error_row(exp, name, chart, k, e));
      return;
    }
  }
}

}  // namespace

gamma::GammaDataset make_gamma_data(const ExperimentConfig& cfg) {
  return gamma::gamma_sample({cfg.data.shape, cfg.data.rate}, cfg.data.n, cfg.seed);
}

NetworkProblem make_network_problem(const ExperimentConfig& cfg) {
  const NetSpec& spec = cfg.net;
  NetworkProblem p{nn::Network::random(spec.sizes, spec.activations, cfg.seed), spec.loss, {}};
  const Index n = static_cast<Index>(spec.samples);
  const Index in = spec.sizes.front(), out = spec.sizes.back();
  Rng rng(cfg.seed + 1);
  p.batch.inputs.resize(n, in);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < in; ++j) p.batch.inputs(i, j) = rng.uniform(-1.0, 1.0);

  if (spec.task == NetTask::Autoencoder) {
    p.batch.targets = p.batch.inputs;
  } else {
    const nn::Network teacher = nn::Network::random(spec.sizes, spec.activations, cfg.seed + 2);
    const Matrix y = nn::forward(teacher, p.batch.inputs);
    p.batch.targets.setZero(n, out);
    for (Index i = 0; i < n; ++i) {
      switch (spec.loss.kind) {
        case nn::Loss::Kind::Squared:
          for (Index j = 0; j < out; ++j) p.batch.targets(i, j) = y(i, j) + spec.noise * rng.normal();
          break;
        case nn::Loss::Kind::BinaryCE:
          for (Index j = 0; j < out; ++j) p.batch.targets(i, j) = rng.uniform() < y(i, j) ? 1.0 : 0.0;
          break;
        case nn::Loss::Kind::MultiClassCE: {
          double u = rng.uniform();
          Index j = 0;
          while (j + 1 < out && u >= y(i, j)) u -= y(i, j++);
          p.batch.targets(i, j) = 1.0;
          break;
        }
      }
    }
  }
  nn::validate_batch(p.init, p.loss, p.batch);
  return p;
}

std::vector<RunRow> run_invariance(const ExperimentConfig& cfg) {
  const gamma::GammaDataset data = make_gamma_data(cfg);
  std::vector<RunRow> rows;
  for (Method m : cfg.methods) {
    for (gamma::Chart chart : cfg.charts) {
      const GammaObjective obj(data, chart);
      const Vector start = gamma::from_base({cfg.data.init_shape, cfg.data.init_rate}, chart);
      run_cell(cfg, m, std::string(gamma::chart_name(chart)), obj, initial_state(cfg, start),
               [chart](const Vector& t) { return base_coords(t, chart); }, rows);
    }
  }
  return rows;
}

double loglog_slope(const std::vector<double>& h, const std::vector<double>& err) {
  const std::size_t n = h.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(h[i]);
    my += std::log(err[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(h[i]) - mx;
    num += dx * (std::log(err[i]) - my);
    den += dx * dx;
  }
  return num / den;
}

std::vector<OrderRow> run_order_study(const ExperimentConfig& cfg) {
  const gamma::Chart chart = cfg.charts.front();
  const GammaObjective obj(make_gamma_data(cfg), chart);
  const Vector start = gamma::from_base({cfg.data.init_shape, cfg.data.init_rate}, chart);

  auto run_to_horizon = [&](Method m, double h, int n) {
    OptimizerState s = initial_state(cfg, start);
    s.h_lambda = h;
    for (int k = 0; k < n; ++k) s = step(m, s, obj, cfg.step).state;
    return base_coords(s.theta, chart);
  };

  StepOptions dense = cfg.step;
  dense.exact_ode_steps = cfg.order.reference_steps;
  OptimizerState ref_state = initial_state(cfg, start);
  ref_state.h_lambda = cfg.order.horizon;
  const Vector reference = base_coords(step(Method::NgExact, ref_state, obj, dense).state.theta, chart);

  struct Series {
    std::string name;
    Method method;
    bool against_exp;
    std::vector<double> h, err;
  };
  std::vector<Series> series;
  for (Method m : cfg.methods) {
    const std::string name(method_name(m));
    if (m != Method::Mid) series.push_back({name + "/geo_exact", m, true, {}, {}});
    if (m == Method::Mid || m == Method::Ng) series.push_back({name + "/ng_exact", m, false, {}, {}});
  }

  for (int j = cfg.order.log2_h_min; j <= cfg.order.log2_h_max; ++j) {
    const double h = std::ldexp(1.0, -j);
    const int n = static_cast<int>(std::lround(cfg.order.horizon / h));
    bool need_exp = false;
    for (const Series& s : series) need_exp |= s.against_exp;
    const Vector euler = need_exp ? run_to_horizon(Method::GeoExact, h, n) : Vector();
    for (Series& s : series) {
      const Vector end = run_to_horizon(s.method, h, n);
      s.h.push_back(h);
      s.err.push_back((end - (s.against_exp ? euler : reference)).norm());
    }
  }

  std::vector<OrderRow> rows;
  for (const Series& s : series) {
    const double slope = loglog_slope(s.h, s.err);
    for (std::size_t i = 0; i < s.h.size(); ++i) rows.push_back({s.name, s.h[i], s.err[i], slope});
  }
  return rows;
}

std::vector<RunRow> run_mlp_benchmark(const ExperimentConfig& cfg) {
  const NetworkProblem p = make_network_problem(cfg);
  const NetworkObjective obj(p.init, p.loss, p.batch);
  std::vector<RunRow> rows;
  for (Method m : cfg.methods)
    run_cell(cfg, m, "net", obj, initial_state(cfg, p.init.flatten()),
             [](const Vector& t) { return Vector(t.head(2)); }, rows);
  return rows;
}

std::vector<CurvatureRow> run_small_curvature(const ExperimentConfig& cfg) {
  const NetworkProblem p = make_network_problem(cfg);
  const NetworkObjective obj(p.init, p.loss, p.batch);
  const std::string exp(experiment_name(cfg.experiment));

  // Corrections compared at a common point, always switched on, unscaled.
  StepOptions probe = cfg.step;
  probe.backtracking = false;
  probe.adapt_damping = false;
  auto correction = [&](Method m, const OptimizerState& s) {
    OptimizerState forced = s;
    forced.damping.threshold = std::numeric_limits<double>::infinity();
    return step(m, forced, obj, probe).report.correction;
  };

  OptimizerState geo = initial_state(cfg, p.init.flatten());
  OptimizerState sc = geo, full = geo;
  std::vector<CurvatureRow> rows;
  for (int k = 1; k <= cfg.iters; ++k) {
    CurvatureRow r;
    r.experiment = exp;
    r.iteration = k;
    try {
      const Vector cg = correction(Method::Geo, geo);
      const Vector csc = correction(Method::SmallCurvature, geo);
      const Vector cp = correction(Method::Perturb, geo);
      const double denom = std::max(cg.norm(), std::numeric_limits<double>::min());
      r.correction_norm = cg.norm();
      r.gap_small_curvature = (csc - cg).norm() / denom;
      r.gap_perturb = (cp - cg).norm() / denom;

      const StepOutcome og = step(Method::Geo, geo, obj, cfg.step);
      const StepOutcome osc = step(Method::SmallCurvature, sc, obj, cfg.step);
      const StepOutcome op = step(Method::Perturb, full, obj, cfg.step);
      geo = og.state;
      sc = osc.state;
      full = op.state;
      r.loss_geo = og.report.loss_after;
      r.loss_small_curvature = osc.report.loss_after;
      r.loss_perturb = op.report.loss_after;
      rows.push_back(r);
    } catch (const Error& e) {
      r.loss_geo = r.loss_small_curvature = r.loss_perturb = kNaN;
      r.correction_norm = r.gap_small_curvature = r.gap_perturb = kNaN;
      r.status = error_status(e);
      rows.push_back(r);
      break;
    }
  }
  return rows;
}

void write_run_csv(const std::vector<RunRow>& rows, std::ostream& out) {
  out << kRunHeader << '\n';
  for (const RunRow& r : rows)
    out << csv::join_row({r.experiment, r.method, r.chart, std::to_string(r.iteration), num(r.theta0),
                          num(r.theta1), num(r.loss), num(r.step_norm), num(r.epsilon),
                          std::to_string(r.wall_micros), r.status});
}

void write_mlp_csv(const std::vector<RunRow>& rows, std::ostream& out) {
  out << kMlpHeader << '\n';
  for (const RunRow& r : rows)
    out << csv::join_row({r.experiment, r.method, r.chart, std::to_string(r.iteration), num(r.theta0),
                          num(r.theta1), num(r.loss), num(r.step_norm), num(r.epsilon),
                          std::to_string(r.wall_micros), r.status, std::to_string(r.cg_iters),
                          std::to_string(r.backtracks)});
}

void write_order_csv(const std::vector<OrderRow>& rows, std::ostream& out) {
  out << kOrderHeader << '\n';
  for (const OrderRow& r : rows)
    out << csv::join_row({r.series, num(r.h), num(r.error), num(r.slope)});
}

void write_curvature_csv(const std::vector<CurvatureRow>& rows, std::ostream& out) {
  out << kCurvatureHeader << '\n';
  for (const CurvatureRow& r : rows)
    out << csv::join_row({r.experiment, std::to_string(r.iteration), num(r.loss_geo),
                          num(r.loss_small_curvature), num(r.loss_perturb), num(r.correction_norm),
                          num(r.gap_small_curvature), num(r.gap_perturb), r.status});
}

}  // namespace ngd
