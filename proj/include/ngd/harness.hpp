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

// Experiment drivers. Each returns its rows in a fixed order so that the
// CSV written from them is byte-identical for a given config.

#ifndef NGD_HARNESS_HPP
#define NGD_HARNESS_HPP

#include "ngd/config.hpp"
#include "ngd/gamma_model.hpp"
#include "ngd/network.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ngd {

inline constexpr const char* kRunHeader =
    "experiment,method,chart,iteration,theta_0,theta_1,loss,step_norm,epsilon,wall_micros,status";
inline constexpr const char* kMlpHeader =
    "experiment,method,chart,iteration,theta_0,theta_1,loss,step_norm,epsilon,wall_micros,status,"
    "cg_iters,backtracks";
inline constexpr const char* kOrderHeader = "method,h,error,slope";
inline constexpr const char* kCurvatureHeader =
    "experiment,iteration,loss_geo,loss_small_curvature,loss_perturb,correction_norm,"
    "gap_small_curvature,gap_perturb,status";

/// One logged iteration. NaN numeric fields are written empty (error rows).
struct RunRow {
  std::string experiment;
  std::string method;
  std::string chart;
  int iteration = 0;
  double theta0 = 0.0;
  double theta1 = 0.0;
  double loss = 0.0;
  double step_norm = 0.0;
  double epsilon = 0.0;
  long long wall_micros = 0;
  std::string status = "ok";
  int cg_iters = 0;
  int backtracks = 0;

  bool ok() const { return status == "ok"; }
};

struct OrderRow {
  std::string series;  // "<method>/<reference>"
  double h = 0.0;
  double error = 0.0;
  double slope = 0.0;  // fitted over the whole series
};

struct CurvatureRow {
  std::string experiment;
  int iteration = 0;
  double loss_geo = 0.0;
  double loss_small_curvature = 0.0;
  double loss_perturb = 0.0;
  double correction_norm = 0.0;      // |geodesic correction|
  double gap_small_curvature = 0.0;  // relative to correction_norm
  double gap_perturb = 0.0;
  std::string status = "ok";
};

gamma::GammaDataset make_gamma_data(const ExperimentConfig& cfg);

struct NetworkProblem {
  nn::Network init;
  nn::Loss loss;
  nn::Batch batch;
};
/// Inputs uniform on [-1, 1]^d. Regression targets come from a random
/// teacher network of the same shape (Bernoulli or one-hot draws for the
/// cross-entropy losses, Gaussian noise for squared loss).
NetworkProblem make_network_problem(const ExperimentConfig& cfg);

std::vector<RunRow> run_invariance(const ExperimentConfig& cfg);
/// Errors propagate: a failed order-study run invalidates the fit.
std::vector<OrderRow> run_order_study(const ExperimentConfig& cfg);
std::vector<RunRow> run_mlp_benchmark(const ExperimentConfig& cfg);
std::vector<CurvatureRow> run_small_curvature(const ExperimentConfig& cfg);

/// Least-squares slope of log(error) against log(h).
double loglog_slope(const std::vector<double>& h, const std::vector<double>& err);

void write_run_csv(const std::vector<RunRow>& rows, std::ostream& out);
void write_mlp_csv(const std::vector<RunRow>& rows, std::ostream& out);
void write_order_csv(const std::vector<OrderRow>& rows, std::ostream& out);
void write_curvature_csv(const std::vector<CurvatureRow>& rows, std::ostream& out);

}  // namespace ngd

#endif  // NGD_HARNESS_HPP
