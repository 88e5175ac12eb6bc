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

// Univariate Gamma maximum-likelihood testbed.
//
// The model p(x | a, b) = b^a / Gamma(a) x^(a-1) exp(-b x) is fitted by
// minimizing the mean negative log-likelihood of a dataset. Its Fisher
// metric, metric derivatives and Levi-Civita connection are known in closed
// form in the base (shape, rate) chart; the other charts are handled by
// exact pullback through the chart map, so every chart shares one analytic
// core.
//
// Every chart maps each coordinate independently, so chart Jacobians are
// diagonal.

#ifndef NGD_GAMMA_MODEL_HPP
#define NGD_GAMMA_MODEL_HPP

#include "ngd/geometry.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace ngd::gamma {

/// Base-chart parameters are rejected (never clamped) below this value.
inline constexpr double kMinParameter = 1e-8;

/// Coordinate systems on the Gamma manifold, named by how the base
/// parameters (a, b) are recovered from the chart coordinates (a', b').
enum class Chart {
  Original,     // a = a',   b = b'
  InverseRate,  // a = a',   b = 1 / b'
  CubeRate,     // a = a',   b = b'^3
  SquareBoth,   // a = a'^2, b = b'^2   (positive branch)
};

inline constexpr std::array<Chart, 4> kAllCharts = {Chart::Original, Chart::InverseRate,
                                                    Chart::CubeRate, Chart::SquareBoth};

std::string_view chart_name(Chart chart);
/// Throws ConfigError for unknown names.
Chart parse_chart(std::string_view name);

struct GammaParams {
  double shape;
  double rate;
};

/// Samples plus the sufficient statistics the loss needs.
class GammaDataset {
 public:
  /// Throws DomainError if the sample set is empty or has a non-positive value.
  GammaDataset(std::vector<double> samples, std::uint64_t seed);

  const std::vector<double>& samples() const { return samples_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return samples_.size(); }
  double mean() const { return mean_; }
  double mean_log() const { return mean_log_; }

 private:
  std::vector<double> samples_;
  std::uint64_t seed_;
  double mean_ = 0.0;
  double mean_log_ = 0.0;
};

/// Deterministic Gamma(shape, rate) sampler: Marsaglia-Tsang for shape >= 1,
/// shape < 1 boosted through Gamma(shape + 1) * U^(1/shape).
GammaDataset gamma_sample(GammaParams params, std::size_t n, std::uint64_t seed);

/// CSV with a single `x` column and header, 17 significant digits.
void write_dataset_csv(const GammaDataset& data, std::ostream& out);
GammaDataset read_dataset_csv(std::istream& in, std::uint64_t seed);

/// Chart coordinates -> base parameters. Throws DomainError outside the chart.
GammaParams to_base(const Vector& p, Chart chart);
/// Base parameters -> chart coordinates (positive roots).
Vector from_base(GammaParams base, Chart chart);
Vector reparam(const Vector& p, Chart from, Chart to);

/// Diagonal of d(base)/d(chart) and of its derivative, at chart point p.
struct ChartJacobian {
  Vector first;
  Vector second;
};
ChartJacobian chart_jacobian(const Vector& p, Chart chart);

/// Transports a tangent vector at p (chart `from`) to chart `to`.
Vector push_tangent(const Vector& p, Chart from, Chart to, const Vector& tangent);

double gamma_nll(const Vector& p, Chart chart, const GammaDataset& data);
Vector gamma_nll_grad(const Vector& p, Chart chart, const GammaDataset& data);
Matrix gamma_metric(const Vector& p, Chart chart);
MetricPartials gamma_metric_partials(const Vector& p, Chart chart);
ChristoffelTensor gamma_connection(const Vector& p, Chart chart);

}  // namespace ngd::gamma

#endif  // NGD_GAMMA_MODEL_HPP
