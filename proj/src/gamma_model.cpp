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

#include "ngd/gamma_model.hpp"

#include "ngd/csv.hpp"
#include "ngd/errors.hpp"
#include "ngd/polygamma.hpp"
#include "ngd/rng.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

namespace ngd::gamma {

std::string_view chart_name(Chart chart) {
  switch (chart) {
    case Chart::Original: return "original";
    case Chart::InverseRate: return "inverse_rate";
    case Chart::CubeRate: return "cube_rate";
    case Chart::SquareBoth: return "square_both";
  }
  return "unknown";
}

Chart parse_chart(std::string_view name) {
  for (Chart c : kAllCharts)
    if (chart_name(c) == name) return c;
  throw ConfigError("unknown chart '" + std::string(name) + "'");
}

GammaDataset::GammaDataset(std::vector<double> samples, std::uint64_t seed)
    : samples_(std::move(samples)), seed_(seed) {
  if (samples_.empty()) throw DomainError("Gamma dataset is empty");
  double sum = 0.0, sum_log = 0.0;
  for (double x : samples_) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw DomainError("Gamma dataset sample must be positive and finite");
    sum += x;
    sum_log += std::log(x);
  }
  const auto n = static_cast<double>(samples_.size());
  mean_ = sum / n;
  mean_log_ = sum_log / n;
}

namespace {

void check_base(GammaParams base) {
  if (!(base.shape > kMinParameter) || !(base.rate > kMinParameter) ||
      !std::isfinite(base.shape) || !std::isfinite(base.rate)) {
    throw DomainError("Gamma parameters out of domain: shape=" + std::to_string(base.shape) +
                      " rate=" + std::to_string(base.rate));
  }
}

void check_point(const Vector& p) {
  if (p.size() != 2) throw ShapeMismatch("Gamma chart point must have 2 coordinates");
}

// Marsaglia & Tsang (2000) for shape >= 1, unit rate.
double sample_unit_gamma(double shape, Rng& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

GammaDataset gamma_sample(GammaParams params, std::size_t n, std::uint64_t seed) {
  check_base(params);
  if (n == 0) throw DomainError("gamma_sample: n must be >= 1");
  Rng rng(seed);
  std::vector<double> xs;
  xs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double g;
    if (params.shape >= 1.0) {
      g = sample_unit_gamma(params.shape, rng);
    } else {
      g = sample_unit_gamma(params.shape + 1.0, rng);
      g *= std::pow(rng.uniform(), 1.0 / params.shape);
    }
    xs.push_back(g / params.rate);
  }
  return GammaDataset(std::move(xs), seed);
}

void write_dataset_csv(const GammaDataset& data, std::ostream& out) {
  out << "x\n";
  for (double x : data.samples()) out << csv::format_double(x) << '\n';
}

GammaDataset read_dataset_csv(std::istream& in, std::uint64_t seed) {
  std::string line;
  if (!std::getline(in, line) || line != "x")
    throw ConfigError("dataset CSV must start with the header 'x'");
  std::vector<double> xs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    xs.push_back(csv::parse_double(line));
  }
  return GammaDataset(std::move(xs), seed);
}

GammaParams to_base(const Vector& p, Chart chart) {
  check_point(p);
  GammaParams base{};
  switch (chart) {
    case Chart::Original:
      base = {p(0), p(1)};
      break;
    case Chart::InverseRate:
      if (!(p(1) > 0.0)) throw DomainError("inverse_rate chart requires b' > 0");
      base = {p(0), 1.0 / p(1)};
      break;
    case Chart::CubeRate:
      if (!(p(1) > 0.0)) throw DomainError("cube_rate chart requires b' > 0");
      base = {p(0), p(1) * p(1) * p(1)};
      break;
    case Chart::SquareBoth:
      if (!(p(0) > 0.0) || !(p(1) > 0.0))
        throw DomainError("square_both chart requires a' > 0 and b' > 0");
      base = {p(0) * p(0), p(1) * p(1)};
      break;
  }
  check_base(base);
  return base;
}

Vector from_base(GammaParams base, Chart chart) {
  check_base(base);
  Vector p(2);
  switch (chart) {
    case Chart::Original: p << base.shape, base.rate; break;
    case Chart::InverseRate: p << base.shape, 1.0 / base.rate; break;
    case Chart::CubeRate: p << base.shape, std::cbrt(base.rate); break;
    case Chart::SquareBoth: p << std::sqrt(base.shape), std::sqrt(base.rate); break;
  }
  return p;
}

Vector reparam(const Vector& p, Chart from, Chart to) {
  if (from == to) {
    to_base(p, from);
    return p;
  }
  return from_base(to_base(p, from), to);
}

ChartJacobian chart_jacobian(const Vector& p, Chart chart) {
  to_base(p, chart);
  ChartJacobian j{Vector::Ones(2), Vector::Zero(2)};
  switch (chart) {
    case Chart::Original:
      break;
    case Chart::InverseRate:
      j.first(1) = -1.0 / (p(1) * p(1));
      j.second(1) = 2.0 / (p(1) * p(1) * p(1));
      break;
    case Chart::CubeRate:
      j.first(1) = 3.0 * p(1) * p(1);
      j.second(1) = 6.0 * p(1);
      break;
    case Chart::SquareBoth:
      j.first << 2.0 * p(0), 2.0 * p(1);
      j.second << 2.0, 2.0;
      break;
  }
  return j;
}

Vector push_tangent(const Vector& p, Chart from, Chart to, const Vector& tangent) {
  const Vector q = reparam(p, from, to);
  const Vector base_tangent = chart_jacobian(p, from).first.cwiseProduct(tangent);
  return base_tangent.cwiseQuotient(chart_jacobian(q, to).first);
}

double gamma_nll(const Vector& p, Chart chart, const GammaDataset& data) {
  const auto [a, b] = to_base(p, chart);
  return -(a * std::log(b) - std::lgamma(a) + (a - 1.0) * data.mean_log() - b * data.mean());
}

Vector gamma_nll_grad(const Vector& p, Chart chart, const GammaDataset& data) {
  const auto [a, b] = to_base(p, chart);
  Vector base(2);
  base << digamma(a) - std::log(b) - data.mean_log(), -a / b + data.mean();
  return chart_jacobian(p, chart).first.cwiseProduct(base);
}

namespace {

Matrix base_metric(GammaParams q) {
  const double a = q.shape, b = q.rate;
  Matrix g(2, 2);
  g << trigamma(a), -1.0 / b, -1.0 / b, a / (b * b);
  return g;
}

MetricPartials base_metric_partials(GammaParams q) {
  const double a = q.shape, b = q.rate;
  MetricPartials d(2);
  d(0, 0, 0) = tetragamma(a);
  d(0, 1, 1) = 1.0 / (b * b);
  d(1, 0, 1) = 1.0 / (b * b);
  d(1, 1, 0) = 1.0 / (b * b);
  d(1, 1, 1) = -2.0 * a / (b * b * b);
  return d;
}

}  // namespace

Matrix gamma_metric(const Vector& p, Chart chart) {
  const GammaParams base = to_base(p, chart);
  const Vector j = chart_jacobian(p, chart).first;
  return j.asDiagonal() * base_metric(base) * j.asDiagonal();
}

MetricPartials gamma_metric_partials(const Vector& p, Chart chart) {
  const GammaParams base = to_base(p, chart);
  const ChartJacobian jac = chart_jacobian(p, chart);
  const Vector& j = jac.first;
  const Vector& j2 = jac.second;
  const Matrix g = base_metric(base);
  const MetricPartials dg = base_metric_partials(base);

  // g'_{mn} = J_m J_n g_{mn}(base(p)), with J diagonal.
  MetricPartials out(2);
  for (Index s = 0; s < 2; ++s) {
    for (Index m = 0; m < 2; ++m) {
      for (Index n = 0; n < 2; ++n) {
        double v = j(m) * j(n) * dg(s, m, n) * j(s);
        if (s == m) v += j2(s) * j(n) * g(m, n);
        if (s == n) v += j(m) * j2(s) * g(m, n);
        out(s, m, n) = v;
      }
    }
  }
  return out;
}

ChristoffelTensor gamma_connection(const Vector& p, Chart chart) {
  return christoffel_from_metric(gamma_metric(p, chart), gamma_metric_partials(p, chart));
}

}  // namespace ngd::gamma
