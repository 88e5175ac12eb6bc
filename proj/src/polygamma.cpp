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

#include "ngd/polygamma.hpp"

#include "ngd/errors.hpp"

#include <array>
#include <cmath>
#include <string>

namespace ngd {

namespace {

constexpr double kAsymptoticStart = 8.0;

// B_2, B_4, ..., B_16.
constexpr std::array<double, 8> kBernoulli = {
    1.0 / 6.0,  -1.0 / 30.0,     1.0 / 42.0, -1.0 / 30.0,
    5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0,  -3617.0 / 510.0,
};

double digamma_asymptotic(double x) {
  // ln x - 1/(2x) - sum B_2k / (2k x^2k)
  const double inv2 = 1.0 / (x * x);
  double term = inv2;
  double sum = 0.0;
  for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
    sum += kBernoulli[k - 1] / (2.0 * static_cast<double>(k)) * term;
    term *= inv2;
  }
  return std::log(x) - 0.5 / x - sum;
}

double trigamma_asymptotic(double x) {
  // 1/x + 1/(2x^2) + sum B_2k / x^(2k+1)
  const double inv2 = 1.0 / (x * x);
  double term = inv2 / x;
  double sum = 0.0;
  for (double b : kBernoulli) {
    sum += b * term;
    term *= inv2;
  }
  return 1.0 / x + 0.5 * inv2 + sum;
}

double tetragamma_asymptotic(double x) {
  // -1/x^2 - 1/x^3 - sum (2k+1) B_2k / x^(2k+2)
  const double inv2 = 1.0 / (x * x);
  double term = inv2 * inv2;
  double sum = 0.0;
  for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
    sum += (2.0 * static_cast<double>(k) + 1.0) * kBernoulli[k - 1] * term;
    term *= inv2;
  }
  return -inv2 - inv2 / x - sum;
}

}  // namespace

double polygamma(int order, double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError("polygamma: argument must be positive and finite, got " + std::to_string(x));
  if (order < 0 || order > 2)
    throw DomainError("polygamma: unsupported order " + std::to_string(order));

  double shift = 0.0;
  while (x < kAsymptoticStart) {
    switch (order) {
      case 0: shift -= 1.0 / x; break;
      case 1: shift += 1.0 / (x * x); break;
      default: shift -= 2.0 / (x * x * x); break;
    }
    x += 1.0;
  }
  switch (order) {
    case 0: return shift + digamma_asymptotic(x);
    case 1: return shift + trigamma_asymptotic(x);
    default: return shift + tetragamma_asymptotic(x);
  }
}

}  // namespace ngd
