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

#ifndef NGD_POLYGAMMA_HPP
#define NGD_POLYGAMMA_HPP

namespace ngd {

/// psi^(order)(x) for order 0 (digamma), 1 (trigamma) and 2 (tetragamma).
///
/// Shifts x upward with the recurrence psi^(m)(x) = psi^(m)(x+1) - (-1)^m m!/x^(m+1)
/// until x >= 8, then sums the asymptotic Bernoulli series. Accurate to about
/// 1e-14 relative on [1e-3, 1e3]. Throws DomainError for x <= 0 or an
/// unsupported order.
double polygamma(int order, double x);

inline double digamma(double x) { return polygamma(0, x); }
inline double trigamma(double x) { return polygamma(1, x); }
inline double tetragamma(double x) { return polygamma(2, x); }

}  // namespace ngd

#endif  // NGD_POLYGAMMA_HPP
