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

#ifndef NGD_ERRORS_HPP
#define NGD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ngd {

/// Base class of every error raised by the library. `kind()` is a stable
/// short tag used in CSV status columns ("error:<kind>").
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define NGD_DEFINE_ERROR(Name, tag)                                   \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(tag, what) {}      \
  }

// Argument outside a function's mathematical domain (polygamma x <= 0,
// non-positive Gamma parameters, ...).
NGD_DEFINE_ERROR(DomainError, "domain");
// A trajectory (geodesic, ODE, optimizer step) left the model's valid domain.
NGD_DEFINE_ERROR(DomainExit, "domain_exit");
NGD_DEFINE_ERROR(SingularMetric, "singular_metric");
NGD_DEFINE_ERROR(NonFiniteState, "non_finite");
NGD_DEFINE_ERROR(ShapeMismatch, "shape_mismatch");
NGD_DEFINE_ERROR(LengthMismatch, "length_mismatch");
NGD_DEFINE_ERROR(NumericalUnderflow, "underflow");
// Conjugate gradient hit a negative curvature direction.
NGD_DEFINE_ERROR(Breakdown, "breakdown");
NGD_DEFINE_ERROR(ConfigError, "config");

#undef NGD_DEFINE_ERROR

}  // namespace ngd

#endif  // NGD_ERRORS_HPP
