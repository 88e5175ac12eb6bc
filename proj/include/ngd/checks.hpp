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

// Self-check suite: analytic products against brute-force oracles, chart
// covariance, conservation laws and run determinism. Failures are data.

#ifndef NGD_CHECKS_HPP
#define NGD_CHECKS_HPP

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ngd {

enum class Fault {
  None,
  /// fisher_vp sees a network with one weight perturbed; the oracle does not.
  FisherWeight,
};

std::string_view fault_name(Fault f);
Fault parse_fault(std::string_view name);

struct CheckResult {
  std::string name;
  /// "<=": pass iff observed <= tolerance. ">": pass iff observed > tolerance.
  std::string comparison;
  double tolerance = 0.0;
  double observed = 0.0;
  bool pass = false;
};

std::vector<CheckResult> run_checks(Fault fault = Fault::None);

inline constexpr const char* kChecksHeader = "check,comparison,tolerance,observed,verdict";
void write_checks_csv(const std::vector<CheckResult>& results, std::ostream& out);

}  // namespace ngd

#endif  // NGD_CHECKS_HPP
