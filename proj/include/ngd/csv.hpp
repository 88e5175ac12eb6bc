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

#ifndef NGD_CSV_HPP
#define NGD_CSV_HPP

#include <string>
#include <string_view>
#include <vector>

namespace ngd::csv {

/// "%.17g": round-trips every finite double exactly.
std::string format_double(double x);

/// Strict parse of a whole field; throws ConfigError on trailing garbage.
double parse_double(std::string_view field);

/// Comma-joined row terminated by '\n'. Fields are written verbatim.
std::string join_row(const std::vector<std::string>& fields);

/// Splits one CSV line on commas (no quoting support; none of our fields need it).
std::vector<std::string> split_row(std::string_view line);

}  // namespace ngd::csv

#endif  // NGD_CSV_HPP
