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

// JSON form of a network:
//   {"layers": [{"in": 2, "out": 3, "act": "sigmoid",
//                "w": [row-major, out*in values], "b": [out values]}, ...]}

#ifndef NGD_NETWORK_IO_HPP
#define NGD_NETWORK_IO_HPP

#include "ngd/network.hpp"

#include <json.hpp>

namespace ngd::nn {

nlohmann::json network_to_json(const Network& net);
/// Throws ConfigError naming the offending field.
Network network_from_json(const nlohmann::json& j);

}  // namespace ngd::nn

#endif  // NGD_NETWORK_IO_HPP
