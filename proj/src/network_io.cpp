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

#include "ngd/network_io.hpp"

#include "ngd/errors.hpp"

#include <string>

namespace ngd::nn {

nlohmann::json network_to_json(const Network& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const Layer& l : net.layers()) {
    nlohmann::json w = nlohmann::json::array();
    for (Index r = 0; r < l.weights.rows(); ++r)
      for (Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
    nlohmann::json b = nlohmann::json::array();
    for (Index r = 0; r < l.bias.size(); ++r) b.push_back(l.bias(r));
    layers.push_back({{"in", l.weights.cols()},
                      {"out", l.weights.rows()},
                      {"act", std::string(activation_name(l.act))},
                      {"w", std::move(w)},
                      {"b", std::move(b)}});
  }
  return {{"layers", std::move(layers)}};
}

namespace {

const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw ConfigError("missing field " + where + "." + key);
  return obj.at(key);
}

Index positive_int(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() <= 0)
    throw ConfigError(where + " must be a positive integer");
  return static_cast<Index>(v.get<long long>());
}

std::vector<double> numbers(const nlohmann::json& v, std::size_t expected,
                            const std::string& where) {
  if (!v.is_array() || v.size() != expected)
    throw ConfigError(where + " must be an array of " + std::to_string(expected) + " numbers");
  std::vector<double> out;
  out.reserve(expected);
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(where + " contains a non-number");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

Network network_from_json(const nlohmann::json& j) {
  const nlohmann::json& arr = field(j, "layers", "network");
  if (!arr.is_array() || arr.empty()) throw ConfigError("network.layers must be a non-empty array");
  std::vector<Layer> layers;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "layers[" + std::to_string(i) + "]";
    const nlohmann::json& lj = arr[i];
    const Index in = positive_int(field(lj, "in", where), where + ".in");
    const Index out = positive_int(field(lj, "out", where), where + ".out");
    const nlohmann::json& act = field(lj, "act", where);
    if (!act.is_string()) throw ConfigError(where + ".act must be a string");
    const auto w = numbers(field(lj, "w", where), static_cast<std::size_t>(in * out), where + ".w");
    const auto b = numbers(field(lj, "b", where), static_cast<std::size_t>(out), where + ".b");
    Layer l{Matrix(out, in), Vector(out), parse_activation(act.get<std::string>())};
    for (Index r = 0; r < out; ++r)
      for (Index c = 0; c < in; ++c) l.weights(r, c) = w[static_cast<std::size_t>(r * in + c)];
    for (Index r = 0; r < out; ++r) l.bias(r) = b[static_cast<std::size_t>(r)];
    layers.push_back(std::move(l));
  }
  try {
    return Network(std::move(layers));
  } catch (const ShapeMismatch& e) {
    throw ConfigError(std::string("network: ") + e.what());
  }
}

}  // namespace ngd::nn
