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

// Experiment configuration. Every key is optional except "experiment";
// unknown keys and ill-typed values raise ConfigError naming the dotted key.

#ifndef NGD_CONFIG_HPP
#define NGD_CONFIG_HPP

#include "ngd/gamma_model.hpp"
#include "ngd/network.hpp"
#include "ngd/optimizers.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ngd {

enum class Experiment { Invariance, OrderStudy, Mlp, SmallCurvature };

std::string_view experiment_name(Experiment e);
Experiment parse_experiment(std::string_view name);

struct DataSpec {
  double shape = 20.0;
  double rate = 20.0;
  std::size_t n = 10000;
  /// Starting point in base (shape, rate) coordinates.
  double init_shape = 1.0;
  double init_rate = 1.0;
};

enum class NetTask { Autoencoder, Regression };

struct NetSpec {
  std::vector<Index> sizes = {8, 16, 8};
  std::vector<nn::Activation> activations = {nn::Activation::Sigmoid, nn::Activation::Identity};
  nn::Loss loss = nn::Loss::squared(1.0);
  NetTask task = NetTask::Autoencoder;
  std::size_t samples = 500;
  /// Standard deviation of Gaussian target noise (regression, squared loss).
  double noise = 0.0;
};

struct OrderSpec {
  double horizon = 2.0;
  int log2_h_min = 3;  // h_max = 2^-log2_h_min
  int log2_h_max = 8;
  /// RK4 steps for the dense ng_exact reference over the whole horizon.
  int reference_steps = 8192;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::Invariance;
  std::uint64_t seed = 7;
  std::vector<Method> methods;
  std::vector<gamma::Chart> charts = {gamma::kAllCharts.begin(), gamma::kAllCharts.end()};
  DataSpec data;
  double h_lambda = 0.5;
  int iters = 20;
  DampingState damping;
  StepOptions step;
  OrderSpec order;
  NetSpec net;
  bool record_wall_time = false;
  std::string output;

  /// Cross-field checks for the chosen experiment.
  void validate() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
/// Throws ConfigError naming the path when the file is missing or malformed.
ExperimentConfig load_config(const std::string& path);
/// Fully resolved form; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& c);

}  // namespace ngd

#endif  // NGD_CONFIG_HPP
