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

#include "ngd/config.hpp"

#include "ngd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>

namespace ngd {

using nlohmann::json;

std::string_view experiment_name(Experiment e) {
  switch (e) {
    case Experiment::Invariance: return "invariance";
    case Experiment::OrderStudy: return "order-study";
    case Experiment::Mlp: return "mlp";
    case Experiment::SmallCurvature: return "small-curvature";
  }
  return "?";
}

Experiment parse_experiment(std::string_view name) {
  for (Experiment e : {Experiment::Invariance, Experiment::OrderStudy, Experiment::Mlp,
                       Experiment::SmallCurvature})
    if (experiment_name(e) == name) return e;
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

namespace {

std::string_view task_name(NetTask t) { return t == NetTask::Autoencoder ? "autoencoder" : "regression"; }

// Typed access to one JSON object; every key read is recorded so leftovers
// can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("'" + where() + "' must be an object");
  }
  ~Section() = default;

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) bad(key, "expected a number");
      out = v->get<double>();
    }
  }
  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_integer()) bad(key, "expected an integer");
      const auto wide = v->get<long long>();
      if (wide < static_cast<long long>(std::numeric_limits<Int>::min()) ||
          (wide > 0 && static_cast<unsigned long long>(wide) > std::numeric_limits<Int>::max()))
        bad(key, "out of range");
      out = static_cast<Int>(wide);
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) bad(key, "expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const json* v = get(key)) {
      if (!v->is_string()) bad(key, "expected a string");
      out = v->get<std::string>();
    }
  }
  template <typename T>
  void named(const std::string& key, T& out, const std::function<T(std::string_view)>& parse) {
    std::string s;
    string(key, s);
    if (get(key)) out = wrap(key, [&] { return parse(s); });
  }
  template <typename T>
  void named_list(const std::string& key, std::vector<T>& out,
                  const std::function<T(std::string_view)>& parse) {
    if (const json* v = get(key)) {
      if (!v->is_array()) bad(key, "expected an array of strings");
      out.clear();
      for (const json& e : *v) {
        if (!e.is_string()) bad(key, "expected an array of strings");
        out.push_back(wrap(key, [&] { return parse(e.get<std::string>()); }));
      }
    }
  }

  template <typename F>
  auto wrap(const std::string& key, F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const ConfigError& e) {
      bad(key, e.what());
    }
  }

  [[noreturn]] void bad(const std::string& key, const std::string& why) const {
    throw ConfigError("invalid value for '" + key_path(key) + "': " + why);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + key_path(it.key()) + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& key, const std::string& why) {
  if (!ok) throw ConfigError("invalid value for '" + key + "': " + why);
}

std::vector<Method> default_methods(Experiment e) {
  switch (e) {
    case Experiment::Invariance:
      return {Method::Ng, Method::Mid, Method::Geo, Method::GeoFast, Method::GeoExact, Method::NgExact};
    case Experiment::OrderStudy:
      return {Method::Ng, Method::Mid, Method::Geo, Method::GeoFast};
    case Experiment::Mlp:
      return {Method::Ng, Method::Mid, Method::Geo, Method::GeoFast, Method::Perturb,
              Method::SmallCurvature};
    case Experiment::SmallCurvature:
      return {Method::Geo, Method::SmallCurvature, Method::Perturb};
  }
  return {};
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Section root(j, "");
  const json* exp = root.get("experiment");
  if (!exp) throw ConfigError("missing key 'experiment'");
  if (!exp->is_string()) root.bad("experiment", "expected a string");
  c.experiment = root.wrap("experiment", [&] { return parse_experiment(exp->get<std::string>()); });
  c.methods = default_methods(c.experiment);
  if (c.experiment == Experiment::Mlp || c.experiment == Experiment::SmallCurvature) {
    // Network runs start heavily damped.
    c.damping.epsilon = 45.0;
    c.h_lambda = 1.0;
    c.iters = 100;
  } else {
    c.damping.epsilon = 0.0;
    c.step.adapt_damping = false;
  }
  if (c.experiment == Experiment::OrderStudy) {
    c.step.backtracking = false;
    c.charts = {gamma::Chart::Original};
  }
  c.output = std::string(experiment_name(c.experiment)) + ".csv";
  if (c.experiment == Experiment::OrderStudy) c.output = "order.csv";

  root.integer("seed", c.seed);
  root.named_list<Method>("methods", c.methods, parse_method);
  root.named_list<gamma::Chart>("charts", c.charts, gamma::parse_chart);
  root.number("h_lambda", c.h_lambda);
  root.integer("iters", c.iters);
  root.integer("exp_substeps", c.step.exp_substeps);
  root.integer("exact_ode_steps", c.step.exact_ode_steps);
  root.integer("dense_limit", c.step.dense_limit);
  root.named<DiagMode>("diag_mode", c.step.diag_mode, parse_diag_mode);
  root.boolean("record_wall_time", c.record_wall_time);
  root.string("output", c.output);

  if (const json* d = root.get("data")) {
    Section s(*d, "data");
    s.number("shape", c.data.shape);
    s.number("rate", c.data.rate);
    s.integer("n", c.data.n);
    if (const json* init = s.get("init")) {
      if (!init->is_array() || init->size() != 2 || !(*init)[0].is_number() || !(*init)[1].is_number())
        s.bad("init", "expected [shape, rate]");
      c.data.init_shape = (*init)[0].get<double>();
      c.data.init_rate = (*init)[1].get<double>();
    }
    s.finish();
  }
  if (const json* d = root.get("damping")) {
    Section s(*d, "damping");
    s.number("initial", c.damping.epsilon);
    s.number("threshold", c.damping.threshold);
    s.number("grow", c.damping.grow);
    s.number("shrink", c.damping.shrink);
    s.number("lower", c.damping.lower);
    s.number("upper", c.damping.upper);
    s.boolean("adapt", c.step.adapt_damping);
    s.finish();
  }
  if (const json* d = root.get("cg")) {
    Section s(*d, "cg");
    s.integer("max_iters", c.step.cg.max_iters);
    s.number("tol", c.step.cg.tol);
    s.finish();
  }
  if (const json* d = root.get("line_search")) {
    Section s(*d, "line_search");
    s.boolean("enabled", c.step.backtracking);
    s.integer("max_halvings", c.step.max_halvings);
    s.finish();
  }
  if (const json* d = root.get("order")) {
    Section s(*d, "order");
    s.number("horizon", c.order.horizon);
    s.integer("log2_h_min", c.order.log2_h_min);
    s.integer("log2_h_max", c.order.log2_h_max);
    s.integer("reference_steps", c.order.reference_steps);
    s.finish();
  }
  if (const json* d = root.get("net")) {
    Section s(*d, "net");
    if (const json* sizes = s.get("sizes")) {
      if (!sizes->is_array()) s.bad("sizes", "expected an array of positive integers");
      c.net.sizes.clear();
      for (const json& e : *sizes) {
        if (!e.is_number_integer() || e.get<long long>() <= 0)
          s.bad("sizes", "expected an array of positive integers");
        c.net.sizes.push_back(e.get<Index>());
      }
    }
    s.named_list<nn::Activation>("activations", c.net.activations, nn::parse_activation);
    nn::Loss::Kind kind = c.net.loss.kind;
    s.named<nn::Loss::Kind>("loss", kind, nn::parse_loss);
    double sigma2 = c.net.loss.sigma2;
    s.number("sigma2", sigma2);
    c.net.loss.kind = kind;
    c.net.loss.sigma2 = sigma2;
    s.number("max_clamped_fraction", c.net.loss.max_clamped_fraction);
    std::string task(task_name(c.net.task));
    s.string("task", task);
    if (task == "autoencoder") c.net.task = NetTask::Autoencoder;
    else if (task == "regression") c.net.task = NetTask::Regression;
    else s.bad("task", "expected 'autoencoder' or 'regression'");
    s.integer("samples", c.net.samples);
    s.number("noise", c.net.noise);
    s.finish();
  }
  root.finish();
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  require(!methods.empty(), "methods", "must not be empty");
  require(!charts.empty(), "charts", "must not be empty");
  require(std::isfinite(h_lambda) && h_lambda > 0.0, "h_lambda", "must be positive");
  require(iters >= 1, "iters", "must be at least 1");
  require(step.exp_substeps >= 1, "exp_substeps", "must be at least 1");
  require(step.exact_ode_steps >= 1, "exact_ode_steps", "must be at least 1");
  require(step.dense_limit >= 0, "dense_limit", "must be non-negative");
  require(step.max_halvings >= 0, "line_search.max_halvings", "must be non-negative");
  require(!output.empty() && output.find('/') == std::string::npos, "output",
          "must be a plain file name");
  try {
    damping.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("invalid damping: ") + e.what());
  }
  try {
    step.cg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("invalid cg: ") + e.what());
  }

  const bool gamma_run = experiment == Experiment::Invariance || experiment == Experiment::OrderStudy;
  if (gamma_run) {
    require(std::isfinite(data.shape) && data.shape > 0.0, "data.shape", "must be positive");
    require(std::isfinite(data.rate) && data.rate > 0.0, "data.rate", "must be positive");
    require(data.n >= 1, "data.n", "must be at least 1");
    require(data.init_shape > 0.0 && data.init_rate > 0.0, "data.init", "must be positive");
    for (Method m : methods)
      require(m != Method::Perturb && m != Method::SmallCurvature, "methods",
              std::string(method_name(m)) + " needs a network objective");
  }
  if (experiment == Experiment::OrderStudy) {
    require(charts.size() == 1, "charts", "the order study runs in exactly one chart");
    require(damping.epsilon == 0.0, "damping.initial", "the order study is undamped");
    require(!step.backtracking, "line_search.enabled", "the order study runs without backtracking");
    require(order.horizon > 0.0, "order.horizon", "must be positive");
    require(order.log2_h_min >= 0 && order.log2_h_max >= order.log2_h_min + 1, "order.log2_h_max",
            "need at least two step sizes");
    require(order.reference_steps >= 1, "order.reference_steps", "must be at least 1");
    for (Method m : methods)
      require(m == Method::Ng || m == Method::Mid || m == Method::Geo || m == Method::GeoFast,
              "methods", "order study compares ng, mid, geo and geo_f");
  }
  if (!gamma_run) {
    require(net.sizes.size() >= 2, "net.sizes", "need at least an input and an output size");
    require(net.activations.size() + 1 == net.sizes.size(), "net.activations",
            "need one activation per layer");
    require(net.samples >= 1, "net.samples", "must be at least 1");
    require(std::isfinite(net.noise) && net.noise >= 0.0, "net.noise", "must be non-negative");
    require(net.task == NetTask::Regression || net.sizes.front() == net.sizes.back(), "net.task",
            "an autoencoder needs equal input and output sizes");
    require(net.task == NetTask::Regression || net.loss.kind == nn::Loss::Kind::Squared, "net.task",
            "autoencoding targets need the squared loss");
    require(net.loss.sigma2 > 0.0, "net.sigma2", "must be positive");
    for (Method m : methods)
      require(m != Method::GeoExact, "methods", "geo_exact needs the full connection");
    if (experiment == Experiment::SmallCurvature) {
      for (Method m : {Method::Geo, Method::SmallCurvature, Method::Perturb})
        require(std::find(methods.begin(), methods.end(), m) != methods.end(), "methods",
                "the small-curvature study needs geo, small_curvature and perturb");
    }
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = experiment_name(c.experiment);
  j["seed"] = c.seed;
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(method_name(m));
  j["methods"] = methods;
  json charts = json::array();
  for (gamma::Chart ch : c.charts) charts.push_back(gamma::chart_name(ch));
  j["charts"] = charts;
  j["h_lambda"] = c.h_lambda;
  j["iters"] = c.iters;
  j["exp_substeps"] = c.step.exp_substeps;
  j["exact_ode_steps"] = c.step.exact_ode_steps;
  j["dense_limit"] = c.step.dense_limit;
  j["diag_mode"] = diag_mode_name(c.step.diag_mode);
  j["record_wall_time"] = c.record_wall_time;
  j["output"] = c.output;
  j["data"] = {{"shape", c.data.shape},
               {"rate", c.data.rate},
               {"n", c.data.n},
               {"init", {c.data.init_shape, c.data.init_rate}}};
  j["damping"] = {{"initial", c.damping.epsilon}, {"threshold", c.damping.threshold},
                  {"grow", c.damping.grow},       {"shrink", c.damping.shrink},
                  {"lower", c.damping.lower},     {"upper", c.damping.upper},
                  {"adapt", c.step.adapt_damping}};
  j["cg"] = {{"max_iters", c.step.cg.max_iters}, {"tol", c.step.cg.tol}};
  j["line_search"] = {{"enabled", c.step.backtracking}, {"max_halvings", c.step.max_halvings}};
  j["order"] = {{"horizon", c.order.horizon},
                {"log2_h_min", c.order.log2_h_min},
                {"log2_h_max", c.order.log2_h_max},
                {"reference_steps", c.order.reference_steps}};
  json acts = json::array();
  for (nn::Activation a : c.net.activations) acts.push_back(nn::activation_name(a));
  j["net"] = {{"sizes", c.net.sizes},
              {"activations", acts},
              {"loss", nn::loss_name(c.net.loss.kind)},
              {"sigma2", c.net.loss.sigma2},
              {"max_clamped_fraction", c.net.loss.max_clamped_fraction},
              {"task", task_name(c.net.task)},
              {"samples", c.net.samples},
              {"noise", c.net.noise}};
  return j;
}

}  // namespace ngd
