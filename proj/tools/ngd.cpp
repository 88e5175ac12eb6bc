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

// Exit codes: 0 success, 1 invocation or config error, 2 numerical failure
// (error rows in a run, a failed order-study run, or a failed check).

#include "ngd/checks.hpp"
#include "ngd/config.hpp"
#include "ngd/csv.hpp"
#include "ngd/errors.hpp"
#include "ngd/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#ifndef NGD_BUILD_ID
#define NGD_BUILD_ID "unknown"
#endif

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct Invocation {
  std::string subcommand;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::string fault = "none";
  int verbosity = 1;
};

class Logger {
 public:
  explicit Logger(int level) : level_(level) {}
  void info(const std::string& msg) const {
    if (level_ >= 1) std::cerr << msg << '\n';
  }
  void debug(const std::string& msg) const {
    if (level_ >= 2) std::cerr << msg << '\n';
  }

 private:
  int level_;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ngd::ConfigError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw ngd::ConfigError("failed writing '" + path.string() + "'");
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw ngd::ConfigError("output directory '" + dir + "' is not usable");
  const fs::path probe = fs::path(dir) / ".ngd_write_probe";
  write_file(probe, "");
  fs::remove(probe, ec);
  return fs::path(dir);
}

json meta_base(const Invocation& inv) {
  return {{"subcommand", inv.subcommand}, {"build", NGD_BUILD_ID}};
}

int run_experiment(const Invocation& inv, const Logger& log) {
  ngd::ExperimentConfig cfg = ngd::load_config(inv.config_path);
  if (ngd::experiment_name(cfg.experiment) != inv.subcommand)
    throw ngd::ConfigError("invalid value for 'experiment': config is for '" +
                           std::string(ngd::experiment_name(cfg.experiment)) + "' but the subcommand is '" +
                           inv.subcommand + "'");
  if (inv.seed) cfg.seed = *inv.seed;
  const fs::path dir = prepare_out_dir(inv.out_dir);

  std::ostringstream csv;
  int failures = 0;
  switch (cfg.experiment) {
    case ngd::Experiment::Invariance: {
      const auto rows = ngd::run_invariance(cfg);
      for (const auto& r : rows) failures += r.ok() ? 0 : 1;
      ngd::write_run_csv(rows, csv);
      break;
    }
    case ngd::Experiment::OrderStudy: {
      const auto rows = ngd::run_order_study(cfg);
      std::string last;
      for (const auto& r : rows)
        if (r.series != last) {
          log.info(r.series + " slope " + ngd::csv::format_double(r.slope));
          last = r.series;
        }
      ngd::write_order_csv(rows, csv);
      break;
    }
    case ngd::Experiment::Mlp: {
      const auto rows = ngd::run_mlp_benchmark(cfg);
      for (const auto& r : rows) {
        failures += r.ok() ? 0 : 1;
        if (r.iteration == cfg.iters) log.info(r.method + " final loss " + ngd::csv::format_double(r.loss));
      }
      ngd::write_mlp_csv(rows, csv);
      break;
    }
    case ngd::Experiment::SmallCurvature: {
      const auto rows = ngd::run_small_curvature(cfg);
      for (const auto& r : rows) failures += r.status == "ok" ? 0 : 1;
      ngd::write_curvature_csv(rows, csv);
      break;
    }
  }
  write_file(dir / cfg.output, csv.str());

  json meta = meta_base(inv);
  meta["config"] = ngd::to_json(cfg);
  meta["seed"] = cfg.seed;
  meta["outputs"] = {cfg.output};
  meta["error_rows"] = failures;
  if (cfg.experiment == ngd::Experiment::Mlp || cfg.experiment == ngd::Experiment::SmallCurvature)
    meta["initialization"] = "gaussian(0, 0.5/fan_in) weights, zero biases";
  write_file(dir / "meta.json", meta.dump(2) + "\n");

  log.info("wrote " + (dir / cfg.output).string() + " and meta.json");
  if (failures > 0) {
    std::cerr << failures << " run(s) ended with an error row\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int run_check(const Invocation& inv, const Logger& log) {
  const ngd::Fault fault = ngd::parse_fault(inv.fault);
  const fs::path dir = prepare_out_dir(inv.out_dir);
  const auto results = ngd::run_checks(fault);
  std::ostringstream csv;
  ngd::write_checks_csv(results, csv);
  write_file(dir / "checks.csv", csv.str());
  std::cout << csv.str();

  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  json meta = meta_base(inv);
  meta["fault"] = inv.fault;
  meta["checks"] = results.size();
  meta["failed"] = failed;
  meta["outputs"] = {"checks.csv"};
  write_file(dir / "meta.json", meta.dump(2) + "\n");

  log.debug("wrote " + (dir / "checks.csv").string());
  std::cout << results.size() << " checks, " << failed << " failed\n";
  return failed == 0 ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  Invocation inv;
  CLI::App app{"Natural-gradient experiments and self-checks"};
  app.require_subcommand(1);
  int verbose = 0;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "More diagnostics on stderr (repeatable)");
  app.add_flag("-q,--quiet", quiet, "Only errors on stderr");

  for (const char* name : {"invariance", "order-study", "mlp", "small-curvature"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("Run the ") + name + " experiment");
    sub->add_option("-c,--config", inv.config_path, "JSON config file")->required();
    sub->add_option("-o,--out", inv.out_dir, "Output directory (created if missing)");
    sub->add_option("--seed", inv.seed, "Override the config seed");
  }
  CLI::App* check = app.add_subcommand("check", "Run the oracle check suite");
  check->add_option("-o,--out", inv.out_dir, "Output directory (created if missing)");
  check->add_option("--inject-fault", inv.fault, "none | fisher_weight");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  inv.subcommand = app.get_subcommands().front()->get_name();
  inv.verbosity = quiet ? 0 : 1 + verbose;
  const Logger log(inv.verbosity);

  try {
    return inv.subcommand == "check" ? run_check(inv, log) : run_experiment(inv, log);
  } catch (const ngd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ngd::Error& e) {
    std::cerr << "numerical failure (" << e.kind() << "): " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
