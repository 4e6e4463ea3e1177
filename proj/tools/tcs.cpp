// Command-line front end: runs experiments from JSON configs and writes
// CSV, SVG and manifest artifacts.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "tcsampler/experiments.hpp"

namespace {

constexpr int kExitInvalidConfig = 2;
constexpr int kExitSamplerFailure = 3;

struct Overrides {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<double> budget;
  std::optional<std::size_t> reps;
  std::optional<double> horizon;
  std::optional<double> a;
  std::optional<std::string> sampler;
  std::optional<std::size_t> states;
  std::optional<std::string> g;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_path, "JSON config (or a manifest.json to replay)");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

void add_run_flags(CLI::App* app, Overrides& o) {
  app->add_option("--budget", o.budget, "jump / step budget");
  app->add_option("--reps", o.reps, "replicates");
  app->add_option("--horizon", o.horizon, "time horizon");
  app->add_option("--a", o.a, "speed exponent a (heavytail, eyring)");
  app->add_option("--sampler", o.sampler, "sampler for the sample experiment");
}

tcs::Json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    throw tcs::ConfigError("cannot read config '" + path + "'");
  }
  try {
    return tcs::Json::parse(f);
  } catch (const tcs::Json::parse_error& e) {
    throw tcs::ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

tcs::Json build_config(const std::string& experiment, const Overrides& o) {
  tcs::Json raw = tcs::Json::object();
  if (!o.config_path.empty()) {
    raw = load_json(o.config_path);
    if (raw.contains("config") && raw["config"].is_object()) {
      raw = raw["config"];
    }
  }
  if (!experiment.empty()) {
    if (raw.contains("experiment") && raw["experiment"] != experiment) {
      throw tcs::ConfigError("config is for experiment " + raw["experiment"].dump() + ", not '" +
                             experiment + "'");
    }
    raw["experiment"] = experiment;
  }
  if (o.seed) raw["seed"] = *o.seed;
  if (o.threads) raw["threads"] = *o.threads;
  if (o.budget) raw["budget"] = *o.budget;
  if (o.reps) raw["reps"] = *o.reps;
  if (o.horizon) raw["horizon"] = *o.horizon;
  if (o.sampler) raw["sampler"] = *o.sampler;
  if (o.a) raw["params"]["a"] = *o.a;
  if (o.states) raw["params"]["n_states"] = *o.states;
  if (o.g) raw["params"]["g"] = *o.g;
  return tcs::resolve_config(raw);
}

int execute(const std::string& experiment, const Overrides& o) {
  tcs::Json config;
  try {
    config = build_config(experiment, o);
  } catch (const tcs::ConfigError& e) {
    std::cerr << "tcs: invalid config: " << e.what() << '\n';
    return kExitInvalidConfig;
  }
  const std::string name = config["experiment"];
  const std::string out = o.out.empty() ? "tcs_out/" + name : o.out;
  tcs::Artifacts artifacts;
  try {
    tcs::run_experiment(config, artifacts);
  } catch (const tcs::ConfigError& e) {
    std::cerr << "tcs: invalid config: " << e.what() << '\n';
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "tcs: sampler failure: " << e.what() << '\n';
    try {
      tcs::write_artifacts(out, artifacts, tcs::make_manifest(config, artifacts, "failed", e.what()));
      std::cerr << "tcs: partial outputs in " << out << '\n';
    } catch (const std::exception& w) {
      std::cerr << "tcs: could not write partial outputs: " << w.what() << '\n';
    }
    return kExitSamplerFailure;
  }
  const auto manifest = tcs::make_manifest(config, artifacts, "ok");
  try {
    tcs::write_artifacts(out, artifacts, manifest);
  } catch (const std::exception& e) {
    std::cerr << "tcs: " << e.what() << '\n';
    return kExitSamplerFailure;
  }
  std::cout << tcs::Json{{"out", out}, {"summary", artifacts.summary}}.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-changed Markov process samplers and experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tcs::kToolVersion));

  Overrides sample_o;
  auto* sample = app.add_subcommand("sample", "single sampler run with estimator report");
  add_common(sample, sample_o);
  add_run_flags(sample, sample_o);

  Overrides exp_o;
  std::string exp_name;
  auto* experiment = app.add_subcommand("experiment", "run a named experiment");
  experiment->add_option("name", exp_name, "experiment name")
      ->required()
      ->check(CLI::IsMember(tcs::experiment_names()));
  add_common(experiment, exp_o);
  add_run_flags(experiment, exp_o);

  Overrides run_o;
  std::string run_name;
  auto* run = app.add_subcommand("run", "run the experiment named by --experiment or the config");
  run->add_option("--experiment", run_name, "experiment name")
      ->check(CLI::IsMember(tcs::experiment_names()));
  add_common(run, run_o);
  add_run_flags(run, run_o);

  Overrides oracle_o;
  auto* oracle = app.add_subcommand("oracle", "exact oracles");
  oracle->require_subcommand(1);
  auto* discrete = oracle->add_subcommand("discrete", "stationary law of a discrete jump process");
  add_common(discrete, oracle_o);
  discrete->add_option("--states", oracle_o.states, "number of states of the random chain");
  discrete->add_option("--g", oracle_o.g, "balance function: metropolis or barker");
  discrete->add_option("--horizon", oracle_o.horizon, "simulation horizon");

  std::string defaults_name;
  auto* defaults = app.add_subcommand("defaults", "print the default config of an experiment");
  defaults->add_option("name", defaults_name, "experiment name")
      ->required()
      ->check(CLI::IsMember(tcs::experiment_names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidConfig;
  }

  if (*sample) {
    return execute("sample", sample_o);
  }
  if (*experiment) {
    return execute(exp_name, exp_o);
  }
  if (*run) {
    if (run_name.empty() && run_o.config_path.empty()) {
      std::cerr << "tcs: run needs --experiment or --config\n";
      return kExitInvalidConfig;
    }
    return execute(run_name, run_o);
  }
  if (*discrete) {
    return execute("discrete_oracle", oracle_o);
  }
  if (*defaults) {
    std::cout << tcs::default_config(defaults_name).dump(2) << '\n';
    return 0;
  }
  return kExitInvalidConfig;
}
