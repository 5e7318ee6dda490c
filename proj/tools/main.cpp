// nonmarkov: Monte Carlo non-Markovianity experiments.
//
//   nonmarkov measure --config run.cfg --out results/
//   nonmarkov sweep-mu --pairs 200 --seed 7 --set n_system=2
//
// Data goes to <out>/<experiment>.csv and <out>/<experiment>.json; progress
// goes to stderr.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/config.hpp"
#include "cli/experiments.hpp"
#include "nonmarkov/quantum_state.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> pairs;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<int> max_qubits;
  std::vector<std::string> overrides;
};

int run(nonmarkov::cli::Experiment experiment, const Flags& flags) {
  using namespace nonmarkov::cli;
  std::vector<Setting> settings;
  if (!flags.config_path.empty()) settings = read_settings_file(flags.config_path);
  for (const auto& kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    settings.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (flags.seed) settings.emplace_back("seed", std::to_string(*flags.seed));
  if (flags.pairs) settings.emplace_back("n_pairs", std::to_string(*flags.pairs));
  if (flags.out) settings.emplace_back("out", *flags.out);
  if (flags.workers) settings.emplace_back("workers", std::to_string(*flags.workers));
  if (flags.max_qubits) settings.emplace_back("max_qubits", std::to_string(*flags.max_qubits));

  ExperimentConfig config = resolve_config(settings, experiment);

  int cap = config.max_qubits;
  if (const char* env = std::getenv("NONMARKOV_MAX_QUBITS")) {
    try {
      cap = std::max(cap, std::stoi(env));
    } catch (const std::exception&) {
      throw ConfigError(std::string("NONMARKOV_MAX_QUBITS is not an integer: '") + env + "'");
    }
  }
  nonmarkov::set_max_qubits(cap);

  RunContext ctx{&std::cerr};
  const ExperimentOutput output = run_experiment(config, ctx);
  write_outputs(output, config.out);
  std::cerr << "[nonmarkov] wrote " << config.out << "/" << to_string(experiment) << ".{csv,json}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using nonmarkov::cli::Experiment;
  CLI::App app{"Monte Carlo estimates of average and pure non-Markovianity"};
  app.require_subcommand(1);

  Flags flags;
  struct Entry {
    Experiment experiment;
    const char* description;
    CLI::App* command = nullptr;
  };
  std::vector<Entry> entries{
      {Experiment::kMeasure, "estimate n_avg, n_pure and the sampled BLP bound for one model"},
      {Experiment::kSweepMu, "sweep the mean chain coupling"},
      {Experiment::kSweepSigma, "sweep the coupling standard deviation"},
      {Experiment::kFdConvergence, "finite-difference error against step size"},
      {Experiment::kToyScaling, "dephasing toy model with idle spectator qubits"},
  };
  for (auto& e : entries) {
    e.command = app.add_subcommand(nonmarkov::cli::to_string(e.experiment), e.description);
    e.command->add_option("--config", flags.config_path, "key = value config file")->check(CLI::ExistingFile);
    e.command->add_option("--seed", flags.seed, "master seed");
    e.command->add_option("--pairs", flags.pairs, "number of Haar-random state pairs");
    e.command->add_option("--out", flags.out, "output directory");
    e.command->add_option("--workers", flags.workers, "worker threads")->check(CLI::PositiveNumber);
    e.command->add_option("--max-qubits", flags.max_qubits, "joint register cap");
    e.command->add_option("--set", flags.overrides, "override a config key (key=value), repeatable");
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& e : entries) {
    if (!e.command->parsed()) continue;
    try {
      return run(e.experiment, flags);
    } catch (const std::exception& ex) {
      std::cerr << "nonmarkov: error: " << ex.what() << '\n';
      return 1;
    }
  }
  return 2;
}
