#pragma once

// Flat key = value experiment configuration.
//
//   # comment
//   experiment = sweep-mu
//   mu_values  = 0.1, 0.2, 0.3
//
// Settings are applied in order (file first, then command-line overrides),
// on top of per-experiment defaults.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nonmarkov::cli {

enum class Experiment { kMeasure, kSweepMu, kSweepSigma, kFdConvergence, kToyScaling };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

enum class ModelKind { kChain, kDephasing };
enum class DisorderMode { kEnsemble, kFrozen };
enum class EnvironmentState { kZero, kPlus };
enum class FdPair { kHaar, kPlusMinus };

using Setting = std::pair<std::string, std::string>;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::kMeasure;

  // model
  ModelKind model = ModelKind::kChain;
  int n_system = 3;
  double omega_mean = 0.2;
  double omega_std = 0.05;
  double coupling_mean = 0.8;
  double coupling_std = 0.05;
  DisorderMode disorder = DisorderMode::kEnsemble;
  std::vector<double> omegas;     // fixed chain parameters; both empty means "sample"
  std::vector<double> couplings;
  EnvironmentState environment = EnvironmentState::kZero;
  double dephasing_coupling = 1.0;
  int spectators = 0;

  // sweeps
  std::vector<double> mu_values;
  std::vector<double> sigma_values;
  std::vector<int> spectator_values;

  // grid
  double t_max = 5.0;
  int n_points = 101;
  std::optional<double> fd_step;  // empty = auto
  bool enforce_step_bound = true;

  // finite-difference study
  double t_probe = 0.4;
  std::vector<double> h_over_tau;
  FdPair fd_pair = FdPair::kHaar;

  // Monte Carlo
  int n_pairs = 200;
  std::uint64_t seed = 1;
  int bootstrap_resamples = 2000;
  double ci_level = 0.90;

  // execution
  int workers = 1;
  int max_qubits = 14;
  std::string out = "results";

  static ExperimentConfig defaults_for(Experiment e);

  /// Throws ConfigError for unknown keys or malformed values.
  void apply(const std::string& key, const std::string& value);
  /// Range checks across fields.
  void validate() const;

  /// Resolved configuration in a fixed key order. `include_execution` adds
  /// the keys that must not influence results (workers, out).
  std::vector<Setting> echo(bool include_execution) const;

  bool uses_fixed_chain() const { return !omegas.empty() || !couplings.empty(); }
};

/// Splits config text into settings; '#' starts a comment.
std::vector<Setting> parse_settings(const std::string& text);

/// Reads and parses a config file.
std::vector<Setting> read_settings_file(const std::string& path);

/// Defaults for the experiment named by `experiment` (or the last
/// "experiment" setting when empty), then every setting in order.
ExperimentConfig resolve_config(const std::vector<Setting>& settings,
                                std::optional<Experiment> experiment = std::nullopt);

}  // namespace nonmarkov::cli
