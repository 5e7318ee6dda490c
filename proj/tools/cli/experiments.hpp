#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli/config.hpp"
#include "nonmarkov/measures.hpp"
#include "nonmarkov/model.hpp"

namespace nonmarkov::cli {

inline constexpr const char* kSchemaVersion = "v1";

struct RunContext {
  std::ostream* progress = nullptr;  // human-readable progress, usually stderr
};

/// Everything one experiment produces. `csv` is deterministic given the
/// config (minus workers/out); `summary` additionally carries wall time.
struct ExperimentOutput {
  Experiment experiment = Experiment::kMeasure;
  std::string csv;
  nlohmann::json summary;
  std::vector<MeasureResult> results;
  /// Number of flux aggregates whose decomposition was checked.
  std::size_t aggregates_checked = 0;
  double max_decomposition_defect = 0.0;
  std::vector<ConvergenceStudy> studies;
};

/// Model plus Monte Carlo sampler for one configuration.
struct ModelSetup {
  DynamicsSource source;
  /// Hamiltonian reported in summaries. For an ensemble this is the
  /// disorder-free chain at the mean parameters.
  HamiltonianParts reference;
};

ModelSetup make_model(const ExperimentConfig& config);

ExperimentOutput run_measure(const ExperimentConfig& config, const RunContext& ctx = {});
ExperimentOutput run_sweep_mu(const ExperimentConfig& config, const RunContext& ctx = {});
ExperimentOutput run_sweep_sigma(const ExperimentConfig& config, const RunContext& ctx = {});
ExperimentOutput run_fd_convergence(const ExperimentConfig& config, const RunContext& ctx = {});
ExperimentOutput run_toy_scaling(const ExperimentConfig& config, const RunContext& ctx = {});

/// Dispatches on config.experiment.
ExperimentOutput run_experiment(const ExperimentConfig& config, const RunContext& ctx = {});

/// Writes <dir>/<experiment>.csv and <dir>/<experiment>.json, each through a
/// temporary file renamed into place.
void write_outputs(const ExperimentOutput& output, const std::string& dir);

}  // namespace nonmarkov::cli
