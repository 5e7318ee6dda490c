#include "cli/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cli/format.hpp"
#include "nonmarkov/propagator.hpp"
#include "nonmarkov/stats.hpp"

namespace nonmarkov::cli {

namespace {

// Stream reserved for a single frozen disorder draw; pair streams count up from 0.
constexpr std::uint64_t kFrozenDisorderStream = (std::uint64_t{1} << 62) + 100;

PureState environment_state(EnvironmentState kind, int qubits) {
  return kind == EnvironmentState::kZero ? PureState::basis(qubits, 0) : PureState::uniform(qubits);
}

SampleDynamics fixed_dynamics(const HamiltonianParts& parts, EnvironmentState env) {
  auto prop = std::make_shared<const SpectralPropagator>(SpectralPropagator::prepare(
      parts, environment_state(env, parts.partition.environment_qubits())));
  return {std::move(prop), parts.correlation_time};
}

SpinChainParams mean_chain(const ExperimentConfig& c) {
  SpinChainParams p;
  p.n_system = c.n_system;
  p.omegas.assign(static_cast<std::size_t>(2 * c.n_system + 1), c.omega_mean);
  p.couplings.assign(static_cast<std::size_t>(2 * c.n_system), c.coupling_mean);
  return p;
}

GridSpec grid_spec(const ExperimentConfig& c) {
  return GridSpec{c.t_max, c.n_points, c.fd_step, c.enforce_step_bound};
}

EstimateOptions estimate_options(const ExperimentConfig& c) {
  return EstimateOptions{c.n_pairs, c.seed, c.workers, c.bootstrap_resamples, c.ci_level};
}

std::string csv_preamble(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "# schema: nonmarkov." << to_string(c.experiment) << '.' << kSchemaVersion << '\n';
  for (const auto& [k, v] : c.echo(false)) os << "# " << k << " = " << v << '\n';
  return os.str();
}

nlohmann::json ci_json(double value, const std::optional<ConfidenceInterval>& ci) {
  nlohmann::json j{{"value", value}};
  if (ci) {
    j["ci_lower"] = ci->lower;
    j["ci_upper"] = ci->upper;
    j["ci_level"] = ci->level;
  }
  return j;
}

nlohmann::json finite_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

nlohmann::json summary_head(const ExperimentConfig& c) {
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [k, v] : c.echo(true)) config[k] = v;
  return nlohmann::json{{"schema", "nonmarkov." + to_string(c.experiment) + ".summary." + kSchemaVersion},
                        {"experiment", to_string(c.experiment)},
                        {"seed", c.seed},
                        {"config", config}};
}

nlohmann::json model_json(const HamiltonianParts& parts) {
  return {{"qubits", parts.num_qubits()},
          {"system_qubits", parts.partition.system_qubits()},
          {"noise_strength", parts.noise_strength},
          {"correlation_time", finite_or_null(parts.correlation_time)}};
}

struct PointRun {
  Estimation estimation;
  HamiltonianParts reference;
};

PointRun estimate_point(const ExperimentConfig& c, ExperimentOutput& out) {
  ModelSetup setup = make_model(c);
  Estimation est = estimate_measures(setup.source, grid_spec(c), estimate_options(c));
  est.aggregate.check_invariants(1e-12);
  est.result.check_invariants(1e-12);
  out.aggregates_checked += 1;
  out.max_decomposition_defect = std::max(out.max_decomposition_defect, est.aggregate.decomposition_defect());
  out.results.push_back(est.result);
  return {std::move(est), std::move(setup.reference)};
}

nlohmann::json point_json(const PointRun& run) {
  const auto& r = run.estimation.result;
  double h_min = std::numeric_limits<double>::infinity();
  double h_max = 0.0;
  for (const auto& t : run.estimation.traces) {
    h_min = std::min(h_min, t.fd_step);
    h_max = std::max(h_max, t.fd_step);
  }
  return {{"n_pairs", r.n_pairs},
          {"model", model_json(run.reference)},
          {"fd_step_min", h_min},
          {"fd_step_max", h_max},
          {"n_avg", ci_json(r.n_avg, r.ci_avg)},
          {"n_pure", ci_json(r.n_pure, r.ci_pure)},
          {"n_blp_lower", ci_json(r.n_blp_lower, r.ci_blp)}};
}

void report(const RunContext& ctx, const std::string& what) {
  if (ctx.progress) *ctx.progress << "[nonmarkov] " << what << std::endl;
}

std::string point_message(const std::string& label, const MeasureResult& r) {
  std::ostringstream os;
  os << label << ": n_avg=" << r.n_avg << " n_pure=" << r.n_pure << " n_blp_lower=" << r.n_blp_lower;
  return os.str();
}

ExperimentOutput run_sweep(const ExperimentConfig& config, const RunContext& ctx,
                           const std::vector<double>& values, const char* column,
                           double ExperimentConfig::*field) {
  ExperimentOutput out;
  out.experiment = config.experiment;
  out.summary = summary_head(config);
  std::ostringstream csv;
  csv << csv_preamble(config);
  csv << column << ",n_avg,n_avg_ci_lo,n_avg_ci_hi,n_pure,n_pure_ci_lo,n_pure_ci_hi\n";
  nlohmann::json points = nlohmann::json::array();
  for (double value : values) {
    ExperimentConfig point = config;
    point.*field = value;
    const PointRun run = estimate_point(point, out);
    const auto& r = run.estimation.result;
    csv << format_double(value) << ',' << format_double(r.n_avg) << ',' << format_double(r.ci_avg->lower)
        << ',' << format_double(r.ci_avg->upper) << ',' << format_double(r.n_pure) << ','
        << format_double(r.ci_pure->lower) << ',' << format_double(r.ci_pure->upper) << '\n';
    nlohmann::json p = point_json(run);
    p[column] = value;
    points.push_back(std::move(p));
    report(ctx, point_message(std::string(column) + "=" + format_double(value), r));
  }
  out.summary["points"] = std::move(points);
  out.csv = csv.str();
  return out;
}

}  // namespace

ModelSetup make_model(const ExperimentConfig& c) {
  if (c.model == ModelKind::kDephasing) {
    HamiltonianParts parts = build_dephasing_model(c.dephasing_coupling, c.spectators);
    const SampleDynamics fixed = fixed_dynamics(parts, c.environment);
    return {[fixed](Rng&) { return fixed; }, std::move(parts)};
  }

  if (c.uses_fixed_chain()) {
    SpinChainParams params{c.n_system, c.omegas, c.couplings};
    HamiltonianParts parts = build_spin_chain(params);
    const SampleDynamics fixed = fixed_dynamics(parts, c.environment);
    return {[fixed](Rng&) { return fixed; }, std::move(parts)};
  }

  const DisorderSpec spec{c.omega_mean, c.omega_std, c.coupling_mean, c.coupling_std};
  spec.validate();
  if (c.disorder == DisorderMode::kFrozen) {
    Rng rng = make_stream(c.seed, kFrozenDisorderStream);
    HamiltonianParts parts = build_spin_chain(sample_disorder(spec, c.n_system, rng));
    const SampleDynamics fixed = fixed_dynamics(parts, c.environment);
    return {[fixed](Rng&) { return fixed; }, std::move(parts)};
  }

  const int n_system = c.n_system;
  const EnvironmentState env = c.environment;
  DynamicsSource source = [spec, n_system, env](Rng& rng) {
    return fixed_dynamics(build_spin_chain(sample_disorder(spec, n_system, rng)), env);
  };
  return {std::move(source), build_spin_chain(mean_chain(c))};
}

ExperimentOutput run_measure(const ExperimentConfig& config, const RunContext& ctx) {
  ExperimentOutput out;
  out.experiment = Experiment::kMeasure;
  const PointRun run = estimate_point(config, out);
  const auto& agg = run.estimation.aggregate;
  const TimeGrid grid{config.t_max, config.n_points, 1.0};

  std::ostringstream csv;
  csv << csv_preamble(config);
  csv << "t,sigma_avg,sigma_plus,sigma_minus,d_avg\n";
  for (int i = 0; i < config.n_points; ++i) {
    const auto k = static_cast<std::size_t>(i);
    csv << format_double(grid.time(i)) << ',' << format_double(agg.sigma_avg[k]) << ','
        << format_double(agg.sigma_plus[k]) << ',' << format_double(agg.sigma_minus[k]) << ','
        << format_double(agg.d_avg[k]) << '\n';
  }
  out.csv = csv.str();
  out.summary = summary_head(config);
  out.summary["result"] = point_json(run);
  report(ctx, point_message("measure", run.estimation.result));
  return out;
}

ExperimentOutput run_sweep_mu(const ExperimentConfig& config, const RunContext& ctx) {
  return run_sweep(config, ctx, config.mu_values, "mu", &ExperimentConfig::coupling_mean);
}

ExperimentOutput run_sweep_sigma(const ExperimentConfig& config, const RunContext& ctx) {
  return run_sweep(config, ctx, config.sigma_values, "sigma_j", &ExperimentConfig::coupling_std);
}

ExperimentOutput run_fd_convergence(const ExperimentConfig& config, const RunContext& ctx) {
  ExperimentOutput out;
  out.experiment = Experiment::kFdConvergence;
  ModelSetup setup = make_model(config);
  Rng rng = make_stream(config.seed, 0);
  const SampleDynamics sample = setup.source(rng);
  const double tau = sample.correlation_time;
  if (!std::isfinite(tau)) throw std::invalid_argument("fd-convergence needs a model with interaction (finite tau_c)");

  const int nq = sample.map->system_qubits();
  auto make_pair = [&]() -> std::pair<PureState, PureState> {
    if (config.fd_pair == FdPair::kHaar) {
      PureState a = haar_random_state(nq, rng);
      PureState b = haar_random_state(nq, rng);
      return {std::move(a), std::move(b)};
    }
    // |+>|0...0> and |->|0...0> on the system register
    const auto dim = Eigen::Index{1} << nq;
    Vector plus = Vector::Zero(dim);
    Vector minus = Vector::Zero(dim);
    plus[0] = minus[0] = 1.0;
    plus[dim / 2] = 1.0;
    minus[dim / 2] = -1.0;
    return {PureState::normalized(plus), PureState::normalized(minus)};
  };
  const auto [psi1, psi2] = make_pair();

  std::vector<double> h_values;
  for (double r : config.h_over_tau) h_values.push_back(r * tau);
  ConvergenceStudy study = fd_convergence_study(*sample.map, psi1, psi2, config.t_probe, h_values, tau);

  std::ostringstream csv;
  csv << csv_preamble(config);
  csv << "h_over_tau,relative_error\n";
  for (const auto& row : study.rows) {
    csv << format_double(row.h_over_tau) << ',' << format_double(row.relative_error) << '\n';
  }
  out.csv = csv.str();

  out.summary = summary_head(config);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : study.rows) {
    rows.push_back({{"h", row.h}, {"h_over_tau", row.h_over_tau}, {"sigma", row.sigma},
                    {"relative_error", row.relative_error}});
  }
  out.summary["correlation_time"] = tau;
  out.summary["noise_strength"] = 1.0 / tau;
  out.summary["t_probe"] = config.t_probe;
  out.summary["sigma_reference"] = study.sigma_reference;
  out.summary["rows"] = std::move(rows);
  try {
    out.summary["log_log_slope_1e-3_1e-1"] = study.log_log_slope(1e-3, 1e-1);
  } catch (const std::invalid_argument&) {
    out.summary["log_log_slope_1e-3_1e-1"] = nullptr;
  }
  report(ctx, "fd-convergence: reference sigma=" + format_double(study.sigma_reference));
  out.studies.push_back(std::move(study));
  return out;
}

ExperimentOutput run_toy_scaling(const ExperimentConfig& config, const RunContext& ctx) {
  ExperimentOutput out;
  out.experiment = Experiment::kToyScaling;
  out.summary = summary_head(config);
  std::ostringstream csv;
  csv << csv_preamble(config);
  csv << "n_spectators,n_avg,n_pure,n_blp_lower\n";
  nlohmann::json points = nlohmann::json::array();
  for (int s : config.spectator_values) {
    ExperimentConfig point = config;
    point.spectators = s;
    const PointRun run = estimate_point(point, out);
    const auto& r = run.estimation.result;
    csv << s << ',' << format_double(r.n_avg) << ',' << format_double(r.n_pure) << ','
        << format_double(r.n_blp_lower) << '\n';
    nlohmann::json p = point_json(run);
    p["n_spectators"] = s;
    points.push_back(std::move(p));
    report(ctx, point_message("spectators=" + std::to_string(s), r));
  }
  out.summary["points"] = std::move(points);
  out.csv = csv.str();
  return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& config, const RunContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentOutput out;
  switch (config.experiment) {
    case Experiment::kMeasure: out = run_measure(config, ctx); break;
    case Experiment::kSweepMu: out = run_sweep_mu(config, ctx); break;
    case Experiment::kSweepSigma: out = run_sweep_sigma(config, ctx); break;
    case Experiment::kFdConvergence: out = run_fd_convergence(config, ctx); break;
    case Experiment::kToyScaling: out = run_toy_scaling(config, ctx); break;
  }
  out.summary["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void write_outputs(const ExperimentOutput& output, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  fs::create_directories(base);
  const std::string stem = to_string(output.experiment);
  const auto write_atomic = [](const fs::path& target, const std::string& content) {
    fs::path tmp = target;
    tmp += ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
      f << content;
      f.flush();
      if (!f) throw std::runtime_error("failed writing " + tmp.string());
    }
    fs::rename(tmp, target);
  };
  write_atomic(base / (stem + ".csv"), output.csv);
  write_atomic(base / (stem + ".json"), output.summary.dump(2) + "\n");
}

}  // namespace nonmarkov::cli
