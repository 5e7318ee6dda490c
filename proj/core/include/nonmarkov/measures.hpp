#pragma once

// Information flux between evolving state pairs and the Monte Carlo measures
// built from it:
//
//   sigma(t)    = dD/dt for one pair, D the trace distance of the evolved pair
//   sigma_avg   = E[sigma],  sigma_plus = E[max(sigma, 0)],  sigma_minus = E[min(sigma, 0)]
//   n_avg       = ∫ max(sigma_avg, 0) dt
//   n_pure      = ∫ sigma_plus dt
//   n_blp_lower = max over sampled pairs of ∫ max(sigma, 0) dt
//
// Expectations run over independent Haar-random pure pairs. By construction
// n_avg <= n_pure <= n_blp_lower on every sample set.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "nonmarkov/propagator.hpp"
#include "nonmarkov/stats.hpp"

namespace nonmarkov {

/// Uniform grid t_i = i * t_max / (n_points - 1) plus the finite-difference step.
struct TimeGrid {
  double t_max = 5.0;
  int n_points = 101;
  double fd_step = 0.025;

  double spacing() const { return t_max / static_cast<double>(n_points - 1); }
  double time(int i) const { return static_cast<double>(i) * spacing(); }
  std::vector<double> times() const;

  /// Throws on a malformed grid. With `enforce_step_bound`, also requires
  /// fd_step <= 0.1 * tau_c when tau_c is finite.
  void validate(double correlation_time, bool enforce_step_bound = true) const;

  bool same_times(const TimeGrid& other) const {
    return t_max == other.t_max && n_points == other.n_points;
  }
};

inline constexpr double kStepToCorrelationTime = 0.1;

/// min(spacing / 2, 0.1 * tau_c); spacing / 2 alone when tau_c is infinite.
double default_fd_step(double spacing, double correlation_time);

/// Grid parameters whose step may be resolved per Hamiltonian.
struct GridSpec {
  double t_max = 5.0;
  int n_points = 101;
  std::optional<double> fd_step;  // empty: default_fd_step
  bool enforce_step_bound = true;

  TimeGrid resolve(double correlation_time) const;
};

struct FluxTrace {
  int pair_id = 0;
  double fd_step = 0.0;
  std::vector<double> distances;
  std::vector<double> flux;
};

struct FluxAggregate {
  std::vector<double> sigma_avg;
  std::vector<double> sigma_plus;
  std::vector<double> sigma_minus;
  std::vector<double> d_avg;
  int n_pairs = 0;

  /// max_i |sigma_avg - sigma_plus - sigma_minus|
  double decomposition_defect() const;
  /// Throws std::logic_error unless the decomposition holds within `tolerance`
  /// and the sign constraints on sigma_plus / sigma_minus hold.
  void check_invariants(double tolerance = 1e-12) const;

  /// Positive flux outweighs the negative flux at grid point i.
  bool strongly_non_markovian(std::size_t i) const;
  /// Positive flux present with no negative contribution at grid point i.
  bool purely_non_markovian(std::size_t i) const;
};

struct MeasureResult {
  double n_avg = 0.0;
  double n_pure = 0.0;
  double n_blp_lower = 0.0;
  std::optional<ConfidenceInterval> ci_avg;
  std::optional<ConfidenceInterval> ci_pure;
  std::optional<ConfidenceInterval> ci_blp;
  int n_pairs = 0;
  std::uint64_t seed = 0;

  bool jensen_chain_holds(double slack = 1e-12) const {
    return n_avg <= n_pure + slack && n_pure <= n_blp_lower + slack;
  }
  /// Throws std::logic_error when jensen_chain_holds(slack) is false.
  void check_invariants(double slack = 1e-12) const;
};

/// Composite trapezoid rule on a uniform grid.
double trapezoid(std::span<const double> values, double spacing);

/// ∫ max(sigma, 0) dt for one pair.
double positive_backflow(const FluxTrace& trace, const TimeGrid& grid);

/// Distances on the grid and their central-difference derivative. The first
/// point uses a forward difference since the map is not defined before t = 0.
FluxTrace pair_flux(const DynamicalMap& dynamics, const PureState& psi1, const PureState& psi2,
                    const TimeGrid& grid, int pair_id = 0);

FluxAggregate aggregate_flux(std::span<const FluxTrace> traces);

MeasureResult integrate_measures(const FluxAggregate& aggregate, std::span<const FluxTrace> traces,
                                 const TimeGrid& grid);

struct EstimateOptions {
  int n_pairs = 200;
  std::uint64_t seed = 0;
  int workers = 1;
  int n_resamples = kDefaultResamples;
  double ci_level = kDefaultCiLevel;
};

struct Estimation {
  MeasureResult result;
  FluxAggregate aggregate;
  std::vector<FluxTrace> traces;
};

/// Dynamics for one Monte Carlo sample. A fixed model returns the same map
/// every time; a disordered model draws a fresh realization from `rng`.
struct SampleDynamics {
  std::shared_ptr<const DynamicalMap> map;
  double correlation_time = 0.0;
};
using DynamicsSource = std::function<SampleDynamics(Rng& rng)>;

/// Monte Carlo estimate over n_pairs samples. Sample p uses the stream
/// (seed, p): first the source draws its dynamics, then psi1 and psi2 are
/// drawn Haar-random. Results do not depend on `workers`.
Estimation estimate_measures(const DynamicsSource& source, const GridSpec& grid,
                             const EstimateOptions& options);

/// Fixed dynamics on a fixed grid.
Estimation estimate_measures(std::shared_ptr<const DynamicalMap> dynamics, const TimeGrid& grid,
                             const EstimateOptions& options);

/// Depolarizing semigroup rho(t) = e^{-rate t} rho + (1 - e^{-rate t}) I / d.
/// Closed form; defined for t >= 0.
class DepolarizingSemigroup final : public DynamicalMap {
 public:
  DepolarizingSemigroup(double rate, int num_qubits = 1);

  int system_qubits() const override { return num_qubits_; }
  double rate() const { return rate_; }

  DensityMatrix apply(const DensityMatrix& rho, double t) const;
  DensityMatrix evolve(const PureState& system_state, double t) const override;

 private:
  double rate_;
  int num_qubits_;
};

std::shared_ptr<const DynamicalMap> markovian_oracle(double rate, int num_qubits = 1);

struct ConvergenceRow {
  double h = 0.0;
  double h_over_tau = 0.0;
  double sigma = 0.0;
  double relative_error = 0.0;
};

struct ConvergenceStudy {
  double t_probe = 0.0;
  double correlation_time = 0.0;
  double sigma_reference = 0.0;
  std::vector<ConvergenceRow> rows;

  /// Least-squares slope of log(relative_error) against log(h / tau_c) over
  /// rows with h / tau_c in [lo, hi] and nonzero error.
  double log_log_slope(double lo, double hi) const;
};

/// Central-difference error against a Richardson-extrapolated reference
/// (central differences at h0 and h0 / 2, h0 = min(h_values) / 4). Throws
/// std::domain_error when |reference| < 1e-12.
ConvergenceStudy fd_convergence_study(const DynamicalMap& dynamics, const PureState& psi1,
                                      const PureState& psi2, double t_probe,
                                      std::span<const double> h_values, double correlation_time);

}  // namespace nonmarkov
