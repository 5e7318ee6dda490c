#include "nonmarkov/measures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace nonmarkov {

namespace {

// Bootstrap streams live far above any pair index.
constexpr std::uint64_t kBootstrapStreamBase = std::uint64_t{1} << 62;

std::vector<double> positive_part(std::span<const double> v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::max(x, 0.0); });
  return out;
}

std::vector<double> mean_flux(std::span<const FluxTrace> traces,
                              std::span<const std::size_t> indices) {
  std::vector<double> acc(traces[indices.front()].flux.size(), 0.0);
  for (std::size_t i : indices) {
    const auto& f = traces[i].flux;
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += f[k];
  }
  const double n = static_cast<double>(indices.size());
  for (auto& a : acc) a /= n;
  return acc;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grids

std::vector<double> TimeGrid::times() const {
  std::vector<double> ts(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) ts[static_cast<std::size_t>(i)] = time(i);
  return ts;
}

void TimeGrid::validate(double correlation_time, bool enforce_step_bound) const {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("t_max must be positive");
  if (n_points < 2) throw std::invalid_argument("time grid needs at least two points");
  if (!(fd_step > 0.0) || !std::isfinite(fd_step)) {
    throw std::invalid_argument("finite-difference step must be positive");
  }
  if (enforce_step_bound && std::isfinite(correlation_time) &&
      fd_step > kStepToCorrelationTime * correlation_time * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "finite-difference step " << fd_step << " exceeds 0.1 * tau_c = "
       << kStepToCorrelationTime * correlation_time;
    throw std::invalid_argument(os.str());
  }
}

double default_fd_step(double spacing, double correlation_time) {
  const double half = 0.5 * spacing;
  if (!std::isfinite(correlation_time)) return half;
  return std::min(half, kStepToCorrelationTime * correlation_time);
}

TimeGrid GridSpec::resolve(double correlation_time) const {
  TimeGrid grid{t_max, n_points, 0.0};
  if (n_points < 2) throw std::invalid_argument("time grid needs at least two points");
  grid.fd_step = fd_step ? *fd_step : default_fd_step(grid.spacing(), correlation_time);
  grid.validate(correlation_time, enforce_step_bound);
  return grid;
}

// ---------------------------------------------------------------------------
// Flux

double trapezoid(std::span<const double> values, double spacing) {
  if (values.size() < 2) return 0.0;
  double interior = 0.0;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) interior += values[i];
  return spacing * (0.5 * (values.front() + values.back()) + interior);
}

double positive_backflow(const FluxTrace& trace, const TimeGrid& grid) {
  return trapezoid(positive_part(trace.flux), grid.spacing());
}

FluxTrace pair_flux(const DynamicalMap& dynamics, const PureState& psi1, const PureState& psi2,
                    const TimeGrid& grid, int pair_id) {
  grid.validate(std::numeric_limits<double>::infinity(), false);
  if (psi1.num_qubits() != dynamics.system_qubits() || psi2.num_qubits() != dynamics.system_qubits()) {
    throw std::invalid_argument("pair_flux: states do not live on the system register");
  }
  const Trajectory rho1 = dynamics.trajectory(psi1);
  const Trajectory rho2 = dynamics.trajectory(psi2);
  const auto distance = [&](double t) { return trace_distance(rho1(t), rho2(t)); };

  const double h = grid.fd_step;
  const auto n = static_cast<std::size_t>(grid.n_points);
  FluxTrace trace;
  trace.pair_id = pair_id;
  trace.fd_step = h;
  trace.distances.resize(n);
  trace.flux.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid.time(static_cast<int>(i));
    const double d = distance(t);
    trace.distances[i] = d;
    trace.flux[i] = i == 0 ? (distance(t + h) - d) / h
                           : (distance(t + h) - distance(t - h)) / (2.0 * h);
  }
  return trace;
}

double FluxAggregate::decomposition_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < sigma_avg.size(); ++i) {
    worst = std::max(worst, std::abs(sigma_avg[i] - sigma_plus[i] - sigma_minus[i]));
  }
  return worst;
}

void FluxAggregate::check_invariants(double tolerance) const {
  if (decomposition_defect() > tolerance) {
    throw std::logic_error("sigma_avg != sigma_plus + sigma_minus");
  }
  for (std::size_t i = 0; i < sigma_avg.size(); ++i) {
    if (sigma_plus[i] < 0.0 || sigma_minus[i] > 0.0) {
      throw std::logic_error("flux parts have the wrong sign");
    }
  }
}

bool FluxAggregate::strongly_non_markovian(std::size_t i) const {
  return sigma_plus.at(i) > std::abs(sigma_minus.at(i));
}

bool FluxAggregate::purely_non_markovian(std::size_t i) const {
  return sigma_plus.at(i) > 0.0 && sigma_minus.at(i) == 0.0;
}

FluxAggregate aggregate_flux(std::span<const FluxTrace> traces) {
  if (traces.empty()) throw std::invalid_argument("aggregate_flux: no traces");
  const std::size_t n = traces.front().flux.size();
  for (const auto& t : traces) {
    if (t.flux.size() != n || t.distances.size() != n) {
      throw std::invalid_argument("aggregate_flux: traces live on different grids");
    }
  }
  FluxAggregate agg;
  agg.n_pairs = static_cast<int>(traces.size());
  agg.sigma_avg.assign(n, 0.0);
  agg.sigma_plus.assign(n, 0.0);
  agg.sigma_minus.assign(n, 0.0);
  agg.d_avg.assign(n, 0.0);
  for (const auto& t : traces) {
    for (std::size_t i = 0; i < n; ++i) {
      const double s = t.flux[i];
      agg.sigma_avg[i] += s;
      agg.sigma_plus[i] += std::max(s, 0.0);
      agg.sigma_minus[i] += std::min(s, 0.0);
      agg.d_avg[i] += t.distances[i];
    }
  }
  const double count = static_cast<double>(traces.size());
  for (std::size_t i = 0; i < n; ++i) {
    agg.sigma_avg[i] /= count;
    agg.sigma_plus[i] /= count;
    agg.sigma_minus[i] /= count;
    agg.d_avg[i] /= count;
  }
  return agg;
}

MeasureResult integrate_measures(const FluxAggregate& aggregate, std::span<const FluxTrace> traces,
                                 const TimeGrid& grid) {
  const auto n = static_cast<std::size_t>(grid.n_points);
  if (aggregate.sigma_avg.size() != n) throw std::invalid_argument("integrate_measures: grid mismatch");
  if (traces.empty()) throw std::invalid_argument("integrate_measures: no traces");
  MeasureResult r;
  r.n_pairs = aggregate.n_pairs;
  r.n_avg = trapezoid(positive_part(aggregate.sigma_avg), grid.spacing());
  r.n_pure = trapezoid(aggregate.sigma_plus, grid.spacing());
  for (const auto& t : traces) {
    if (t.flux.size() != n) throw std::invalid_argument("integrate_measures: grid mismatch");
    r.n_blp_lower = std::max(r.n_blp_lower, positive_backflow(t, grid));
  }
  return r;
}

void MeasureResult::check_invariants(double slack) const {
  if (!jensen_chain_holds(slack)) {
    std::ostringstream os;
    os.precision(17);
    os << "ordering n_avg <= n_pure <= n_blp_lower violated: " << n_avg << ", " << n_pure << ", "
       << n_blp_lower;
    throw std::logic_error(os.str());
  }
}

// ---------------------------------------------------------------------------
// Monte Carlo driver

namespace {

Estimation run_estimation(const DynamicsSource& source,
                          const std::function<TimeGrid(double)>& resolve_grid,
                          const TimeGrid& reference_grid, const EstimateOptions& options) {
  if (options.n_pairs < 2) throw std::invalid_argument("estimate_measures needs n_pairs >= 2");
  if (options.workers < 1) throw std::invalid_argument("workers must be positive");

  const auto n_pairs = static_cast<std::size_t>(options.n_pairs);
  std::vector<FluxTrace> traces(n_pairs);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t p = next++; p < n_pairs; p = next++) {
      try {
        Rng rng = make_stream(options.seed, p);
        const SampleDynamics sample = source(rng);
        const TimeGrid grid = resolve_grid(sample.correlation_time);
        const int nq = sample.map->system_qubits();
        const PureState psi1 = haar_random_state(nq, rng);
        const PureState psi2 = haar_random_state(nq, rng);
        traces[p] = pair_flux(*sample.map, psi1, psi2, grid, static_cast<int>(p));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n_pairs;
      }
    }
  };
  {
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(options.workers), n_pairs);
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < n_threads; ++w) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);

  Estimation out;
  out.aggregate = aggregate_flux(traces);
  out.result = integrate_measures(out.aggregate, traces, reference_grid);
  out.result.seed = options.seed;

  std::vector<double> backflow(n_pairs);
  for (std::size_t p = 0; p < n_pairs; ++p) backflow[p] = positive_backflow(traces[p], reference_grid);

  Rng rng_pure = make_stream(options.seed, kBootstrapStreamBase + 0);
  out.result.ci_pure = bootstrap_ci(
      backflow, [](std::span<const double> xs) { return mean(xs); }, options.ci_level,
      options.n_resamples, rng_pure);

  Rng rng_blp = make_stream(options.seed, kBootstrapStreamBase + 1);
  out.result.ci_blp = bootstrap_ci(
      backflow, [](std::span<const double> xs) { return *std::max_element(xs.begin(), xs.end()); },
      options.ci_level, options.n_resamples, rng_blp);

  Rng rng_avg = make_stream(options.seed, kBootstrapStreamBase + 2);
  const double spacing = reference_grid.spacing();
  out.result.ci_avg = bootstrap_ci(
      n_pairs,
      [&](std::span<const std::size_t> idx) {
        return trapezoid(positive_part(mean_flux(traces, idx)), spacing);
      },
      options.ci_level, options.n_resamples, rng_avg);

  out.traces = std::move(traces);
  return out;
}

}  // namespace

Estimation estimate_measures(const DynamicsSource& source, const GridSpec& grid,
                             const EstimateOptions& options) {
  TimeGrid reference{grid.t_max, grid.n_points, 1.0};
  reference.validate(std::numeric_limits<double>::infinity(), false);
  return run_estimation(
      source, [&](double tau) { return grid.resolve(tau); }, reference, options);
}

Estimation estimate_measures(std::shared_ptr<const DynamicalMap> dynamics, const TimeGrid& grid,
                             const EstimateOptions& options) {
  if (!dynamics) throw std::invalid_argument("estimate_measures: null dynamics");
  grid.validate(std::numeric_limits<double>::infinity(), false);
  const DynamicsSource fixed = [&](Rng&) {
    return SampleDynamics{dynamics, std::numeric_limits<double>::infinity()};
  };
  return run_estimation(
      fixed, [&](double) { return grid; }, grid, options);
}

// ---------------------------------------------------------------------------
// Markovian reference dynamics

DepolarizingSemigroup::DepolarizingSemigroup(double rate, int num_qubits)
    : rate_(rate), num_qubits_(num_qubits) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("depolarizing rate must be positive");
  if (num_qubits < 1) throw std::invalid_argument("num_qubits must be positive");
  check_qubit_cap(num_qubits);
}

DensityMatrix DepolarizingSemigroup::apply(const DensityMatrix& rho, double t) const {
  if (!(t >= 0.0)) throw std::domain_error("depolarizing semigroup is defined for t >= 0 only");
  if (rho.num_qubits() != num_qubits_) throw std::invalid_argument("state size mismatch");
  const double keep = std::exp(-rate_ * t);
  const auto dim = rho.dimension();
  Matrix out = keep * rho.entries();
  out.diagonal().array() += (1.0 - keep) / static_cast<double>(dim);
  return DensityMatrix(std::move(out));
}

DensityMatrix DepolarizingSemigroup::evolve(const PureState& system_state, double t) const {
  return apply(system_state.projector(), t);
}

std::shared_ptr<const DynamicalMap> markovian_oracle(double rate, int num_qubits) {
  return std::make_shared<const DepolarizingSemigroup>(rate, num_qubits);
}

// ---------------------------------------------------------------------------
// Finite-difference convergence

double ConvergenceStudy::log_log_slope(double lo, double hi) const {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& row : rows) {
    if (row.h_over_tau < lo * (1.0 - 1e-9) || row.h_over_tau > hi * (1.0 + 1e-9)) continue;
    if (!(row.relative_error > 0.0)) continue;
    x.push_back(std::log(row.h_over_tau));
    y.push_back(std::log(row.relative_error));
  }
  return fitted_slope(x, y);
}

ConvergenceStudy fd_convergence_study(const DynamicalMap& dynamics, const PureState& psi1,
                                      const PureState& psi2, double t_probe,
                                      std::span<const double> h_values, double correlation_time) {
  if (h_values.empty()) throw std::invalid_argument("fd_convergence_study: no step sizes");
  if (!(correlation_time > 0.0) || !std::isfinite(correlation_time)) {
    throw std::invalid_argument("fd_convergence_study: correlation time must be finite and positive");
  }
  for (double h : h_values) {
    if (!(h > 0.0)) throw std::invalid_argument("fd_convergence_study: step sizes must be positive");
  }
  const Trajectory rho1 = dynamics.trajectory(psi1);
  const Trajectory rho2 = dynamics.trajectory(psi2);
  const auto central = [&](double h) {
    const double up = trace_distance(rho1(t_probe + h), rho2(t_probe + h));
    const double down = trace_distance(rho1(t_probe - h), rho2(t_probe - h));
    return (up - down) / (2.0 * h);
  };

  const double h0 = *std::min_element(h_values.begin(), h_values.end()) / 4.0;
  const double reference = (4.0 * central(0.5 * h0) - central(h0)) / 3.0;
  if (std::abs(reference) < 1e-12) {
    throw std::domain_error("fd_convergence_study: flux vanishes at the probe time; choose another t_probe");
  }

  ConvergenceStudy study;
  study.t_probe = t_probe;
  study.correlation_time = correlation_time;
  study.sigma_reference = reference;
  for (double h : h_values) {
    const double s = central(h);
    study.rows.push_back({h, h / correlation_time, s, std::abs(s - reference) / std::abs(reference)});
  }
  return study;
}

}  // namespace nonmarkov
