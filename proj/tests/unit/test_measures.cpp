#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "nonmarkov/measures.hpp"
#include "nonmarkov/model.hpp"
#include "nonmarkov/propagator.hpp"

using namespace nonmarkov;

namespace {

std::shared_ptr<const SpectralPropagator> dephasing_map(double j = 1.0, int spectators = 0) {
  const auto parts = build_dephasing_model(j, spectators);
  return std::make_shared<const SpectralPropagator>(SpectralPropagator::prepare(parts, PureState::uniform(1)));
}

PureState plus_state() { return PureState::uniform(1); }

PureState minus_state() {
  Vector v(2);
  v << 1.0, -1.0;
  return PureState::normalized(v);
}

/// rho(t) = (1 - a t) psi + a t I / 2, so D(t) = (1 - a t) D(0) on [0, 1/a].
FunctionMap linear_ramp(double a) {
  return FunctionMap(1, [a](const PureState& psi, double t) {
    const double keep = 1.0 - a * t;
    Matrix m = keep * psi.projector().entries();
    m.diagonal().array() += (1.0 - keep) / 2.0;
    return DensityMatrix(std::move(m));
  });
}

FluxTrace trace_of(std::vector<double> flux) {
  FluxTrace t;
  t.distances.assign(flux.size(), 0.0);
  t.flux = std::move(flux);
  return t;
}

}  // namespace

TEST(PairFlux, IdenticalStatesHaveNoFlux) {
  Rng rng(41);
  const auto psi = haar_random_state(1, rng);
  const auto trace = pair_flux(*dephasing_map(), psi, psi, TimeGrid{2.0, 21, 0.01});
  for (std::size_t i = 0; i < trace.flux.size(); ++i) {
    EXPECT_NEAR(trace.distances[i], 0.0, 1e-12);
    EXPECT_NEAR(trace.flux[i], 0.0, 1e-9);
  }
}

TEST(PairFlux, DephasingDistanceIsAbsoluteCosine) {
  const TimeGrid grid{std::numbers::pi, 101, 1e-4};
  const auto trace = pair_flux(*dephasing_map(), plus_state(), minus_state(), grid);
  for (int i = 0; i < grid.n_points; ++i) {
    EXPECT_NEAR(trace.distances[i], std::abs(std::cos(2.0 * grid.time(i))), 1e-10);
  }
  const TimeGrid at_one{2.0, 3, 1e-4};
  const auto probe = pair_flux(*dephasing_map(), plus_state(), minus_state(), at_one);
  // d/dt |cos 2t| at t = 1, where cos 2 < 0
  EXPECT_NEAR(probe.flux[1], 2.0 * std::sin(2.0), 1e-6);
}

TEST(PairFlux, DephasingBackflowIsTwo) {
  const TimeGrid grid{std::numbers::pi, 2001, 1e-4};
  const auto trace = pair_flux(*dephasing_map(), plus_state(), minus_state(), grid);
  EXPECT_NEAR(positive_backflow(trace, grid), 2.0, 0.02);
}

TEST(PairFlux, MarkovianDynamicsContracts) {
  Rng rng(42);
  const auto map = markovian_oracle(0.7, 2);
  const TimeGrid grid{5.0, 51, 0.01};
  for (int k = 0; k < 20; ++k) {
    const auto trace = pair_flux(*map, haar_random_state(2, rng), haar_random_state(2, rng), grid);
    for (std::size_t i = 0; i < trace.flux.size(); ++i) {
      EXPECT_LE(trace.flux[i], 1e-9);
      if (i > 0) EXPECT_LE(trace.distances[i], trace.distances[i - 1] + 1e-12);
    }
  }
}

TEST(PairFlux, LinearRampCentralDifferenceIsExact) {
  const auto map = linear_ramp(0.5);
  const TimeGrid grid{1.0, 11, 0.05};
  const auto trace = pair_flux(map, PureState::basis(1, 0), PureState::basis(1, 1), grid);
  for (double s : trace.flux) EXPECT_NEAR(s, -0.5, 1e-12);
}

TEST(PairFlux, RejectsWrongRegister) {
  EXPECT_THROW(pair_flux(*dephasing_map(), PureState::uniform(2), PureState::uniform(2), TimeGrid{}),
               std::invalid_argument);
}

TEST(Aggregate, SplitsPositiveAndNegativeParts) {
  const std::vector<FluxTrace> traces{trace_of({1.0, -1.0, 0.5}), trace_of({-1.0, -1.0, 0.5})};
  const auto agg = aggregate_flux(traces);
  EXPECT_EQ(agg.n_pairs, 2);
  const std::vector<double> avg{0.0, -1.0, 0.5};
  const std::vector<double> plus{0.5, 0.0, 0.5};
  const std::vector<double> minus{-0.5, -1.0, 0.0};
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(agg.sigma_avg[i], avg[i]);
    EXPECT_DOUBLE_EQ(agg.sigma_plus[i], plus[i]);
    EXPECT_DOUBLE_EQ(agg.sigma_minus[i], minus[i]);
  }
  EXPECT_EQ(agg.decomposition_defect(), 0.0);
  EXPECT_NO_THROW(agg.check_invariants());
  EXPECT_FALSE(agg.strongly_non_markovian(0));
  EXPECT_FALSE(agg.strongly_non_markovian(1));
  EXPECT_TRUE(agg.strongly_non_markovian(2));
  EXPECT_TRUE(agg.purely_non_markovian(2));
  EXPECT_FALSE(agg.purely_non_markovian(0));
}

TEST(Aggregate, RejectsEmptyAndRaggedInput) {
  EXPECT_THROW(aggregate_flux(std::vector<FluxTrace>{}), std::invalid_argument);
  const std::vector<FluxTrace> ragged{trace_of({1.0, 2.0}), trace_of({1.0})};
  EXPECT_THROW(aggregate_flux(ragged), std::invalid_argument);
}

TEST(Aggregate, CheckInvariantsCatchesBrokenDecomposition) {
  FluxAggregate agg;
  agg.sigma_avg = {0.1};
  agg.sigma_plus = {0.3};
  agg.sigma_minus = {-0.1};
  agg.n_pairs = 1;
  EXPECT_THROW(agg.check_invariants(), std::logic_error);
}

TEST(Integrate, TrapezoidIsExactForLinearFunctions) {
  const std::vector<double> ones(11, 1.0);
  EXPECT_DOUBLE_EQ(trapezoid(ones, 0.1), 1.0);
  std::vector<double> ramp(11);
  for (int i = 0; i < 11; ++i) ramp[i] = 0.1 * i;
  EXPECT_NEAR(trapezoid(ramp, 0.1), 0.5, 1e-15);
  EXPECT_EQ(trapezoid(std::vector<double>{3.0}, 0.1), 0.0);
}

TEST(Integrate, MeasuresFromHandBuiltTraces) {
  const TimeGrid grid{2.0, 3, 0.1};
  const std::vector<FluxTrace> traces{trace_of({1.0, -1.0, 1.0}), trace_of({-1.0, 1.0, -1.0})};
  const auto agg = aggregate_flux(traces);
  const auto r = integrate_measures(agg, traces, grid);
  // sigma_avg is zero; sigma_plus is 0.5 everywhere
  EXPECT_DOUBLE_EQ(r.n_avg, 0.0);
  EXPECT_DOUBLE_EQ(r.n_pure, 1.0);
  // pair 0: 0.5 + 0 + 0.5 = 1; pair 1: 0 + 1 + 0 = 1
  EXPECT_DOUBLE_EQ(r.n_blp_lower, 1.0);
  EXPECT_TRUE(r.jensen_chain_holds());
}

TEST(Integrate, CheckInvariantsRejectsBrokenOrdering) {
  MeasureResult r;
  r.n_avg = 0.2;
  r.n_pure = 0.1;
  r.n_blp_lower = 0.3;
  EXPECT_THROW(r.check_invariants(), std::logic_error);
}

TEST(TimeGrid, DefaultStepAndBound) {
  EXPECT_DOUBLE_EQ(default_fd_step(0.05, std::numeric_limits<double>::infinity()), 0.025);
  EXPECT_DOUBLE_EQ(default_fd_step(0.05, 0.1), 0.01);
  const GridSpec spec{5.0, 101, 0.05, true};
  EXPECT_THROW(spec.resolve(0.1), std::invalid_argument);
  GridSpec loose = spec;
  loose.enforce_step_bound = false;
  EXPECT_DOUBLE_EQ(loose.resolve(0.1).fd_step, 0.05);
  EXPECT_DOUBLE_EQ((GridSpec{5.0, 101, std::nullopt, true}).resolve(0.5).fd_step, 0.025);
  EXPECT_THROW((TimeGrid{5.0, 1, 0.01}).validate(1.0), std::invalid_argument);
  EXPECT_THROW((TimeGrid{5.0, 11, 0.0}).validate(1.0), std::invalid_argument);
}

TEST(Estimate, JensenChainAndDecompositionHold) {
  Rng rng(43);
  const auto parts = build_spin_chain(sample_disorder(DisorderSpec{}, 1, rng));
  const auto map = std::make_shared<const SpectralPropagator>(
      SpectralPropagator::prepare(parts, ground_environment(parts.partition)));
  const TimeGrid grid = GridSpec{5.0, 51}.resolve(parts.correlation_time);
  const auto est = estimate_measures(map, grid, EstimateOptions{40, 7, 1, 200});
  EXPECT_TRUE(est.result.jensen_chain_holds());
  EXPECT_LT(est.aggregate.decomposition_defect(), 1e-12);
  EXPECT_NO_THROW(est.aggregate.check_invariants());
  ASSERT_TRUE(est.result.ci_pure && est.result.ci_avg && est.result.ci_blp);
  EXPECT_TRUE(est.result.ci_pure->contains(est.result.n_pure));
}

TEST(Estimate, BlpLowerBoundGrowsWithSamples) {
  const TimeGrid grid{std::numbers::pi, 101, 0.005};
  const auto est = estimate_measures(dephasing_map(), grid, EstimateOptions{60, 3, 1, 100});
  double previous = 0.0;
  for (std::size_t k = 1; k <= est.traces.size(); ++k) {
    const std::span<const FluxTrace> prefix(est.traces.data(), k);
    const auto r = integrate_measures(aggregate_flux(prefix), prefix, grid);
    EXPECT_GE(r.n_blp_lower, previous);
    previous = r.n_blp_lower;
  }
}

TEST(Estimate, IndependentOfWorkerCount) {
  const TimeGrid grid{3.0, 61, 0.005};
  const auto a = estimate_measures(dephasing_map(1.0, 1), grid, EstimateOptions{50, 11, 1, 300});
  const auto b = estimate_measures(dephasing_map(1.0, 1), grid, EstimateOptions{50, 11, 4, 300});
  EXPECT_EQ(a.result.n_avg, b.result.n_avg);
  EXPECT_EQ(a.result.n_pure, b.result.n_pure);
  EXPECT_EQ(a.result.n_blp_lower, b.result.n_blp_lower);
  EXPECT_EQ(a.result.ci_pure->lower, b.result.ci_pure->lower);
  EXPECT_EQ(a.result.ci_avg->upper, b.result.ci_avg->upper);
  EXPECT_EQ(a.aggregate.sigma_plus, b.aggregate.sigma_plus);
}

TEST(Estimate, SeedChangesTheSample) {
  const TimeGrid grid{3.0, 31, 0.005};
  const auto a = estimate_measures(dephasing_map(), grid, EstimateOptions{20, 1, 1, 50});
  const auto b = estimate_measures(dephasing_map(), grid, EstimateOptions{20, 2, 1, 50});
  EXPECT_NE(a.result.n_pure, b.result.n_pure);
}

TEST(Estimate, CiWidthShrinksWithRootN) {
  // Doubling the pair count should shrink the CI by about 1/sqrt(2).
  const TimeGrid grid{std::numbers::pi, 101, 0.005};
  const auto map = dephasing_map();
  double small = 0.0;
  double large = 0.0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    small += estimate_measures(map, grid, EstimateOptions{100, 1000 + rep, 2, 500}).result.ci_pure->width();
    large += estimate_measures(map, grid, EstimateOptions{200, 2000 + rep, 2, 500}).result.ci_pure->width();
  }
  const double ratio = large / small;
  EXPECT_GT(ratio, 0.6);
  EXPECT_LT(ratio, 0.82);
}

TEST(Estimate, DephasingProbeShowsBackflow) {
  const TimeGrid grid{std::numbers::pi, 501, 1e-3};
  const auto est = estimate_measures(dephasing_map(), grid, EstimateOptions{500, 5, 4, 500});
  EXPECT_GT(est.result.n_pure, 0.5);
  EXPECT_TRUE(est.result.jensen_chain_holds());
}

TEST(Estimate, DephasingPureMeasureMatchesSphereAverage) {
  // Per pair, D(t) = |r| sqrt(z^2/|r|^2 + (1 - z^2/|r|^2) cos^2 2t) / 2 for the Bloch difference r,
  // so the backflow over [0, pi] is |r| - |z|. Over independent uniform Bloch vectors
  // E|r1 - r2| = 4/3 and E|z1 - z2| = 2/3, giving n_pure = 2/3.
  const TimeGrid grid{std::numbers::pi, 501, 1e-3};
  const auto est = estimate_measures(dephasing_map(), grid, EstimateOptions{10000, 12, 4, 200});
  // per-pair sd is about 0.35, so the standard error is 0.0035
  EXPECT_NEAR(est.result.n_pure, 2.0 / 3.0, 0.015);
}

TEST(Estimate, MarkovianOracleGivesZero) {
  const auto est = estimate_measures(markovian_oracle(0.5, 1), TimeGrid{5.0, 51, 0.01},
                                     EstimateOptions{50, 9, 2, 100});
  EXPECT_LE(est.result.n_avg, 1e-8);
  EXPECT_LE(est.result.n_pure, 1e-8);
  EXPECT_LE(est.result.n_blp_lower, 1e-8);
}

TEST(Estimate, RejectsBadOptions) {
  EXPECT_THROW(estimate_measures(dephasing_map(), TimeGrid{}, EstimateOptions{1}), std::invalid_argument);
  EXPECT_THROW(estimate_measures(dephasing_map(), TimeGrid{}, EstimateOptions{10, 0, 0}), std::invalid_argument);
}

TEST(Depolarizing, ClosedFormAndDomain) {
  DepolarizingSemigroup map(1.0, 1);
  const auto rho = map.evolve(PureState::basis(1, 0), std::log(2.0));
  EXPECT_NEAR(rho(0, 0).real(), 0.75, 1e-15);
  EXPECT_NEAR(rho(1, 1).real(), 0.25, 1e-15);
  EXPECT_THROW(map.evolve(PureState::basis(1, 0), -0.1), std::domain_error);
  EXPECT_THROW(DepolarizingSemigroup(0.0), std::invalid_argument);
}

TEST(FdConvergence, DephasingErrorIsSecondOrder) {
  const double tau = 1.0;
  std::vector<double> h;
  for (int k = 0; k <= 12; ++k) h.push_back(tau * std::pow(10.0, -3.0 + 0.25 * k));
  const auto study = fd_convergence_study(*dephasing_map(), plus_state(), minus_state(), 0.4, h, tau);
  // cos 0.8 > 0, so d/dt |cos 2t| = -2 sin 2t at t = 0.4
  EXPECT_NEAR(study.sigma_reference, -2.0 * std::sin(0.8), 1e-9);
  EXPECT_NEAR(study.log_log_slope(1e-3, 1e-1), 2.0, 0.3);
  EXPECT_GT(study.rows.back().relative_error, 10.0 * study.rows.front().relative_error);
}

TEST(FdConvergence, LinearRampHasNoTruncationError) {
  const auto map = linear_ramp(0.5);
  const std::vector<double> h{0.001, 0.01, 0.1};
  const auto study = fd_convergence_study(map, PureState::basis(1, 0), PureState::basis(1, 1), 0.4, h, 1.0);
  EXPECT_NEAR(study.sigma_reference, -0.5, 1e-9);
  for (const auto& row : study.rows) EXPECT_LT(row.relative_error, 1e-8);
}

TEST(FdConvergence, VanishingFluxIsAnError) {
  const std::vector<double> h{0.01};
  EXPECT_THROW(fd_convergence_study(*dephasing_map(), plus_state(), plus_state(), 0.4, h, 1.0), std::domain_error);
  EXPECT_THROW(fd_convergence_study(*dephasing_map(), plus_state(), minus_state(), 0.4, h,
                                    std::numeric_limits<double>::infinity()),
               std::invalid_argument);
}
