#include <memory>

#include <benchmark/benchmark.h>

#include "nonmarkov/measures.hpp"
#include "nonmarkov/model.hpp"
#include "nonmarkov/propagator.hpp"

using namespace nonmarkov;

namespace {

SpectralPropagator chain_propagator(int n_system) {
  Rng rng = make_stream(1, 0);
  const auto parts = build_spin_chain(sample_disorder(DisorderSpec{}, n_system, rng));
  return SpectralPropagator::prepare(parts, ground_environment(parts.partition));
}

void BM_Prepare(benchmark::State& state) {
  Rng rng = make_stream(1, 0);
  const auto parts = build_spin_chain(sample_disorder(DisorderSpec{}, static_cast<int>(state.range(0)), rng));
  const auto env = ground_environment(parts.partition);
  for (auto _ : state) benchmark::DoNotOptimize(SpectralPropagator::prepare(parts, env));
}
BENCHMARK(BM_Prepare)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_TrajectoryStep(benchmark::State& state) {
  const auto prop = chain_propagator(static_cast<int>(state.range(0)));
  Rng rng = make_stream(2, 0);
  const auto traj = prop.trajectory(haar_random_state(prop.system_qubits(), rng));
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(traj(t));
    t += 0.01;
  }
}
BENCHMARK(BM_TrajectoryStep)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);

void BM_TraceDistance(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng = make_stream(3, 0);
  const auto a = haar_random_state(n, rng).projector();
  const auto b = haar_random_state(n, rng).projector();
  for (auto _ : state) benchmark::DoNotOptimize(trace_distance(a, b));
}
BENCHMARK(BM_TraceDistance)->DenseRange(1, 6);

void BM_PairFlux(benchmark::State& state) {
  const auto prop = chain_propagator(static_cast<int>(state.range(0)));
  Rng rng = make_stream(4, 0);
  const auto psi1 = haar_random_state(prop.system_qubits(), rng);
  const auto psi2 = haar_random_state(prop.system_qubits(), rng);
  const TimeGrid grid{5.0, 101, 0.01};
  for (auto _ : state) benchmark::DoNotOptimize(pair_flux(prop, psi1, psi2, grid));
}
BENCHMARK(BM_PairFlux)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
