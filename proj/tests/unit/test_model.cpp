#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "nonmarkov/model.hpp"
#include "nonmarkov/stats.hpp"
#include "oracles.hpp"

using namespace nonmarkov;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

SpinChainParams random_chain(int n_system, Rng& rng) {
  return sample_disorder(DisorderSpec{0.2, 0.3, 0.5, 0.4}, n_system, rng);
}

}  // namespace

TEST(PauliTermMatrix, MatchesKroneckerProducts) {
  const std::vector<std::pair<PauliTerm, std::map<int, char>>> cases{
      {{1.0, {{0, Pauli::X}}}, {{0, 'X'}}},
      {{-0.5, {{1, Pauli::Y}, {2, Pauli::Z}}}, {{1, 'Y'}, {2, 'Z'}}},
      {{2.0, {{0, Pauli::Y}, {1, Pauli::X}, {2, Pauli::Y}}}, {{0, 'Y'}, {1, 'X'}, {2, 'Y'}}},
  };
  for (const auto& [term, factors] : cases) {
    const Matrix expected = term.coefficient * oracle::pauli_string(3, factors);
    EXPECT_LT(max_abs(pauli_term_matrix(3, term) - expected), 1e-15);
  }
  EXPECT_THROW(pauli_term_matrix(2, PauliTerm{1.0, {{0, Pauli::X}, {0, Pauli::Z}}}), std::invalid_argument);
}

TEST(SpinChain, SingleSiteHasNoInteraction) {
  const auto parts = build_spin_chain(SpinChainParams{0, {0.7}, {}});
  EXPECT_LT(max_abs(parts.total - 0.35 * oracle::pauli('Z')), 1e-15);
  EXPECT_EQ(max_abs(parts.interaction), 0.0);
  EXPECT_EQ(parts.noise_strength, 0.0);
  EXPECT_TRUE(std::isinf(parts.correlation_time));
}

TEST(SpinChain, OneCouplingNormTwo) {
  const auto parts = build_spin_chain(SpinChainParams{1, {0.0, 0.0, 0.0}, {1.0, 0.0}});
  const Matrix expected = oracle::pauli_string(3, {{0, 'X'}, {1, 'Y'}}) + oracle::pauli_string(3, {{0, 'Y'}, {1, 'X'}});
  EXPECT_LT(max_abs(parts.total - expected), 1e-15);
  // brute force: eigenvalues of the 8x8 matrix
  Eigen::SelfAdjointEigenSolver<Matrix> solver(expected);
  const double brute = solver.eigenvalues().cwiseAbs().maxCoeff();
  EXPECT_NEAR(brute, 2.0, 1e-12);
  EXPECT_NEAR(parts.noise_strength, brute, 1e-12);
  EXPECT_NEAR(parts.correlation_time, 0.5, 1e-12);
}

TEST(SpinChain, MatchesKroneckerOracleAndIsHermitian) {
  Rng rng(21);
  for (int n_system : {1, 2}) {
    const auto params = random_chain(n_system, rng);
    const auto parts = build_spin_chain(params);
    EXPECT_LT(max_abs(parts.total - oracle::chain_hamiltonian(params.omegas, params.couplings)), 1e-13);
    EXPECT_LT(hermiticity_defect(parts.total), 1e-12);
    EXPECT_LT(hermiticity_defect(parts.interaction), 1e-12);
  }
}

TEST(SpinChain, LayoutInterleavesEnvironmentAndSystem) {
  const auto p = chain_partition(3);
  EXPECT_EQ(p.total_qubits(), 7);
  EXPECT_EQ(p.system_indices(), (std::vector<int>{1, 3, 5}));
  EXPECT_EQ(p.environment_indices(), (std::vector<int>{0, 2, 4, 6}));
}

TEST(SpinChain, InteractionIsTheTracelessCouplingSum) {
  Rng rng(22);
  const auto params = random_chain(2, rng);
  const auto parts = build_spin_chain(params);
  std::vector<double> zero_omegas(params.omegas.size(), 0.0);
  EXPECT_LT(max_abs(parts.interaction - oracle::chain_hamiltonian(zero_omegas, params.couplings)), 1e-13);
  EXPECT_LT(std::abs(parts.interaction.trace()), 1e-10);
}

TEST(SpinChain, NoiseStrengthIsPositivelyHomogeneous) {
  Rng rng(23);
  for (int k = 0; k < 5; ++k) {
    auto params = random_chain(1 + k % 2, rng);
    const double base = build_spin_chain(params).noise_strength;
    for (double c : {-2.0, 0.5, 3.0}) {
      auto scaled = params;
      for (auto& j : scaled.couplings) j *= c;
      EXPECT_NEAR(build_spin_chain(scaled).noise_strength, std::abs(c) * base, 1e-10 * (1.0 + base));
    }
  }
}

TEST(SpinChain, UncoupledChainCommutesWithEveryZ) {
  Rng rng(24);
  auto params = random_chain(2, rng);
  for (auto& j : params.couplings) j = 0.0;
  const auto parts = build_spin_chain(params);
  for (int k = 0; k < params.num_qubits(); ++k) {
    const Matrix z = oracle::pauli_string(params.num_qubits(), {{k, 'Z'}});
    EXPECT_LE(max_abs(parts.total * z - z * parts.total), 1e-12);
  }
}

TEST(SpinChain, ValidatesParameterLengths) {
  EXPECT_THROW(build_spin_chain(SpinChainParams{1, {0.1, 0.2}, {1.0, 1.0}}), std::invalid_argument);
  EXPECT_THROW(build_spin_chain(SpinChainParams{1, {0.1, 0.2, 0.3}, {1.0}}), std::invalid_argument);
}

TEST(SpinChain, RespectsQubitCap) {
  set_max_qubits(5);
  Rng rng(25);
  EXPECT_THROW(build_spin_chain(random_chain(3, rng)), QubitCapExceeded);
  set_max_qubits(kDefaultMaxQubits);
}

TEST(DephasingModel, ZeroCouplingIsTrivial) {
  const auto parts = build_dephasing_model(0.0, 2);
  EXPECT_EQ(max_abs(parts.total), 0.0);
  EXPECT_EQ(parts.noise_strength, 0.0);
}

TEST(DephasingModel, UnitCouplingHasUnitNorm) {
  const auto parts = build_dephasing_model(1.0, 0);
  EXPECT_NEAR(parts.noise_strength, 1.0, 1e-14);
  EXPECT_LT(max_abs(parts.total - oracle::pauli_string(2, {{0, 'Z'}, {1, 'Z'}})), 1e-15);
}

TEST(DephasingModel, SpectatorsAreIdleSystemQubits) {
  const auto parts = build_dephasing_model(0.7, 2);
  EXPECT_EQ(parts.partition.total_qubits(), 4);
  EXPECT_EQ(parts.partition.system_indices(), (std::vector<int>{0, 2, 3}));
  EXPECT_EQ(parts.partition.environment_indices(), (std::vector<int>{kDephasingEnvironmentQubit}));
  EXPECT_LT(max_abs(parts.total - 0.7 * oracle::pauli_string(4, {{0, 'Z'}, {1, 'Z'}})), 1e-15);
  EXPECT_LT(max_abs(parts.interaction - parts.total), 1e-15);
}

TEST(DephasingModel, CoherenceFollowsCosine) {
  // Brute force: exp(-i J t Z⊗Z) on |+>|+>, trace out the environment.
  const double j = 1.0;
  const auto parts = build_dephasing_model(j, 0);
  Vector plus_plus = Vector::Constant(4, 0.5);
  for (double t : {0.1, 0.7, 1.3}) {
    const Vector psi = oracle::unitary(parts.total, t) * plus_plus;
    const Matrix reduced = oracle::partial_trace(psi * psi.adjoint(), 2, {0});
    EXPECT_NEAR(reduced(0, 1).real(), 0.5 * std::cos(2.0 * j * t), 1e-12);
    EXPECT_NEAR(reduced(0, 1).imag(), 0.0, 1e-12);
  }
}

TEST(SampleDisorder, ZeroSpreadIsExact) {
  Rng rng(26);
  const auto p = sample_disorder(DisorderSpec{0.2, 0.0, 0.8, 0.0}, 3, rng);
  for (double w : p.omegas) EXPECT_EQ(w, 0.2);
  for (double c : p.couplings) EXPECT_EQ(c, 0.8);
}

TEST(SampleDisorder, CouplingMeanWithinStandardError) {
  Rng rng(27);
  const DisorderSpec spec{0.2, 0.05, 0.8, 0.05};
  double acc = 0.0;
  int count = 0;
  while (count < 10000) {
    for (double c : sample_disorder(spec, 2, rng).couplings) {
      acc += c;
      ++count;
    }
  }
  // sigma / sqrt(n) = 5e-4; the bound is four standard errors
  EXPECT_NEAR(acc / count, 0.8, 0.002);
}

TEST(SampleDisorder, SameSeedSameParameters) {
  const DisorderSpec spec{0.2, 0.05, 0.8, 0.05};
  Rng a = make_stream(99, 3);
  Rng b = make_stream(99, 3);
  const auto pa = sample_disorder(spec, 3, a);
  const auto pb = sample_disorder(spec, 3, b);
  EXPECT_EQ(pa.omegas, pb.omegas);
  EXPECT_EQ(pa.couplings, pb.couplings);
}

TEST(SampleDisorder, RejectsNegativeSpread) {
  Rng rng(28);
  EXPECT_THROW(sample_disorder(DisorderSpec{0.2, -0.1, 0.8, 0.05}, 1, rng), std::invalid_argument);
}
