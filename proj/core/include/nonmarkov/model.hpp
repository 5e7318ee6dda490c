#pragma once

// Hamiltonian builders. Units: hbar = 1, all energies and times dimensionless.

#include <limits>
#include <utility>
#include <vector>

#include "nonmarkov/quantum_state.hpp"

namespace nonmarkov {

enum class Pauli { I, X, Y, Z };

/// coefficient * P_{q0} P_{q1} ... on a register; qubits must be distinct.
struct PauliTerm {
  double coefficient = 0.0;
  std::vector<std::pair<int, Pauli>> factors;
};

/// Dense matrix of a Pauli string on `num_qubits` qubits.
Matrix pauli_term_matrix(int num_qubits, const PauliTerm& term);

struct SpinChainParams {
  int n_system = 0;             // N; the chain has 2N + 1 sites
  std::vector<double> omegas;   // 2N + 1 on-site frequencies
  std::vector<double> couplings;  // 2N nearest-neighbour strengths

  int num_qubits() const { return 2 * n_system + 1; }
  void validate() const;
};

struct DisorderSpec {
  double omega_mean = 0.2;
  double omega_std = 0.05;
  double coupling_mean = 0.8;
  double coupling_std = 0.05;

  void validate() const;
};

struct HamiltonianParts {
  Matrix total;
  /// Sum of every term whose support touches both system and environment.
  Matrix interaction;
  /// Spectral norm of `interaction`.
  double noise_strength = 0.0;
  /// 1 / noise_strength; +infinity when there is no interaction.
  double correlation_time = std::numeric_limits<double>::infinity();
  QubitPartition partition;

  int num_qubits() const { return partition.total_qubits(); }
};

/// Sums the terms into H and splits off the interaction part by support.
HamiltonianParts assemble_hamiltonian(const QubitPartition& partition,
                                      const std::vector<PauliTerm>& terms);

/// E-S-E-...-E layout: even sites are environment, odd sites are system.
QubitPartition chain_partition(int n_system);

/// H = sum_k (omega_k / 2) Z_k + sum_k J_k (X_k Y_{k+1} + Y_k X_{k+1}).
HamiltonianParts build_spin_chain(const SpinChainParams& params);

/// Probe (qubit 0) coupled by J Z⊗Z to one environment qubit (qubit 1), with
/// `n_spectators` idle system qubits on sites 2, 3, ...
HamiltonianParts build_dephasing_model(double coupling, int n_spectators);

/// Index of the environment qubit in build_dephasing_model's register.
inline constexpr int kDephasingEnvironmentQubit = 1;

/// Draws i.i.d. normal frequencies and couplings. Negative draws are kept.
SpinChainParams sample_disorder(const DisorderSpec& spec, int n_system, Rng& rng);

}  // namespace nonmarkov
