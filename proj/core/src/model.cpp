#include "nonmarkov/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nonmarkov {

Matrix pauli_term_matrix(int num_qubits, const PauliTerm& term) {
  if (num_qubits < 1) throw std::invalid_argument("pauli_term_matrix: num_qubits must be positive");
  check_qubit_cap(num_qubits);
  const auto dim = std::uint64_t{1} << num_qubits;

  std::uint64_t flip = 0;
  std::vector<std::pair<std::uint64_t, Pauli>> masks;
  std::uint64_t seen = 0;
  for (const auto& [qubit, p] : term.factors) {
    if (qubit < 0 || qubit >= num_qubits) throw std::out_of_range("Pauli factor on a missing qubit");
    const std::uint64_t bit = std::uint64_t{1} << (num_qubits - 1 - qubit);
    if (seen & bit) throw std::invalid_argument("Pauli term repeats a qubit");
    seen |= bit;
    if (p == Pauli::X || p == Pauli::Y) flip |= bit;
    if (p != Pauli::I) masks.emplace_back(bit, p);
  }

  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  const Complex i_unit(0.0, 1.0);
  for (std::uint64_t col = 0; col < dim; ++col) {
    Complex phase = term.coefficient;
    for (const auto& [bit, p] : masks) {
      const bool one = (col & bit) != 0;
      switch (p) {
        case Pauli::Z:
          if (one) phase = -phase;
          break;
        case Pauli::Y:  // Y|0> = i|1>, Y|1> = -i|0>
          phase *= one ? -i_unit : i_unit;
          break;
        default:
          break;
      }
    }
    m(static_cast<Eigen::Index>(col ^ flip), static_cast<Eigen::Index>(col)) += phase;
  }
  return m;
}

void SpinChainParams::validate() const {
  if (n_system < 0) throw std::invalid_argument("n_system must be non-negative");
  const auto sites = static_cast<std::size_t>(num_qubits());
  if (omegas.size() != sites) {
    throw std::invalid_argument("expected " + std::to_string(sites) + " frequencies, got " +
                                std::to_string(omegas.size()));
  }
  if (couplings.size() != sites - 1) {
    throw std::invalid_argument("expected " + std::to_string(sites - 1) + " couplings, got " +
                                std::to_string(couplings.size()));
  }
}

void DisorderSpec::validate() const {
  if (omega_std < 0.0 || coupling_std < 0.0) {
    throw std::invalid_argument("disorder standard deviations must be non-negative");
  }
}

HamiltonianParts assemble_hamiltonian(const QubitPartition& partition,
                                      const std::vector<PauliTerm>& terms) {
  const int n = partition.total_qubits();
  check_qubit_cap(n);
  const auto dim = Eigen::Index{1} << n;
  Matrix total = Matrix::Zero(dim, dim);
  Matrix interaction = Matrix::Zero(dim, dim);
  for (const auto& term : terms) {
    const Matrix m = pauli_term_matrix(n, term);
    total += m;
    bool touches_system = false;
    bool touches_environment = false;
    for (const auto& [qubit, p] : term.factors) {
      if (p == Pauli::I) continue;
      (partition.is_system(qubit) ? touches_system : touches_environment) = true;
    }
    if (touches_system && touches_environment) interaction += m;
  }
  const double lambda = spectral_norm(interaction);
  const double tau = lambda > 0.0 ? 1.0 / lambda : std::numeric_limits<double>::infinity();
  return HamiltonianParts{std::move(total), std::move(interaction), lambda, tau, partition};
}

QubitPartition chain_partition(int n_system) {
  if (n_system < 0) throw std::invalid_argument("n_system must be non-negative");
  std::vector<int> system;
  for (int k = 1; k < 2 * n_system + 1; k += 2) system.push_back(k);
  return QubitPartition(2 * n_system + 1, std::move(system));
}

HamiltonianParts build_spin_chain(const SpinChainParams& params) {
  params.validate();
  const int sites = params.num_qubits();
  check_qubit_cap(sites);
  std::vector<PauliTerm> terms;
  for (int k = 0; k < sites; ++k) {
    terms.push_back({params.omegas[static_cast<std::size_t>(k)] / 2.0, {{k, Pauli::Z}}});
  }
  for (int k = 0; k + 1 < sites; ++k) {
    const double j = params.couplings[static_cast<std::size_t>(k)];
    terms.push_back({j, {{k, Pauli::X}, {k + 1, Pauli::Y}}});
    terms.push_back({j, {{k, Pauli::Y}, {k + 1, Pauli::X}}});
  }
  return assemble_hamiltonian(chain_partition(params.n_system), terms);
}

HamiltonianParts build_dephasing_model(double coupling, int n_spectators) {
  if (n_spectators < 0) throw std::invalid_argument("n_spectators must be non-negative");
  const int total = 2 + n_spectators;
  check_qubit_cap(total);
  std::vector<int> system{0};
  for (int q = 2; q < total; ++q) system.push_back(q);
  QubitPartition partition(total, std::move(system));
  const std::vector<PauliTerm> terms{
      {coupling, {{0, Pauli::Z}, {kDephasingEnvironmentQubit, Pauli::Z}}}};
  return assemble_hamiltonian(partition, terms);
}

SpinChainParams sample_disorder(const DisorderSpec& spec, int n_system, Rng& rng) {
  spec.validate();
  if (n_system < 0) throw std::invalid_argument("n_system must be non-negative");
  SpinChainParams params;
  params.n_system = n_system;
  const int sites = params.num_qubits();
  // std::normal_distribution rejects stddev == 0, so draw standard normals and scale.
  std::normal_distribution<double> gauss(0.0, 1.0);
  params.omegas.resize(static_cast<std::size_t>(sites));
  for (auto& w : params.omegas) w = spec.omega_mean + spec.omega_std * gauss(rng);
  params.couplings.resize(static_cast<std::size_t>(sites - 1));
  for (auto& j : params.couplings) j = spec.coupling_mean + spec.coupling_std * gauss(rng);
  return params;
}

}  // namespace nonmarkov
