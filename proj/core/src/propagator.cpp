#include "nonmarkov/propagator.hpp"

#include <cmath>
#include <stdexcept>

namespace nonmarkov {

Trajectory DynamicalMap::trajectory(const PureState& system_state) const {
  return [this, psi = system_state](double t) { return evolve(psi, t); };
}

SpectralPropagator::SpectralPropagator(RealVector eigenvalues, Matrix eigenvectors,
                                       QubitPartition partition, PureState environment)
    : eigenvalues_(std::move(eigenvalues)),
      eigenvectors_(std::move(eigenvectors)),
      partition_(std::move(partition)),
      environment_(std::move(environment)) {}

SpectralPropagator SpectralPropagator::prepare(const HamiltonianParts& parts,
                                               const QubitPartition& partition,
                                               const PureState& environment_state) {
  const Matrix& h = parts.total;
  if (h.rows() != h.cols()) throw std::invalid_argument("Hamiltonian is not square");
  const int n = qubits_for_dimension(h.rows());
  check_qubit_cap(n);
  if (n != partition.total_qubits()) {
    throw std::invalid_argument("Hamiltonian size does not match the partition");
  }
  if (partition.system_qubits() == 0) throw std::invalid_argument("partition has no system qubits");
  if (environment_state.num_qubits() != partition.environment_qubits()) {
    throw std::invalid_argument("environment state size does not match the partition");
  }
  if (hermiticity_defect(h) > kDensityTolerance) throw std::invalid_argument("Hamiltonian is not Hermitian");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Hamiltonian eigendecomposition failed");
  return SpectralPropagator(solver.eigenvalues(), solver.eigenvectors(), partition,
                            environment_state);
}

Vector SpectralPropagator::propagate_coefficients(const Vector& eigen_coefficients, double t) const {
  if (!std::isfinite(t)) throw std::invalid_argument("evolution time must be finite");
  Vector phased(eigen_coefficients.size());
  for (Eigen::Index k = 0; k < phased.size(); ++k) {
    phased[k] = std::polar(1.0, -eigenvalues_[k] * t) * eigen_coefficients[k];
  }
  return eigenvectors_ * phased;
}

PureState SpectralPropagator::evolve_joint(const PureState& joint, double t) const {
  if (joint.dimension() != eigenvectors_.rows()) throw std::invalid_argument("joint state size mismatch");
  return PureState::normalized(propagate_coefficients(eigenvectors_.adjoint() * joint.amplitudes(), t));
}

DensityMatrix SpectralPropagator::evolve_reduced(const PureState& system_state, double t) const {
  return trajectory(system_state)(t);
}

Trajectory SpectralPropagator::trajectory(const PureState& system_state) const {
  if (system_state.num_qubits() != partition_.system_qubits()) {
    throw std::invalid_argument("system state size does not match the partition");
  }
  const PureState joint = embed(system_state, environment_, partition_);
  Vector coefficients = eigenvectors_.adjoint() * joint.amplitudes();
  return [this, c = std::move(coefficients)](double t) {
    return partial_trace(PureState::normalized(propagate_coefficients(c, t)), partition_);
  };
}

double SpectralPropagator::reconstruction_residual(const Matrix& h) const {
  const Matrix rebuilt = eigenvectors_ * eigenvalues_.cast<Complex>().asDiagonal() * eigenvectors_.adjoint();
  return (rebuilt - h).cwiseAbs().maxCoeff();
}

PureState ground_environment(const QubitPartition& partition) {
  if (partition.environment_qubits() == 0) throw std::invalid_argument("partition has no environment");
  return PureState::basis(partition.environment_qubits(), 0);
}

}  // namespace nonmarkov
