#pragma once

// Reduced dynamics t -> Phi(t) psi of a system register.

#include <functional>
#include <memory>

#include "nonmarkov/model.hpp"
#include "nonmarkov/quantum_state.hpp"

namespace nonmarkov {

/// Evaluates the reduced state of one initial system state at arbitrary times.
using Trajectory = std::function<DensityMatrix(double)>;

/// A family of reduced dynamical maps acting on pure system states.
/// Implementations are immutable and safe to share across threads.
class DynamicalMap {
 public:
  virtual ~DynamicalMap() = default;

  virtual int system_qubits() const = 0;
  virtual DensityMatrix evolve(const PureState& system_state, double t) const = 0;

  /// Binds one initial state. Implementations may precompute per-state data
  /// so that repeated time evaluations are cheaper than evolve().
  virtual Trajectory trajectory(const PureState& system_state) const;
};

/// Adapts a plain function (psi, t) -> rho.
class FunctionMap final : public DynamicalMap {
 public:
  using Fn = std::function<DensityMatrix(const PureState&, double)>;

  FunctionMap(int system_qubits, Fn fn) : system_qubits_(system_qubits), fn_(std::move(fn)) {}

  int system_qubits() const override { return system_qubits_; }
  DensityMatrix evolve(const PureState& system_state, double t) const override {
    return fn_(system_state, t);
  }

 private:
  int system_qubits_;
  Fn fn_;
};

/// Exact unitary evolution of system ⊗ environment from a one-time Hermitian
/// eigendecomposition H = V diag(E) V^†, followed by a partial trace over the
/// environment. Each time evaluation costs one dense mat-vec.
///
/// Time may be any real number; negative t evolves backwards.
class SpectralPropagator final : public DynamicalMap {
 public:
  static SpectralPropagator prepare(const HamiltonianParts& parts, const QubitPartition& partition,
                                    const PureState& environment_state);
  static SpectralPropagator prepare(const HamiltonianParts& parts,
                                    const PureState& environment_state) {
    return prepare(parts, parts.partition, environment_state);
  }

  const RealVector& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }
  const QubitPartition& partition() const { return partition_; }
  const PureState& environment_state() const { return environment_; }

  int system_qubits() const override { return partition_.system_qubits(); }

  PureState evolve_joint(const PureState& joint, double t) const;
  DensityMatrix evolve_reduced(const PureState& system_state, double t) const;

  DensityMatrix evolve(const PureState& system_state, double t) const override {
    return evolve_reduced(system_state, t);
  }
  Trajectory trajectory(const PureState& system_state) const override;

  /// max |V diag(E) V^† - h| over entries.
  double reconstruction_residual(const Matrix& h) const;

 private:
  SpectralPropagator(RealVector eigenvalues, Matrix eigenvectors, QubitPartition partition,
                     PureState environment);

  /// V diag(exp(-i E t)) coefficients, back in the computational basis.
  Vector propagate_coefficients(const Vector& eigen_coefficients, double t) const;

  RealVector eigenvalues_;
  Matrix eigenvectors_;
  QubitPartition partition_;
  PureState environment_;
};

/// Default environment preparation |0...0>.
PureState ground_environment(const QubitPartition& partition);

}  // namespace nonmarkov
