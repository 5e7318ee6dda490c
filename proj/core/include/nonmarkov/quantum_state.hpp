#pragma once

// State algebra on qubit registers.
//
// Convention: qubit 0 is the most significant bit of an amplitude index, so
// for an n-qubit register qubit q occupies bit (n - 1 - q). Tensor products
// put the left operand on the leading (more significant) qubits.

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nonmarkov {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Random engine used everywhere in the library. One engine per worker.
using Rng = std::mt19937_64;

inline constexpr int kDefaultMaxQubits = 14;
inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kDensityTolerance = 1e-10;

/// Process-wide cap on register size. Dense operators grow as 4^n, so every
/// constructor that creates a register checks against it.
int max_qubits();
void set_max_qubits(int n);

/// Thrown when a register would exceed max_qubits().
class QubitCapExceeded : public std::length_error {
 public:
  QubitCapExceeded(int requested, int cap);
  int requested() const { return requested_; }
  int cap() const { return cap_; }

 private:
  int requested_;
  int cap_;
};

/// Throws QubitCapExceeded when num_qubits > max_qubits().
void check_qubit_cap(int num_qubits);

/// Returns n when dimension == 2^n, otherwise throws std::invalid_argument.
int qubits_for_dimension(Eigen::Index dimension);

class DensityMatrix;

class PureState {
 public:
  /// Takes ownership of an amplitude vector that must already be normalized.
  explicit PureState(Vector amplitudes);

  /// Normalizes the input; throws on a zero vector.
  static PureState normalized(Vector amplitudes);
  static PureState basis(int num_qubits, std::uint64_t index);
  /// |+>^{⊗n}
  static PureState uniform(int num_qubits);

  int num_qubits() const { return num_qubits_; }
  Eigen::Index dimension() const { return amplitudes_.size(); }
  const Vector& amplitudes() const { return amplitudes_; }
  Complex operator[](Eigen::Index i) const { return amplitudes_[i]; }

  DensityMatrix projector() const;

 private:
  Vector amplitudes_;
  int num_qubits_;
};

class DensityMatrix {
 public:
  /// Validates shape, Hermiticity and unit trace. Positivity is not checked
  /// here (it needs a diagonalization); see check_positive().
  explicit DensityMatrix(Matrix entries);

  static DensityMatrix maximally_mixed(int num_qubits);

  int num_qubits() const { return num_qubits_; }
  Eigen::Index dimension() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return entries_(r, c); }

  RealVector eigenvalues() const;
  double purity() const;

  /// Throws std::domain_error when an eigenvalue is below -tolerance.
  /// Eigenvalues in [-tolerance, 0) count as zero.
  void check_positive(double tolerance = kDensityTolerance) const;

 private:
  Matrix entries_;
  int num_qubits_;
};

/// Split of a register into system and environment qubits.
class QubitPartition {
 public:
  QubitPartition(int total_qubits, std::vector<int> system_indices);

  int total_qubits() const { return total_qubits_; }
  int system_qubits() const { return static_cast<int>(system_.size()); }
  int environment_qubits() const { return static_cast<int>(environment_.size()); }
  const std::vector<int>& system_indices() const { return system_; }
  const std::vector<int>& environment_indices() const { return environment_; }

  bool is_system(int qubit) const;

  /// Joint amplitude index of (system basis index, environment basis index).
  /// Both sub-indices use the MSB-first convention over their sorted qubits.
  std::uint64_t joint_index(std::uint64_t system_index, std::uint64_t environment_index) const {
    return system_offsets_[system_index] | environment_offsets_[environment_index];
  }

  friend bool operator==(const QubitPartition& a, const QubitPartition& b) {
    return a.total_qubits_ == b.total_qubits_ && a.system_ == b.system_;
  }

 private:
  int total_qubits_;
  std::vector<int> system_;
  std::vector<int> environment_;
  std::vector<std::uint64_t> system_offsets_;
  std::vector<std::uint64_t> environment_offsets_;
};

/// Haar-distributed pure state: i.i.d. complex Gaussian amplitudes, normalized.
PureState haar_random_state(int num_qubits, Rng& rng);

PureState tensor(const PureState& a, const PureState& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Places system and environment factors on the qubits named by the partition.
PureState embed(const PureState& system, const PureState& environment,
                const QubitPartition& partition);

DensityMatrix partial_trace(const PureState& state, const QubitPartition& partition);
DensityMatrix partial_trace(const DensityMatrix& state, const QubitPartition& partition);

/// Half the trace norm of the Hermitian difference, from its eigenvalues.
double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2);

/// Largest |eigenvalue| of a Hermitian matrix. Throws std::invalid_argument
/// when max|m - m^†| > 1e-10.
double spectral_norm(const Matrix& m);

/// max |m - m^†| over entries.
double hermiticity_defect(const Matrix& m);

}  // namespace nonmarkov
