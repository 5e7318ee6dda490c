#include "nonmarkov/quantum_state.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace nonmarkov {

namespace {

std::atomic<int> g_max_qubits{kDefaultMaxQubits};

std::string cap_message(int requested, int cap) {
  std::ostringstream os;
  os << "register of " << requested << " qubits exceeds the configured maximum of " << cap
     << " qubits (raise it with --max-qubits or NONMARKOV_MAX_QUBITS)";
  return os.str();
}

// Bit offsets of every basis index of a sub-register inside the joint index.
std::vector<std::uint64_t> offsets_for(const std::vector<int>& qubits, int total) {
  const int k = static_cast<int>(qubits.size());
  std::vector<std::uint64_t> out(std::uint64_t{1} << k, 0);
  for (std::uint64_t local = 0; local < out.size(); ++local) {
    std::uint64_t joint = 0;
    for (int j = 0; j < k; ++j) {
      if ((local >> (k - 1 - j)) & 1U) joint |= std::uint64_t{1} << (total - 1 - qubits[j]);
    }
    out[local] = joint;
  }
  return out;
}

}  // namespace

int max_qubits() { return g_max_qubits.load(std::memory_order_relaxed); }

void set_max_qubits(int n) {
  if (n < 1 || n > 30) throw std::invalid_argument("max qubits must lie in [1, 30]");
  g_max_qubits.store(n, std::memory_order_relaxed);
}

QubitCapExceeded::QubitCapExceeded(int requested, int cap)
    : std::length_error(cap_message(requested, cap)), requested_(requested), cap_(cap) {}

void check_qubit_cap(int num_qubits) {
  const int cap = max_qubits();
  if (num_qubits > cap) throw QubitCapExceeded(num_qubits, cap);
}

int qubits_for_dimension(Eigen::Index dimension) {
  if (dimension < 1) throw std::invalid_argument("empty register");
  const auto d = static_cast<std::uint64_t>(dimension);
  if ((d & (d - 1)) != 0) {
    throw std::invalid_argument("dimension " + std::to_string(d) + " is not a power of two");
  }
  int n = 0;
  while ((std::uint64_t{1} << n) < d) ++n;
  return n;
}

// ---------------------------------------------------------------------------
// PureState

PureState::PureState(Vector amplitudes)
    : amplitudes_(std::move(amplitudes)), num_qubits_(qubits_for_dimension(amplitudes_.size())) {
  check_qubit_cap(num_qubits_);
  const double norm = amplitudes_.norm();
  if (std::abs(norm - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os << "pure state norm " << norm << " differs from 1";
    throw std::invalid_argument(os.str());
  }
}

PureState PureState::normalized(Vector amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("cannot normalize a zero or non-finite vector");
  }
  amplitudes /= norm;
  return PureState(std::move(amplitudes));
}

PureState PureState::basis(int num_qubits, std::uint64_t index) {
  if (num_qubits < 1) throw std::invalid_argument("num_qubits must be positive");
  check_qubit_cap(num_qubits);
  const auto dim = std::uint64_t{1} << num_qubits;
  if (index >= dim) throw std::out_of_range("basis index out of range");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
  v[static_cast<Eigen::Index>(index)] = 1.0;
  return PureState(std::move(v));
}

PureState PureState::uniform(int num_qubits) {
  if (num_qubits < 1) throw std::invalid_argument("num_qubits must be positive");
  check_qubit_cap(num_qubits);
  const auto dim = Eigen::Index{1} << num_qubits;
  return PureState(Vector::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim))));
}

DensityMatrix PureState::projector() const {
  return DensityMatrix(amplitudes_ * amplitudes_.adjoint());
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(Matrix entries)
    : entries_(std::move(entries)), num_qubits_(0) {
  if (entries_.rows() != entries_.cols()) throw std::invalid_argument("density matrix not square");
  num_qubits_ = qubits_for_dimension(entries_.rows());
  check_qubit_cap(num_qubits_);
  if (hermiticity_defect(entries_) > kDensityTolerance) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
  const double tr = entries_.trace().real();
  if (std::abs(tr - 1.0) > kDensityTolerance) {
    std::ostringstream os;
    os << "density matrix trace " << tr << " differs from 1";
    throw std::invalid_argument(os.str());
  }
}

DensityMatrix DensityMatrix::maximally_mixed(int num_qubits) {
  if (num_qubits < 1) throw std::invalid_argument("num_qubits must be positive");
  check_qubit_cap(num_qubits);
  const auto dim = Eigen::Index{1} << num_qubits;
  return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

RealVector DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double DensityMatrix::purity() const {
  // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
  return entries_.squaredNorm();
}

void DensityMatrix::check_positive(double tolerance) const {
  const double smallest = eigenvalues().minCoeff();
  if (smallest < -tolerance) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << smallest;
    throw std::domain_error(os.str());
  }
}

// ---------------------------------------------------------------------------
// QubitPartition

QubitPartition::QubitPartition(int total_qubits, std::vector<int> system_indices)
    : total_qubits_(total_qubits), system_(std::move(system_indices)) {
  if (total_qubits_ < 1) throw std::invalid_argument("partition needs at least one qubit");
  check_qubit_cap(total_qubits_);
  std::sort(system_.begin(), system_.end());
  if (std::adjacent_find(system_.begin(), system_.end()) != system_.end()) {
    throw std::invalid_argument("duplicate system qubit index");
  }
  for (int q : system_) {
    if (q < 0 || q >= total_qubits_) throw std::out_of_range("system qubit index out of range");
  }
  for (int q = 0; q < total_qubits_; ++q) {
    if (!std::binary_search(system_.begin(), system_.end(), q)) environment_.push_back(q);
  }
  system_offsets_ = offsets_for(system_, total_qubits_);
  environment_offsets_ = offsets_for(environment_, total_qubits_);
}

bool QubitPartition::is_system(int qubit) const {
  return std::binary_search(system_.begin(), system_.end(), qubit);
}

// ---------------------------------------------------------------------------
// Operations

PureState haar_random_state(int num_qubits, Rng& rng) {
  if (num_qubits < 1) throw std::invalid_argument("haar_random_state needs num_qubits >= 1");
  check_qubit_cap(num_qubits);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto dim = Eigen::Index{1} << num_qubits;
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v[i] = Complex(re, im);
  }
  return PureState::normalized(std::move(v));
}

PureState tensor(const PureState& a, const PureState& b) {
  check_qubit_cap(a.num_qubits() + b.num_qubits());
  Vector out = Eigen::kroneckerProduct(a.amplitudes(), b.amplitudes());
  return PureState::normalized(std::move(out));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  check_qubit_cap(a.num_qubits() + b.num_qubits());
  Matrix out = Eigen::kroneckerProduct(a.entries(), b.entries());
  return DensityMatrix(std::move(out));
}

PureState embed(const PureState& system, const PureState& environment,
                const QubitPartition& partition) {
  if (system.num_qubits() != partition.system_qubits() ||
      environment.num_qubits() != partition.environment_qubits()) {
    throw std::invalid_argument("embed: state sizes do not match the partition");
  }
  Vector joint = Vector::Zero(Eigen::Index{1} << partition.total_qubits());
  for (Eigen::Index s = 0; s < system.dimension(); ++s) {
    const Complex a = system[s];
    for (Eigen::Index e = 0; e < environment.dimension(); ++e) {
      const auto j = partition.joint_index(static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(e));
      joint[static_cast<Eigen::Index>(j)] = a * environment[e];
    }
  }
  return PureState::normalized(std::move(joint));
}

DensityMatrix partial_trace(const PureState& state, const QubitPartition& partition) {
  if (state.num_qubits() != partition.total_qubits()) {
    throw std::invalid_argument("partial_trace: qubit count does not match the partition");
  }
  if (partition.system_qubits() == 0) throw std::invalid_argument("partial_trace: empty system");
  const Eigen::Index ds = Eigen::Index{1} << partition.system_qubits();
  const Eigen::Index de = Eigen::Index{1} << partition.environment_qubits();
  // rho_S = M M^† with M(s, e) = psi[joint(s, e)]
  Matrix m(ds, de);
  for (Eigen::Index s = 0; s < ds; ++s) {
    for (Eigen::Index e = 0; e < de; ++e) {
      m(s, e) = state[static_cast<Eigen::Index>(
          partition.joint_index(static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(e)))];
    }
  }
  return DensityMatrix(m * m.adjoint());
}

DensityMatrix partial_trace(const DensityMatrix& state, const QubitPartition& partition) {
  if (state.num_qubits() != partition.total_qubits()) {
    throw std::invalid_argument("partial_trace: qubit count does not match the partition");
  }
  if (partition.system_qubits() == 0) throw std::invalid_argument("partial_trace: empty system");
  const Eigen::Index ds = Eigen::Index{1} << partition.system_qubits();
  const Eigen::Index de = Eigen::Index{1} << partition.environment_qubits();
  Matrix rho = Matrix::Zero(ds, ds);
  for (Eigen::Index r = 0; r < ds; ++r) {
    for (Eigen::Index c = 0; c < ds; ++c) {
      Complex acc = 0.0;
      for (Eigen::Index e = 0; e < de; ++e) {
        const auto ue = static_cast<std::uint64_t>(e);
        acc += state(static_cast<Eigen::Index>(partition.joint_index(static_cast<std::uint64_t>(r), ue)),
                     static_cast<Eigen::Index>(partition.joint_index(static_cast<std::uint64_t>(c), ue)));
      }
      rho(r, c) = acc;
    }
  }
  return DensityMatrix(std::move(rho));
}

double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  if (rho1.dimension() != rho2.dimension()) {
    throw std::invalid_argument("trace_distance: dimension mismatch");
  }
  const Matrix diff = rho1.entries() - rho2.entries();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(diff, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("trace_distance: eigensolver failed");
  const double d = 0.5 * solver.eigenvalues().cwiseAbs().sum();
  return std::min(d, 1.0);
}

double hermiticity_defect(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix not square");
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double spectral_norm(const Matrix& m) {
  if (hermiticity_defect(m) > kDensityTolerance) {
    throw std::invalid_argument("spectral_norm: matrix is not Hermitian");
  }
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("spectral_norm: eigensolver failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace nonmarkov
