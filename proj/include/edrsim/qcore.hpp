#pragma once

// Dense complex linear algebra for a handful of qubits: pure and mixed
// states, operators, Kraus channels and POVMs. Qubit factors are laid out
// most-significant first, so for signal ⊗ probe the signal bit is the high
// bit of the basis index.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace edrsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kConstructTol = 1e-12;
inline constexpr double kValidateTol = 1e-10;

namespace detail {

inline bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

inline std::size_t qubit_count(Eigen::Index dim) {
  std::size_t n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  return n;
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace detail

class StateVector {
 public:
  /// Takes amplitudes that are already normalized to within 1e-12.
  explicit StateVector(Vector amplitudes) : amplitudes_(std::move(amplitudes)) {
    detail::require(detail::is_power_of_two(amplitudes_.size()),
                    "StateVector: dimension must be a power of two");
    detail::require(amplitudes_.allFinite(), "StateVector: non-finite amplitude");
    detail::require(std::abs(amplitudes_.norm() - 1.0) <= kConstructTol,
                    "StateVector: amplitudes are not normalized");
  }

  /// Rescales an arbitrary nonzero vector to unit norm.
  static StateVector normalized(const Vector& v) {
    const double n = v.norm();
    detail::require(n > kConstructTol, "StateVector: zero-norm vector");
    return StateVector(v / n);
  }

  static StateVector basis(Eigen::Index dim, Eigen::Index index) {
    detail::require(index >= 0 && index < dim, "StateVector: basis index out of range");
    Vector v = Vector::Zero(dim);
    v(index) = 1.0;
    return StateVector(std::move(v));
  }

  Eigen::Index dim() const { return amplitudes_.size(); }
  std::size_t qubits() const { return detail::qubit_count(dim()); }
  const Vector& amplitudes() const { return amplitudes_; }
  Complex operator[](Eigen::Index i) const { return amplitudes_(i); }

 private:
  Vector amplitudes_;
};

class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix entries) : entries_(std::move(entries)) {
    detail::require(entries_.rows() == entries_.cols(), "DensityMatrix: not square");
    detail::require(detail::is_power_of_two(entries_.rows()),
                    "DensityMatrix: dimension must be a power of two");
    detail::require(entries_.allFinite(), "DensityMatrix: non-finite entry");
    detail::require((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() <= kConstructTol,
                    "DensityMatrix: not Hermitian");
    detail::require(std::abs(entries_.trace() - Complex(1.0)) <= kConstructTol,
                    "DensityMatrix: trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(entries_, Eigen::EigenvaluesOnly);
    detail::require(es.eigenvalues().minCoeff() >= -kValidateTol,
                    "DensityMatrix: negative eigenvalue");
  }

  DensityMatrix(const StateVector& psi)  // NOLINT(google-explicit-constructor)
      : entries_(psi.amplitudes() * psi.amplitudes().adjoint()) {}

  Eigen::Index dim() const { return entries_.rows(); }
  std::size_t qubits() const { return detail::qubit_count(dim()); }
  const Matrix& entries() const { return entries_; }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return entries_(r, c); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(entries_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  double fidelity(const StateVector& psi) const {
    return std::real(psi.amplitudes().dot(entries_ * psi.amplitudes()));
  }

 private:
  Matrix entries_;
};

class LinearOperator {
 public:
  explicit LinearOperator(Matrix entries) : entries_(std::move(entries)) {
    detail::require(entries_.rows() == entries_.cols(), "LinearOperator: not square");
    detail::require(entries_.rows() > 0, "LinearOperator: empty");
    detail::require(entries_.allFinite(), "LinearOperator: non-finite entry");
  }

  /// Builds an operator and verifies Hermiticity within 1e-12.
  static LinearOperator hermitian(Matrix entries) {
    LinearOperator op(std::move(entries));
    detail::require(op.is_hermitian(kConstructTol), "LinearOperator: not Hermitian");
    op.hermitian_ = true;
    return op;
  }

  /// Builds an operator and verifies unitarity within 1e-12.
  static LinearOperator unitary(Matrix entries) {
    LinearOperator op(std::move(entries));
    detail::require(op.is_unitary(kConstructTol), "LinearOperator: not unitary");
    op.unitary_ = true;
    op.hermitian_ = op.is_hermitian(kConstructTol);
    return op;
  }

  static LinearOperator identity(Eigen::Index dim) {
    return unitary(Matrix::Identity(dim, dim));
  }

  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return entries_(r, c); }

  bool hermitian_flag() const { return hermitian_; }
  bool unitary_flag() const { return unitary_; }

  bool is_hermitian(double tol = kValidateTol) const {
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() <= tol;
  }
  bool is_unitary(double tol = kValidateTol) const {
    const Matrix id = Matrix::Identity(dim(), dim());
    return (entries_.adjoint() * entries_ - id).cwiseAbs().maxCoeff() <= tol;
  }

  LinearOperator adjoint() const {
    LinearOperator out(entries_.adjoint());
    out.hermitian_ = hermitian_;
    out.unitary_ = unitary_;
    return out;
  }

  friend LinearOperator operator*(const LinearOperator& a, const LinearOperator& b) {
    detail::require(a.dim() == b.dim(), "LinearOperator: dimension mismatch in product");
    return LinearOperator(a.entries_ * b.entries_);
  }
  friend LinearOperator operator+(const LinearOperator& a, const LinearOperator& b) {
    detail::require(a.dim() == b.dim(), "LinearOperator: dimension mismatch in sum");
    return LinearOperator(a.entries_ + b.entries_);
  }
  friend LinearOperator operator-(const LinearOperator& a, const LinearOperator& b) {
    detail::require(a.dim() == b.dim(), "LinearOperator: dimension mismatch in difference");
    return LinearOperator(a.entries_ - b.entries_);
  }
  friend LinearOperator operator*(Complex s, const LinearOperator& a) {
    return LinearOperator(s * a.entries_);
  }

  /// Unnormalized image of a state.
  Vector apply(const StateVector& psi) const {
    detail::require(dim() == psi.dim(), "LinearOperator: dimension mismatch applying to state");
    return entries_ * psi.amplitudes();
  }

  double max_abs_diff(const LinearOperator& other) const {
    detail::require(dim() == other.dim(), "LinearOperator: dimension mismatch");
    return (entries_ - other.entries_).cwiseAbs().maxCoeff();
  }

 private:
  Matrix entries_;
  bool hermitian_ = false;
  bool unitary_ = false;
};

class KrausChannel {
 public:
  explicit KrausChannel(std::vector<LinearOperator> operators) : ops_(std::move(operators)) {
    detail::require(!ops_.empty(), "KrausChannel: no operators");
    const Eigen::Index d = ops_.front().dim();
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& k : ops_) {
      detail::require(k.dim() == d, "KrausChannel: operators of unequal dimension");
      sum += k.entries().adjoint() * k.entries();
    }
    detail::require((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <= kValidateTol,
                    "KrausChannel: operators are not complete");
  }

  Eigen::Index dim() const { return ops_.front().dim(); }
  const std::vector<LinearOperator>& operators() const { return ops_; }
  std::size_t size() const { return ops_.size(); }
  const LinearOperator& operator[](std::size_t i) const { return ops_[i]; }

 private:
  std::vector<LinearOperator> ops_;
};

struct PovmElement {
  int outcome;  // meter value, +1 or -1
  LinearOperator op;
};

class PovmSet {
 public:
  explicit PovmSet(std::vector<PovmElement> elements) : elements_(std::move(elements)) {
    detail::require(!elements_.empty(), "PovmSet: no elements");
    const Eigen::Index d = elements_.front().op.dim();
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& e : elements_) {
      detail::require(e.op.dim() == d, "PovmSet: elements of unequal dimension");
      detail::require(e.op.is_hermitian(kValidateTol), "PovmSet: element not Hermitian");
      Eigen::SelfAdjointEigenSolver<Matrix> es(e.op.entries(), Eigen::EigenvaluesOnly);
      detail::require(es.eigenvalues().minCoeff() >= -kValidateTol,
                      "PovmSet: element not positive semidefinite");
      sum += e.op.entries();
    }
    detail::require((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <= kValidateTol,
                    "PovmSet: elements do not sum to identity");
  }

  Eigen::Index dim() const { return elements_.front().op.dim(); }
  const std::vector<PovmElement>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  const PovmElement& operator[](std::size_t i) const { return elements_[i]; }

 private:
  std::vector<PovmElement> elements_;
};

// ---------------------------------------------------------------------------
// Standard single- and two-qubit operators.

inline LinearOperator pauli_i() { return LinearOperator::identity(2); }

inline LinearOperator pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return LinearOperator::unitary(m);
}

inline LinearOperator pauli_y() {
  const Complex i(0, 1);
  Matrix m(2, 2);
  m << 0, -i, i, 0;
  return LinearOperator::unitary(m);
}

inline LinearOperator pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return LinearOperator::unitary(m);
}

inline LinearOperator hadamard() {
  const double r = 1.0 / std::sqrt(2.0);
  Matrix m(2, 2);
  m << r, r, r, -r;
  return LinearOperator::unitary(m);
}

inline LinearOperator projector(int bit) {
  Matrix m = Matrix::Zero(2, 2);
  m(bit, bit) = 1.0;
  return LinearOperator::hermitian(m);
}

/// CNOT with the more significant qubit as control.
inline LinearOperator cnot() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = 1.0;
  m(2, 3) = m(3, 2) = 1.0;
  return LinearOperator::unitary(m);
}

// ---------------------------------------------------------------------------
// Operations.

inline LinearOperator tensor(const LinearOperator& a, const LinearOperator& b) {
  LinearOperator out(detail::kron(a.entries(), b.entries()));
  if (a.unitary_flag() && b.unitary_flag()) return LinearOperator::unitary(out.entries());
  if (a.hermitian_flag() && b.hermitian_flag()) return LinearOperator::hermitian(out.entries());
  return out;
}

inline StateVector tensor(const StateVector& a, const StateVector& b) {
  return StateVector::normalized(detail::kron(a.amplitudes(), b.amplitudes()));
}

inline double expectation(const LinearOperator& op, const DensityMatrix& rho) {
  detail::require(op.dim() == rho.dim(), "expectation: dimension mismatch");
  detail::require(op.is_hermitian(kValidateTol), "expectation: operator is not Hermitian");
  const Complex v = (op.entries() * rho.entries()).trace();
  if (std::abs(v.imag()) > kValidateTol) {
    throw std::invalid_argument("expectation: imaginary residue exceeds tolerance");
  }
  return v.real();
}

inline double expectation(const LinearOperator& op, const StateVector& psi) {
  detail::require(op.dim() == psi.dim(), "expectation: dimension mismatch");
  detail::require(op.is_hermitian(kValidateTol), "expectation: operator is not Hermitian");
  const Complex v = psi.amplitudes().dot(op.entries() * psi.amplitudes());
  if (std::abs(v.imag()) > kValidateTol) {
    throw std::invalid_argument("expectation: imaginary residue exceeds tolerance");
  }
  return v.real();
}

template <typename State>
double std_dev(const LinearOperator& op, const State& state) {
  const double mean = expectation(op, state);
  const double var = expectation(op * op, state) - mean * mean;
  if (var < 0.0) {
    if (var < -kConstructTol) throw std::invalid_argument("std_dev: negative variance");
    return 0.0;
  }
  return std::sqrt(var);
}

/// C = |<[A,B]>| / 2.
template <typename State>
double commutator_bound(const LinearOperator& a, const LinearOperator& b, const State& state) {
  detail::require(a.dim() == b.dim(), "commutator_bound: dimension mismatch");
  detail::require(a.is_hermitian() && b.is_hermitian(), "commutator_bound: operators must be Hermitian");
  // i[A,B] is Hermitian, so its mean is real.
  const LinearOperator comm(Complex(0, 1) * (a.entries() * b.entries() - b.entries() * a.entries()));
  return std::abs(expectation(comm, state)) / 2.0;
}

inline DensityMatrix apply_channel(const KrausChannel& ch, const DensityMatrix& rho) {
  detail::require(ch.dim() == rho.dim(), "apply_channel: dimension mismatch");
  Matrix out = Matrix::Zero(rho.dim(), rho.dim());
  for (const auto& k : ch.operators()) {
    out += k.entries() * rho.entries() * k.entries().adjoint();
  }
  out = (out + out.adjoint()) / 2.0;
  const Complex tr = out.trace();
  if (std::abs(tr - Complex(1.0)) > kValidateTol) {
    throw std::invalid_argument("apply_channel: trace not preserved");
  }
  return DensityMatrix(out / tr.real());
}

inline std::vector<double> povm_probabilities(const PovmSet& povm, const DensityMatrix& rho) {
  detail::require(povm.dim() == rho.dim(), "povm_probabilities: dimension mismatch");
  std::vector<double> p;
  p.reserve(povm.size());
  double total = 0.0;
  for (const auto& e : povm.elements()) {
    double v = (e.op.entries() * rho.entries()).trace().real();
    if (v < 0.0) {
      if (v < -kConstructTol) throw std::invalid_argument("povm_probabilities: negative probability");
      v = 0.0;
    }
    p.push_back(v);
    total += v;
  }
  if (std::abs(total - 1.0) > kValidateTol) {
    throw std::invalid_argument("povm_probabilities: probabilities do not sum to 1");
  }
  return p;
}

/// Reduced state on the qubit factors listed in `keep` (0 = most significant).
inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::size_t>& keep) {
  const std::size_t n = rho.qubits();
  std::vector<bool> kept(n, false);
  for (std::size_t q : keep) {
    detail::require(q < n, "partial_trace: factor index out of range");
    detail::require(!kept[q], "partial_trace: duplicate factor index");
    kept[q] = true;
  }
  std::vector<std::size_t> keep_sorted;
  std::vector<std::size_t> traced;
  for (std::size_t q = 0; q < n; ++q) (kept[q] ? keep_sorted : traced).push_back(q);

  auto compose = [n](const std::vector<std::size_t>& qs, Eigen::Index bits,
                     Eigen::Index base) {
    const std::size_t m = qs.size();
    for (std::size_t t = 0; t < m; ++t) {
      const Eigen::Index b = (bits >> (m - 1 - t)) & 1;
      base |= b << (n - 1 - qs[t]);
    }
    return base;
  };

  const Eigen::Index dk = Eigen::Index{1} << keep_sorted.size();
  const Eigen::Index dt = Eigen::Index{1} << traced.size();
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index r = 0; r < dk; ++r) {
    for (Eigen::Index c = 0; c < dk; ++c) {
      Complex acc = 0;
      for (Eigen::Index t = 0; t < dt; ++t) {
        const Eigen::Index row = compose(keep_sorted, r, compose(traced, t, 0));
        const Eigen::Index col = compose(keep_sorted, c, compose(traced, t, 0));
        acc += rho(row, col);
      }
      out(r, c) = acc;
    }
  }
  return DensityMatrix((out + out.adjoint()) / 2.0);
}

/// Places an operator on the listed qubits (in the order given) of an
/// n-qubit register.
inline LinearOperator embed(const LinearOperator& op, std::size_t n,
                            const std::vector<std::size_t>& qubits) {
  const std::size_t k = qubits.size();
  detail::require(op.dim() == (Eigen::Index{1} << k), "embed: operator size does not match qubit list");
  Eigen::Index mask = 0;
  for (std::size_t q : qubits) {
    detail::require(q < n, "embed: qubit index out of range");
    const Eigen::Index bit = Eigen::Index{1} << (n - 1 - q);
    detail::require((mask & bit) == 0, "embed: duplicate qubit index");
    mask |= bit;
  }
  auto local = [&](Eigen::Index idx) {
    Eigen::Index l = 0;
    for (std::size_t q : qubits) l = (l << 1) | ((idx >> (n - 1 - q)) & 1);
    return l;
  };
  const Eigen::Index dim = Eigen::Index{1} << n;
  Matrix out = Matrix::Zero(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      if ((r & ~mask) != (c & ~mask)) continue;
      out(r, c) = op(local(r), local(c));
    }
  }
  return LinearOperator(out);
}

// ---------------------------------------------------------------------------
// Haar-random sampling, used by property checks.

inline StateVector random_state(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> g;
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(g(rng), g(rng));
  return StateVector::normalized(v);
}

inline LinearOperator random_unitary(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> g;
  Matrix z(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) z(i, j) = Complex(g(rng), g(rng)) / std::sqrt(2.0);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    q.col(j) *= (std::abs(d) > 0 ? d / std::abs(d) : Complex(1.0));
  }
  return LinearOperator::unitary(q);
}

}  // namespace edrsim
