#pragma once

// Truncated Fock-space operators and states, and the spin (x) phonon joint space.
//
// Conventions used throughout the library:
//   * FockTruncation keeps Fock levels 0..n_max, so a phonon space has n_max + 1 levels.
//   * Joint spaces are ordered spin (x) phonon with spin basis (down, up); the joint
//     index of |s, n> is s * n_levels + n with s = 0 for down and 1 for up.
//   * Matrices are dense; every type here is templated on the real scalar.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "qvdp/error.hpp"

namespace qvdp {

template <typename Real>
using ComplexMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using MatrixXc = ComplexMatrix<double>;
using VectorXc = ComplexVector<double>;

enum class Space { phonon, spin_phonon };

struct SpaceTag {
  Space space = Space::phonon;
  int n_levels = 0;  // Fock levels of the phonon factor

  constexpr int dim() const { return space == Space::phonon ? n_levels : 2 * n_levels; }
  friend constexpr bool operator==(const SpaceTag&, const SpaceTag&) = default;
};

inline std::string to_string(const SpaceTag& tag) {
  return (tag.space == Space::phonon ? "phonon(" : "spin_phonon(") + std::to_string(tag.n_levels) + ")";
}

struct FockTruncation {
  int n_max = 30;                // highest retained Fock level
  double tail_tolerance = 1e-6;  // allowed population in the top two levels

  int n_levels() const { return n_max + 1; }
  SpaceTag phonon() const { return {Space::phonon, n_levels()}; }
  SpaceTag spin_phonon() const { return {Space::spin_phonon, n_levels()}; }

  void validate() const {
    if (n_max < 2) throw DimensionError("FockTruncation: n_max must be >= 2, got " + std::to_string(n_max));
    if (!(tail_tolerance > 0.0)) throw DimensionError("FockTruncation: tail_tolerance must be positive");
  }
};

/// Square complex matrix tagged with the space it acts on.
template <typename Real = double>
class BasicOperator {
 public:
  using Scalar = std::complex<Real>;
  using Matrix = ComplexMatrix<Real>;

  BasicOperator() = default;
  BasicOperator(Matrix entries, SpaceTag tag) : m_(std::move(entries)), tag_(tag) {
    if (tag_.n_levels <= 0) throw DimensionError("Operator: space tag has no levels");
    if (m_.rows() != m_.cols())
      throw DimensionError("Operator: matrix is " + std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()) +
                           ", not square");
    if (m_.rows() != tag_.dim())
      throw DimensionError("Operator: dimension " + std::to_string(m_.rows()) + " inconsistent with " +
                           to_string(tag_));
  }

  static BasicOperator identity(SpaceTag tag) { return {Matrix::Identity(tag.dim(), tag.dim()), tag}; }
  static BasicOperator zero(SpaceTag tag) { return {Matrix::Zero(tag.dim(), tag.dim()), tag}; }

  const Matrix& matrix() const { return m_; }
  SpaceTag tag() const { return tag_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  Scalar operator()(Eigen::Index row, Eigen::Index col) const { return m_(row, col); }

  BasicOperator adjoint() const { return {m_.adjoint(), tag_}; }
  Scalar trace() const { return m_.trace(); }

  /// max |A - A^dagger| over entries
  Real hermiticity_error() const { return m_.rows() == 0 ? Real(0) : (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

  BasicOperator& operator+=(const BasicOperator& rhs) {
    require_same(rhs);
    m_ += rhs.m_;
    return *this;
  }
  BasicOperator& operator-=(const BasicOperator& rhs) {
    require_same(rhs);
    m_ -= rhs.m_;
    return *this;
  }
  BasicOperator& operator*=(Scalar s) {
    m_ *= s;
    return *this;
  }

  friend BasicOperator operator+(BasicOperator lhs, const BasicOperator& rhs) { return lhs += rhs; }
  friend BasicOperator operator-(BasicOperator lhs, const BasicOperator& rhs) { return lhs -= rhs; }
  friend BasicOperator operator*(BasicOperator lhs, Scalar s) { return lhs *= s; }
  friend BasicOperator operator*(Scalar s, BasicOperator rhs) { return rhs *= s; }
  friend BasicOperator operator*(const BasicOperator& lhs, const BasicOperator& rhs) {
    lhs.require_same(rhs);
    return {lhs.m_ * rhs.m_, lhs.tag_};
  }

 private:
  void require_same(const BasicOperator& rhs) const {
    if (!(tag_ == rhs.tag_)) throw DimensionError("Operator: " + to_string(tag_) + " vs " + to_string(rhs.tag_));
  }

  Matrix m_;
  SpaceTag tag_{};
};

using Operator = BasicOperator<double>;

struct StateTolerances {
  double hermiticity = 1e-9;
  double trace = 1e-9;
  double positivity = 1e-8;
};

/// Tolerances for states produced by time integration (trace may drift, roundoff negativity).
inline constexpr StateTolerances kEvolvedTolerances{1e-9, 1e-6, 1e-6};

/// Hermitian, unit-trace, positive semidefinite operator. Invariants are checked on construction.
template <typename Real = double>
class BasicDensityMatrix {
 public:
  using Scalar = std::complex<Real>;
  using Matrix = ComplexMatrix<Real>;

  explicit BasicDensityMatrix(BasicOperator<Real> op, StateTolerances tol = {}) : op_(std::move(op)), tol_(tol) {
    check();
  }
  BasicDensityMatrix(Matrix entries, SpaceTag tag, StateTolerances tol = {})
      : BasicDensityMatrix(BasicOperator<Real>(std::move(entries), tag), tol) {}

  const BasicOperator<Real>& op() const { return op_; }
  const Matrix& matrix() const { return op_.matrix(); }
  SpaceTag tag() const { return op_.tag(); }
  int dim() const { return op_.dim(); }
  const StateTolerances& tolerances() const { return tol_; }

  Real min_eigenvalue() const {
    const Matrix herm = (matrix() + matrix().adjoint()) * Real(0.5);
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  void check() const {
    const Real herm = op_.hermiticity_error();
    if (herm > tol_.hermiticity)
      throw InvalidStateError("DensityMatrix: |rho - rho^dagger|_max = " + std::to_string(herm));
    const Real trace_err = std::abs(op_.trace() - Scalar(1));
    if (trace_err > tol_.trace) throw InvalidStateError("DensityMatrix: |Tr rho - 1| = " + std::to_string(trace_err));
    const Real lowest = min_eigenvalue();
    if (lowest < -tol_.positivity)
      throw InvalidStateError("DensityMatrix: smallest eigenvalue " + std::to_string(lowest));
  }

 private:
  BasicOperator<Real> op_;
  StateTolerances tol_;
};

using DensityMatrix = BasicDensityMatrix<double>;

// ---------------------------------------------------------------------------
// Ladder operators

template <typename Real = double>
struct LadderOps {
  BasicOperator<Real> a;
  BasicOperator<Real> a_dagger;
  BasicOperator<Real> n;
};

template <typename Real = double>
ComplexMatrix<Real> annihilation_matrix(int n_levels) {
  ComplexMatrix<Real> a = ComplexMatrix<Real>::Zero(n_levels, n_levels);
  for (int n = 1; n < n_levels; ++n) a(n - 1, n) = std::sqrt(Real(n));
  return a;
}

template <typename Real = double>
LadderOps<Real> ladder_ops(const FockTruncation& trunc) {
  trunc.validate();
  const SpaceTag tag = trunc.phonon();
  ComplexMatrix<Real> a = annihilation_matrix<Real>(tag.n_levels);
  ComplexMatrix<Real> ad = a.adjoint();
  ComplexMatrix<Real> n = ad * a;
  return {{std::move(a), tag}, {std::move(ad), tag}, {std::move(n), tag}};
}

// ---------------------------------------------------------------------------
// Displacement operator

/// Fills out[j] = <j+k| D(r) |j> for real r >= 0 with x = r^2, j = 0..out.size()-1.
/// Uses the normalized associated-Laguerre recurrence, so no factorial ever overflows.
template <typename Real>
void displaced_laguerre(int k, Real x, std::vector<Real>& out) {
  const std::size_t count = out.size();
  if (count == 0) return;
  Real g0;
  if (x == Real(0))
    g0 = (k == 0) ? Real(1) : Real(0);
  else
    g0 = std::exp(Real(0.5) * k * std::log(x) - Real(0.5) * x - Real(0.5) * std::lgamma(Real(k + 1)));
  out[0] = g0;
  if (count == 1) return;
  out[1] = g0 * (Real(1 + k) - x) / std::sqrt(Real(k + 1));
  for (std::size_t j = 1; j + 1 < count; ++j) {
    const Real n = Real(j);
    out[j + 1] = ((Real(2) * n + Real(1 + k) - x) * out[j] - std::sqrt(n * (n + k)) * out[j - 1]) /
                 std::sqrt((n + 1) * (n + 1 + k));
  }
}

/// Exact matrix elements <m|D(beta)|n> of the infinite-dimensional displacement operator,
/// restricted to levels 0..n_levels-1.
template <typename Real = double>
ComplexMatrix<Real> displacement_matrix(int n_levels, std::complex<Real> beta) {
  const Real x = std::norm(beta);
  const Real angle = x > Real(0) ? std::arg(beta) : Real(0);
  ComplexMatrix<Real> d(n_levels, n_levels);
  std::vector<Real> g;
  for (int k = 0; k < n_levels; ++k) {
    g.assign(static_cast<std::size_t>(n_levels - k), Real(0));
    displaced_laguerre(k, x, g);
    const std::complex<Real> below = std::polar(Real(1), k * angle);
    const std::complex<Real> above = (k % 2 == 0 ? Real(1) : Real(-1)) * std::conj(below);
    for (int n = 0; n + k < n_levels; ++n) {
      d(n + k, n) = below * g[static_cast<std::size_t>(n)];
      if (k > 0) d(n, n + k) = above * g[static_cast<std::size_t>(n)];
    }
  }
  return d;
}

/// D(alpha) on the truncated space. Flags when the retained block is visibly non-unitary
/// on the lower half of the ladder (alpha too large for this truncation).
template <typename Real = double>
BasicOperator<Real> displacement_op(const FockTruncation& trunc, std::complex<Real> alpha, Flags* flags = nullptr) {
  trunc.validate();
  const int levels = trunc.n_levels();
  ComplexMatrix<Real> d = displacement_matrix<Real>(levels, alpha);
  const int half = levels / 2;
  const ComplexMatrix<Real> gram = (d.adjoint() * d).topLeftCorner(half, half);
  const Real defect = (gram - ComplexMatrix<Real>::Identity(half, half)).cwiseAbs().maxCoeff();
  if (defect > Real(1e-6))
    raise_flag(flags, "displacement_op: |D^dagger D - I| = " + std::to_string(defect) +
                          " on the lower half; n_max too small for |alpha| = " + std::to_string(std::abs(alpha)));
  return {std::move(d), trunc.phonon()};
}

// ---------------------------------------------------------------------------
// States

template <typename Real = double>
ComplexMatrix<Real> hermitized(const ComplexMatrix<Real>& m) {
  return (m + m.adjoint()) * Real(0.5);
}

/// Population in the top `levels` Fock levels (summed over spin for joint states).
template <typename Real = double>
Real tail_population(const ComplexMatrix<Real>& rho, SpaceTag tag, int levels = 2) {
  Real tail = 0;
  const int blocks = tag.space == Space::phonon ? 1 : 2;
  for (int b = 0; b < blocks; ++b)
    for (int n = std::max(0, tag.n_levels - levels); n < tag.n_levels; ++n)
      tail += std::real(rho(b * tag.n_levels + n, b * tag.n_levels + n));
  return tail;
}

template <typename Real = double>
Real tail_population(const BasicDensityMatrix<Real>& rho, int levels = 2) {
  return tail_population<Real>(rho.matrix(), rho.tag(), levels);
}

template <typename Real = double>
BasicDensityMatrix<Real> fock_state(const FockTruncation& trunc, int n) {
  trunc.validate();
  if (n < 0 || n > trunc.n_max) throw DimensionError("fock_state: level " + std::to_string(n) + " not retained");
  ComplexMatrix<Real> m = ComplexMatrix<Real>::Zero(trunc.n_levels(), trunc.n_levels());
  m(n, n) = 1;
  return {std::move(m), trunc.phonon()};
}

template <typename Real = double>
BasicDensityMatrix<Real> vacuum(const FockTruncation& trunc) {
  return fock_state<Real>(trunc, 0);
}

template <typename Real = double>
BasicDensityMatrix<Real> pure_state(const ComplexVector<Real>& psi, SpaceTag tag) {
  const ComplexVector<Real> v = psi / psi.norm();
  return {hermitized<Real>(v * v.adjoint()), tag};
}

/// |alpha><alpha| from the Fock amplitudes e^{-|a|^2/2} a^n / sqrt(n!), renormalized after truncation.
template <typename Real = double>
BasicDensityMatrix<Real> coherent_state(const FockTruncation& trunc, std::complex<Real> alpha) {
  trunc.validate();
  ComplexVector<Real> psi(trunc.n_levels());
  psi(0) = 1;
  for (int n = 1; n < trunc.n_levels(); ++n) psi(n) = psi(n - 1) * alpha / std::sqrt(Real(n));
  return pure_state<Real>(psi, trunc.phonon());
}

template <typename Real = double>
BasicDensityMatrix<Real> thermal_state(const FockTruncation& trunc, Real nbar) {
  trunc.validate();
  if (!(nbar >= 0)) throw Error("thermal_state: nbar must be >= 0");
  ComplexMatrix<Real> m = ComplexMatrix<Real>::Zero(trunc.n_levels(), trunc.n_levels());
  const Real ratio = nbar / (1 + nbar);
  Real p = 1, total = 0;
  for (int n = 0; n < trunc.n_levels(); ++n, p *= ratio) {
    m(n, n) = p;
    total += p;
  }
  m /= total;
  return {std::move(m), trunc.phonon()};
}

/// D(alpha) rho_th(nbar) D^dagger(alpha), renormalized to unit trace. Flags a large top tail.
template <typename Real = double>
BasicDensityMatrix<Real> displaced_thermal_state(const FockTruncation& trunc, Real nbar, std::complex<Real> alpha,
                                                 Flags* flags = nullptr) {
  const BasicDensityMatrix<Real> thermal = thermal_state<Real>(trunc, nbar);
  const BasicOperator<Real> d = displacement_op<Real>(trunc, alpha, flags);
  ComplexMatrix<Real> m = d.matrix() * thermal.matrix() * d.matrix().adjoint();
  m = hermitized<Real>(m);
  m /= std::real(m.trace());
  const Real tail = tail_population<Real>(m, trunc.phonon());
  if (tail > trunc.tail_tolerance)
    raise_flag(flags, "displaced_thermal_state: top-two-level population " + std::to_string(tail) +
                          " exceeds tail tolerance");
  return {std::move(m), trunc.phonon()};
}

// ---------------------------------------------------------------------------
// Spin (x) phonon

namespace spin {

template <typename Real = double>
ComplexMatrix<Real> sigma_plus() {  // |up><down|
  ComplexMatrix<Real> s = ComplexMatrix<Real>::Zero(2, 2);
  s(1, 0) = 1;
  return s;
}

template <typename Real = double>
ComplexMatrix<Real> sigma_minus() {
  return sigma_plus<Real>().adjoint();
}

template <typename Real = double>
ComplexMatrix<Real> sigma_z() {
  ComplexMatrix<Real> s = ComplexMatrix<Real>::Zero(2, 2);
  s(0, 0) = -1;
  s(1, 1) = 1;
  return s;
}

template <typename Real = double>
ComplexMatrix<Real> down_projector() {
  ComplexMatrix<Real> s = ComplexMatrix<Real>::Zero(2, 2);
  s(0, 0) = 1;
  return s;
}

template <typename Real = double>
ComplexMatrix<Real> up_projector() {
  ComplexMatrix<Real> s = ComplexMatrix<Real>::Zero(2, 2);
  s(1, 1) = 1;
  return s;
}

}  // namespace spin

template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// spin_op (x) phonon_op, spin factor first.
template <typename Real = double>
BasicOperator<Real> tensor_with_spin(const BasicOperator<Real>& phonon_op, const ComplexMatrix<Real>& spin_op) {
  if (phonon_op.tag().space != Space::phonon)
    throw DimensionError("tensor_with_spin: expected a phonon operator, got " + to_string(phonon_op.tag()));
  if (spin_op.rows() != 2 || spin_op.cols() != 2)
    throw DimensionError("tensor_with_spin: spin operator must be 2x2, got " + std::to_string(spin_op.rows()) + "x" +
                         std::to_string(spin_op.cols()));
  const SpaceTag joint{Space::spin_phonon, phonon_op.tag().n_levels};
  return {kron(spin_op, phonon_op.matrix()), joint};
}

template <typename Real = double>
BasicDensityMatrix<Real> tensor_with_spin(const BasicDensityMatrix<Real>& phonon_state,
                                          const ComplexMatrix<Real>& spin_state) {
  return BasicDensityMatrix<Real>(tensor_with_spin(phonon_state.op(), spin_state), phonon_state.tolerances());
}

/// Tr_spin of a joint matrix.
template <typename Real = double>
ComplexMatrix<Real> partial_trace_spin(const ComplexMatrix<Real>& joint, int n_levels) {
  if (joint.rows() != 2 * n_levels || joint.cols() != 2 * n_levels)
    throw DimensionError("partial_trace_spin: matrix is not a joint spin-phonon matrix");
  return joint.topLeftCorner(n_levels, n_levels) + joint.bottomRightCorner(n_levels, n_levels);
}

template <typename Real = double>
BasicOperator<Real> partial_trace_spin(const BasicOperator<Real>& joint) {
  if (joint.tag().space != Space::spin_phonon)
    throw DimensionError("partial_trace_spin: expected a spin_phonon operator, got " + to_string(joint.tag()));
  const int levels = joint.tag().n_levels;
  return {partial_trace_spin<Real>(joint.matrix(), levels), SpaceTag{Space::phonon, levels}};
}

// ---------------------------------------------------------------------------
// Scalar functionals

template <typename Real = double>
std::complex<Real> expectation(const BasicDensityMatrix<Real>& rho, const ComplexMatrix<Real>& op) {
  return (rho.matrix() * op).trace();
}

template <typename Real = double>
Real purity(const BasicDensityMatrix<Real>& rho) {
  return std::real((rho.matrix() * rho.matrix()).trace());
}

template <typename Real = double>
Real mean_number(const BasicDensityMatrix<Real>& rho) {
  Real n = 0;
  for (int k = 0; k < rho.dim(); ++k) n += Real(k % rho.tag().n_levels) * std::real(rho.matrix()(k, k));
  return n;
}

/// 1/2 ||rho - sigma||_1
template <typename Real = double>
Real trace_distance(const ComplexMatrix<Real>& rho, const ComplexMatrix<Real>& sigma) {
  const ComplexMatrix<Real> diff = hermitized<Real>(rho - sigma);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<Real>> es(diff, Eigen::EigenvaluesOnly);
  return Real(0.5) * es.eigenvalues().cwiseAbs().sum();
}

template <typename Real = double>
Real trace_distance(const BasicDensityMatrix<Real>& rho, const BasicDensityMatrix<Real>& sigma) {
  if (!(rho.tag() == sigma.tag())) throw DimensionError("trace_distance: space mismatch");
  return trace_distance<Real>(rho.matrix(), sigma.matrix());
}

/// e^{i chi n} rho e^{-i chi n}: rotates phase space by +chi, so <a> picks up e^{i chi}.
template <typename Real = double>
ComplexMatrix<Real> rotate_phase(const ComplexMatrix<Real>& rho, SpaceTag tag, Real chi) {
  ComplexMatrix<Real> out = rho;
  const int levels = tag.n_levels;
  for (Eigen::Index r = 0; r < rho.rows(); ++r)
    for (Eigen::Index c = 0; c < rho.cols(); ++c)
      out(r, c) *= std::polar(Real(1), chi * Real(r % levels - c % levels));
  return out;
}

template <typename Real = double>
BasicDensityMatrix<Real> rotate_phase(const BasicDensityMatrix<Real>& rho, Real chi) {
  return {rotate_phase<Real>(rho.matrix(), rho.tag(), chi), rho.tag(), rho.tolerances()};
}

}  // namespace qvdp
