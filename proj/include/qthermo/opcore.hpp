#pragma once

// Dense operator algebra on a finite Hilbert space.
//
// Vectorization convention: column stacking everywhere. For a D x D
// operator X, vec(X)[i + D*j] = X(i, j). Under this convention
//
//   vec(A X B) = (B^T (x) A) vec(X),
//
// so leftMul(A) = I (x) A and rightMul(B) = B^T (x) I.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qthermo/errors.hpp"

namespace qthermo {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr Index kMaxOperatorDim = 64;
inline constexpr int kMaxFermionModes = 12;

inline double maxAbs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

class Operator {
 public:
  explicit Operator(CMatrix m, std::string label = {}) : m_(std::move(m)), label_(std::move(label)) {
    require(m_.rows() > 0 && m_.rows() == m_.cols(), ErrorKind::ShapeError,
            "operator matrix must be square and non-empty, got " + std::to_string(m_.rows()) + "x" +
                std::to_string(m_.cols()));
  }

  static Operator identity(Index dim) { return Operator(CMatrix::Identity(dim, dim), "I"); }
  static Operator zero(Index dim) { return Operator(CMatrix::Zero(dim, dim)); }
  static Operator diagonal(const std::vector<double>& entries, std::string label = {}) {
    CMatrix m = CMatrix::Zero(Index(entries.size()), Index(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) m(Index(i), Index(i)) = entries[i];
    return Operator(std::move(m), std::move(label));
  }
  /// |row><col| on a space of dimension `dim`.
  static Operator transition(Index dim, Index row, Index col) {
    CMatrix m = CMatrix::Zero(dim, dim);
    m(row, col) = 1.0;
    return Operator(std::move(m));
  }

  Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  const std::string& label() const { return label_; }
  Operator withLabel(std::string label) const { return Operator(m_, std::move(label)); }

  Operator adjoint() const {
    return Operator(m_.adjoint(), label_.empty() ? std::string{} : label_ + "^dag");
  }
  cplx trace() const { return m_.trace(); }
  double frobeniusNorm() const { return m_.norm(); }
  /// max |X - X^dag| over entries.
  double hermiticityResidual() const { return maxAbs(m_ - m_.adjoint()); }
  bool isHermitian(double tol) const { return hermiticityResidual() <= tol; }

  friend Operator operator+(const Operator& a, const Operator& b) {
    checkSameDim(a, b);
    return Operator(a.m_ + b.m_);
  }
  friend Operator operator-(const Operator& a, const Operator& b) {
    checkSameDim(a, b);
    return Operator(a.m_ - b.m_);
  }
  friend Operator operator*(const Operator& a, const Operator& b) {
    checkSameDim(a, b);
    return Operator(a.m_ * b.m_);
  }
  friend Operator operator*(cplx s, const Operator& a) { return Operator(s * a.m_); }
  friend Operator operator*(double s, const Operator& a) { return Operator(s * a.m_); }
  friend Operator operator-(const Operator& a) { return Operator(-a.m_); }

  static void checkSameDim(const Operator& a, const Operator& b) {
    require(a.dim() == b.dim(), ErrorKind::ShapeError,
            "dimension mismatch " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }

 private:
  CMatrix m_;
  std::string label_;
};

inline Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }
inline Operator anticommutator(const Operator& a, const Operator& b) { return a * b + b * a; }

struct StateTolerances {
  double trace = 1e-10;
  double hermiticity = 1e-10;
  double positivity = 1e-9;
};

/// Positive unit-trace operator. Validated on construction; the stored
/// matrix is the Hermitian part of the input and its spectrum is cached.
class DensityMatrix {
 public:
  explicit DensityMatrix(const Operator& op, const StateTolerances& tol = {})
      : op_(hermitianPart(op)) {
    const double herm = op.hermiticityResidual();
    require(herm <= tol.hermiticity, ErrorKind::NotAState,
            "state not Hermitian, residual " + std::to_string(herm));
    const cplx tr = op.trace();
    require(std::abs(tr - 1.0) <= tol.trace, ErrorKind::NotAState,
            "trace deviates from 1 by " + std::to_string(std::abs(tr - 1.0)));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(op_.matrix(), Eigen::EigenvaluesOnly);
    spectrum_ = es.eigenvalues();
    require(spectrum_(0) >= -tol.positivity, ErrorKind::NotAState,
            "negative eigenvalue " + std::to_string(spectrum_(0)));
  }

  static DensityMatrix pure(const CVector& psi) {
    const double n = psi.norm();
    require(n > 0.0, ErrorKind::InvalidArgument, "zero state vector");
    CVector u = psi / n;
    return DensityMatrix(Operator(u * u.adjoint()));
  }
  static DensityMatrix basisState(Index dim, Index k) {
    CVector psi = CVector::Zero(dim);
    psi(k) = 1.0;
    return pure(psi);
  }
  static DensityMatrix maximallyMixed(Index dim) {
    return DensityMatrix(Operator(CMatrix::Identity(dim, dim) / double(dim)));
  }
  static DensityMatrix diagonal(const std::vector<double>& probs) { return DensityMatrix(Operator::diagonal(probs)); }

  const Operator& op() const { return op_; }
  const CMatrix& matrix() const { return op_.matrix(); }
  Index dim() const { return op_.dim(); }
  /// Eigenvalues in ascending order.
  const RVector& spectrum() const { return spectrum_; }
  double minEigenvalue() const { return spectrum_(0); }
  double purity() const { return (op_.matrix() * op_.matrix()).trace().real(); }

 private:
  static Operator hermitianPart(const Operator& op) {
    return Operator(0.5 * (op.matrix() + op.matrix().adjoint()), op.label());
  }

  Operator op_;
  RVector spectrum_;
};

/// Trace distance 0.5 * ||a - b||_1.
inline double traceDistance(const DensityMatrix& a, const DensityMatrix& b) {
  Operator::checkSameDim(a.op(), b.op());
  CMatrix d = a.matrix() - b.matrix();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// ---------------------------------------------------------------------------
// Vectorization and superoperators

inline CVector vec(const CMatrix& x) { return Eigen::Map<const CVector>(x.data(), x.size()); }
inline CVector vec(const Operator& x) { return vec(x.matrix()); }

inline CMatrix unvecMatrix(const CVector& v, Index dim) {
  require(v.size() == dim * dim, ErrorKind::ShapeError,
          "vector of length " + std::to_string(v.size()) + " cannot be unvectorized to dim " + std::to_string(dim));
  return Eigen::Map<const CMatrix>(v.data(), dim, dim);
}
inline Operator unvec(const CVector& v, Index dim) { return Operator(unvecMatrix(v, dim)); }

namespace detail {

/// out += c * (A (x) B)
inline void addKron(CMatrix& out, cplx c, const CMatrix& a, const CMatrix& b) {
  const Index br = b.rows(), bc = b.cols();
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) {
      const cplx s = c * a(i, j);
      if (s == cplx(0.0)) continue;
      out.block(i * br, j * bc, br, bc).noalias() += s * b;
    }
}

/// out += c * (I (x) A), cheaper than the generic Kronecker accumulation.
inline void addIdentityKron(CMatrix& out, cplx c, const CMatrix& a) {
  const Index d = a.rows();
  for (Index j = 0; j < d; ++j) out.block(j * d, j * d, d, d).noalias() += c * a;
}

}  // namespace detail

/// Linear map on D x D operators, realized as a D^2 x D^2 matrix acting on
/// column-stacked operators.
class SuperOperator {
 public:
  SuperOperator(Index dim, CMatrix m) : dim_(dim), m_(std::move(m)) {
    require(dim > 0 && m_.rows() == dim * dim && m_.cols() == dim * dim, ErrorKind::ShapeError,
            "superoperator matrix must be D^2 x D^2");
  }

  static SuperOperator identity(Index dim) { return SuperOperator(dim, CMatrix::Identity(dim * dim, dim * dim)); }
  static SuperOperator zero(Index dim) { return SuperOperator(dim, CMatrix::Zero(dim * dim, dim * dim)); }

  Index dim() const { return dim_; }
  const CMatrix& matrix() const { return m_; }

  Operator apply(const Operator& x) const {
    require(x.dim() == dim_, ErrorKind::ShapeError, "superoperator/operator dimension mismatch");
    return unvec(m_ * vec(x), dim_);
  }
  CVector apply(const CVector& v) const { return m_ * v; }

  SuperOperator adjoint() const { return SuperOperator(dim_, m_.adjoint()); }

  friend SuperOperator operator+(const SuperOperator& a, const SuperOperator& b) {
    checkSame(a, b);
    return SuperOperator(a.dim_, a.m_ + b.m_);
  }
  friend SuperOperator operator-(const SuperOperator& a, const SuperOperator& b) {
    checkSame(a, b);
    return SuperOperator(a.dim_, a.m_ - b.m_);
  }
  friend SuperOperator operator*(const SuperOperator& a, const SuperOperator& b) {
    checkSame(a, b);
    return SuperOperator(a.dim_, a.m_ * b.m_);
  }
  friend SuperOperator operator*(cplx s, const SuperOperator& a) { return SuperOperator(a.dim_, s * a.m_); }

 private:
  static void checkSame(const SuperOperator& a, const SuperOperator& b) {
    require(a.dim_ == b.dim_, ErrorKind::ShapeError, "superoperator dimension mismatch");
  }

  Index dim_;
  CMatrix m_;
};

inline SuperOperator leftMul(const Operator& a) {
  const Index d = a.dim();
  CMatrix m = CMatrix::Zero(d * d, d * d);
  detail::addIdentityKron(m, 1.0, a.matrix());
  return SuperOperator(d, std::move(m));
}

inline SuperOperator rightMul(const Operator& a) {
  const Index d = a.dim();
  CMatrix m = CMatrix::Zero(d * d, d * d);
  detail::addKron(m, 1.0, a.matrix().transpose(), CMatrix::Identity(d, d));
  return SuperOperator(d, std::move(m));
}

// ---------------------------------------------------------------------------
// Mode construction

/// Truncated bosonic annihilation operator, a|n> = sqrt(n)|n-1> for n < dim.
inline Operator fockAnnihilation(Index dim) {
  require(dim >= 2, ErrorKind::InvalidDimension, "Fock truncation must be >= 2, got " + std::to_string(dim));
  CMatrix m = CMatrix::Zero(dim, dim);
  for (Index n = 1; n < dim; ++n) m(n - 1, n) = std::sqrt(double(n));
  return Operator(std::move(m), "a");
}

inline Operator numberOperator(Index dim) {
  require(dim >= 1, ErrorKind::InvalidDimension, "dimension must be positive");
  CMatrix m = CMatrix::Zero(dim, dim);
  for (Index n = 0; n < dim; ++n) m(n, n) = double(n);
  return Operator(std::move(m), "N");
}

/// Annihilation operator of mode `mode` among `nModes` fermionic modes,
/// Jordan-Wigner form Z (x) ... (x) Z (x) a (x) I (x) ... (x) I with mode 0 as
/// the leftmost tensor factor. Basis index s encodes occupation of mode j in
/// bit (nModes - 1 - j); the sign string counts occupied modes before `mode`.
inline Operator fermionMode(int nModes, int mode) {
  require(nModes >= 1 && nModes <= kMaxFermionModes, ErrorKind::InvalidDimension,
          "mode count must lie in [1, 12], got " + std::to_string(nModes));
  require(mode >= 0 && mode < nModes, ErrorKind::InvalidArgument, "mode index out of range");
  const Index dim = Index(1) << nModes;
  const std::uint64_t bit = std::uint64_t(1) << (nModes - 1 - mode);
  CMatrix m = CMatrix::Zero(dim, dim);
  for (std::uint64_t s = 0; s < std::uint64_t(dim); ++s) {
    if (!(s & bit)) continue;
    const int before = std::popcount(s >> (nModes - mode));
    m(Index(s ^ bit), Index(s)) = (before % 2 == 0) ? 1.0 : -1.0;
  }
  return Operator(std::move(m), "c" + std::to_string(mode));
}

inline std::vector<Operator> fermionModes(int nModes) {
  require(nModes >= 1 && nModes <= kMaxFermionModes, ErrorKind::InvalidDimension,
          "mode count must lie in [1, 12], got " + std::to_string(nModes));
  std::vector<Operator> out;
  out.reserve(std::size_t(nModes));
  for (int j = 0; j < nModes; ++j) out.push_back(fermionMode(nModes, j));
  return out;
}

/// Coherent state |alpha> truncated to `dim` levels and renormalized.
inline CVector coherentVector(Index dim, cplx alpha) {
  require(dim >= 2, ErrorKind::InvalidDimension, "Fock truncation must be >= 2");
  CVector psi(dim);
  psi(0) = 1.0;
  for (Index n = 1; n < dim; ++n) psi(n) = psi(n - 1) * alpha / std::sqrt(double(n));
  return psi / psi.norm();
}

}  // namespace qthermo
