#pragma once

// Numerical kernels shared by the generator, engine and model layers.

#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "qthermo/opcore.hpp"

namespace qthermo::detail {

using SparseC = Eigen::SparseMatrix<cplx>;

/// Largest absolute column sum.
inline double norm1(const SparseC& a) {
  double best = 0.0;
  for (Index k = 0; k < a.outerSize(); ++k) {
    double s = 0.0;
    for (SparseC::InnerIterator it(a, k); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

inline double norm1(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().colwise().sum().maxCoeff(); }

/// exp(t A) v by truncated Taylor series with scaling: the interval is split
/// so that ||A||_1 h <= 3.5 and each substep is summed until two successive
/// terms fall below unit roundoff relative to the partial sum.
template <typename MatVec>
CVector expmvTaylor(MatVec&& apply, double normA, double t, CVector v) {
  if (t == 0.0 || normA == 0.0) return v;
  constexpr double theta = 3.5;
  constexpr double tol = std::numeric_limits<double>::epsilon() / 2;
  constexpr int maxTerms = 80;
  const int steps = std::max(1, int(std::ceil(normA * std::abs(t) / theta)));
  const double h = t / steps;
  for (int s = 0; s < steps; ++s) {
    CVector term = v;
    CVector sum = v;
    double prev = term.lpNorm<Eigen::Infinity>();
    for (int k = 1; k <= maxTerms; ++k) {
      term = apply(term) * (h / k);
      sum += term;
      const double cur = term.lpNorm<Eigen::Infinity>();
      if (cur + prev <= tol * sum.lpNorm<Eigen::Infinity>()) break;
      prev = cur;
    }
    v = std::move(sum);
  }
  return v;
}

inline CVector expmv(const SparseC& a, double t, const CVector& v) {
  return expmvTaylor([&](const CVector& x) -> CVector { return a * x; }, norm1(a), t, v);
}

/// Propagator exp(dt S) for a fixed superoperator matrix S. Small problems
/// get a dense Pade exponential; larger ones keep S sparse and apply the
/// Taylor action on each call.
class Propagator {
 public:
  static constexpr Index kDenseLimit = 256;

  Propagator(const CMatrix& generator, double dt) : dt_(dt) {
    if (generator.rows() <= kDenseLimit) {
      dense_ = (generator * dt).exp();
      isDense_ = true;
    } else {
      sparse_ = generator.sparseView(cplx(0.0), 0.0);
      sparse_.makeCompressed();
      norm_ = norm1(sparse_);
    }
  }

  CVector apply(const CVector& v) const {
    if (isDense_) return dense_ * v;
    return expmvTaylor([&](const CVector& x) -> CVector { return sparse_ * x; }, norm_, dt_, v);
  }

  double dt() const { return dt_; }

 private:
  double dt_;
  bool isDense_ = false;
  CMatrix dense_;
  SparseC sparse_;
  double norm_ = 0.0;
};

/// Partition of {0..n-1} into connected components of the sparsity graph of
/// a square matrix (an edge wherever a(i,j) or a(j,i) is nonzero). The matrix
/// is block diagonal after permuting indices component by component.
inline std::vector<std::vector<Index>> invariantBlocks(const CMatrix& a) {
  const Index n = a.rows();
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index(0));
  auto find = [&](Index x) {
    while (parent[std::size_t(x)] != x) {
      parent[std::size_t(x)] = parent[std::size_t(parent[std::size_t(x)])];
      x = parent[std::size_t(x)];
    }
    return x;
  };
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (i != j && a(i, j) != cplx(0.0)) {
        const Index ri = find(i), rj = find(j);
        if (ri != rj) parent[std::size_t(std::max(ri, rj))] = std::min(ri, rj);
      }
  std::map<Index, std::vector<Index>> groups;
  for (Index i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<Index>> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

inline CMatrix extractBlock(const CMatrix& a, const std::vector<Index>& idx) {
  const Index m = Index(idx.size());
  CMatrix b(m, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < m; ++i) b(i, j) = a(idx[std::size_t(i)], idx[std::size_t(j)]);
  return b;
}

/// Eigenvalues of a Hermitian matrix, ascending.
inline RVector hermitianEigenvalues(const CMatrix& h) {
  if (h.isDiagonal(0.0)) {
    RVector d = h.diagonal().real();
    std::sort(d.data(), d.data() + d.size());
    return d;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// f(H) for Hermitian H via its eigendecomposition.
template <typename F>
CMatrix hermitianFunction(const CMatrix& h, F&& f) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
  RVector fv = es.eigenvalues().unaryExpr(f);
  return es.eigenvectors() * fv.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace qthermo::detail
