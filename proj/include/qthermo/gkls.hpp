#pragma once

// GKLS generators in the Schroedinger and Heisenberg pictures, stationary
// states, propagation, and the stationary-state weighted inner product used
// for the quantum detailed balance diagnostics.

#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qthermo/linalg.hpp"
#include "qthermo/opcore.hpp"

namespace qthermo {

/// Tolerances used by the generator layer. Every default can be overridden.
struct GklsTolerances {
  double stationarity = 1e-8;
  double hermiticity = 1e-10;
  double positivity = 1e-9;
  /// Kernel eigenvalues: |lambda| <= nullEigenvalue * max(1, max|S_ij|).
  double nullEigenvalue = 1e-9;
  /// Negative-eigenvalue floor accepted for a computed stationary state.
  double stationaryPositivity = 1e-8;
};

/// One dissipative channel. The rate is kept separate from the jump operator
/// and absorbed as sqrt(rate) * V when the generator is assembled.
struct LindbladTerm {
  Operator jump;
  double rate;
  std::string bath;

  LindbladTerm(Operator v, double r, std::string label = {}) : jump(std::move(v)), rate(r), bath(std::move(label)) {
    require(rate >= 0.0 && std::isfinite(rate), ErrorKind::InvalidArgument,
            "jump rate must be finite and nonnegative, got " + std::to_string(rate));
  }
};

class GklsGenerator {
 public:
  GklsGenerator(Operator hamiltonian, std::vector<LindbladTerm> terms = {})
      : h_(std::move(hamiltonian)), terms_(std::move(terms)) {
    const double herm = h_.hermiticityResidual();
    require(herm <= 1e-12 * std::max(1.0, maxAbs(h_.matrix())), ErrorKind::NotHermitian,
            "Hamiltonian is not Hermitian, residual " + std::to_string(herm));
    for (const auto& t : terms_)
      require(t.jump.dim() == h_.dim(), ErrorKind::ShapeError,
              "jump operator dimension " + std::to_string(t.jump.dim()) + " differs from system dimension " +
                  std::to_string(h_.dim()));
  }

  Index dim() const { return h_.dim(); }
  const Operator& hamiltonian() const { return h_; }
  const std::vector<LindbladTerm>& terms() const { return terms_; }

  std::vector<std::string> bathLabels() const {
    std::vector<std::string> out;
    for (const auto& t : terms_)
      if (std::find(out.begin(), out.end(), t.bath) == out.end()) out.push_back(t.bath);
    return out;
  }

  /// Dissipator of a single bath, without Hamiltonian part.
  GklsGenerator bathPart(const std::string& label) const {
    std::vector<LindbladTerm> sel;
    for (const auto& t : terms_)
      if (t.bath == label) sel.push_back(t);
    return GklsGenerator(Operator::zero(dim()), std::move(sel));
  }

  GklsGenerator dissipativePart() const { return GklsGenerator(Operator::zero(dim()), terms_); }

  /// Largest rate * ||V||^2 over the jump terms.
  double maxRate() const {
    double best = 0.0;
    for (const auto& t : terms_) {
      if (t.rate == 0.0) continue;
      Eigen::JacobiSVD<CMatrix> svd(t.jump.matrix());
      const double s = svd.singularValues()(0);
      best = std::max(best, t.rate * s * s);
    }
    return best;
  }

  /// rho -> -i[H, rho] + sum_j rate_j (V rho V^dag - 1/2 {V^dag V, rho}).
  Operator apply(const Operator& rho) const {
    Operator::checkSameDim(h_, rho);
    const cplx I(0.0, 1.0);
    const CMatrix& h = h_.matrix();
    const CMatrix& r = rho.matrix();
    CMatrix out = -I * (h * r - r * h);
    addDissipator(out, r);
    return Operator(std::move(out));
  }

  Operator applyDissipator(const Operator& rho) const {
    Operator::checkSameDim(h_, rho);
    CMatrix out = CMatrix::Zero(dim(), dim());
    addDissipator(out, rho.matrix());
    return Operator(std::move(out));
  }

  /// X -> i[H, X] + sum_j rate_j (V^dag X V - 1/2 {V^dag V, X}).
  Operator applyHeisenberg(const Operator& x) const {
    Operator::checkSameDim(h_, x);
    const cplx I(0.0, 1.0);
    const CMatrix& h = h_.matrix();
    const CMatrix& m = x.matrix();
    CMatrix out = I * (h * m - m * h);
    for (const auto& t : terms_) {
      if (t.rate == 0.0) continue;
      const CMatrix& v = t.jump.matrix();
      const CMatrix vd = v.adjoint();
      const CMatrix vdv = vd * v;
      out += t.rate * (vd * m * v - 0.5 * (vdv * m + m * vdv));
    }
    return Operator(std::move(out));
  }

 private:
  void addDissipator(CMatrix& out, const CMatrix& r) const {
    for (const auto& t : terms_) {
      if (t.rate == 0.0) continue;
      const CMatrix& v = t.jump.matrix();
      const CMatrix vd = v.adjoint();
      const CMatrix vdv = vd * v;
      out += t.rate * (v * r * vd - 0.5 * (vdv * r + r * vdv));
    }
  }

  Operator h_;
  std::vector<LindbladTerm> terms_;
};

// ---------------------------------------------------------------------------
// Superoperator realizations

namespace detail {

inline void addHamiltonianPart(CMatrix& out, const CMatrix& h, cplx sign) {
  // sign * (-i) * (I (x) H - H^T (x) I); sign = +1 Schroedinger, -1 Heisenberg.
  const Index d = h.rows();
  const cplx I(0.0, 1.0);
  addIdentityKron(out, -I * sign, h);
  addKron(out, I * sign, h.transpose(), CMatrix::Identity(d, d));
}

}  // namespace detail

inline SuperOperator schrodingerSuper(const GklsGenerator& gen) {
  const Index d = gen.dim();
  require(d <= kMaxOperatorDim, ErrorKind::InvalidDimension,
          "superoperator assembly is capped at operator dimension 64");
  CMatrix m = CMatrix::Zero(d * d, d * d);
  const CMatrix id = CMatrix::Identity(d, d);
  detail::addHamiltonianPart(m, gen.hamiltonian().matrix(), 1.0);
  for (const auto& t : gen.terms()) {
    if (t.rate == 0.0) continue;
    const CMatrix& v = t.jump.matrix();
    const CMatrix vdv = v.adjoint() * v;
    detail::addKron(m, t.rate, v.conjugate(), v);
    detail::addIdentityKron(m, -0.5 * t.rate, vdv);
    detail::addKron(m, -0.5 * t.rate, vdv.transpose(), id);
  }
  return SuperOperator(d, std::move(m));
}

inline SuperOperator heisenbergSuper(const GklsGenerator& gen) {
  const Index d = gen.dim();
  require(d <= kMaxOperatorDim, ErrorKind::InvalidDimension,
          "superoperator assembly is capped at operator dimension 64");
  CMatrix m = CMatrix::Zero(d * d, d * d);
  const CMatrix id = CMatrix::Identity(d, d);
  detail::addHamiltonianPart(m, gen.hamiltonian().matrix(), -1.0);
  for (const auto& t : gen.terms()) {
    if (t.rate == 0.0) continue;
    const CMatrix& v = t.jump.matrix();
    const CMatrix vdv = v.adjoint() * v;
    detail::addKron(m, t.rate, v.transpose(), v.adjoint());
    detail::addIdentityKron(m, -0.5 * t.rate, vdv);
    detail::addKron(m, -0.5 * t.rate, vdv.transpose(), id);
  }
  return SuperOperator(d, std::move(m));
}

/// Gibbs-ratio pair for a lowering eigenoperator A of H0 ([H0, A] = -omega A):
/// (A, baseRate) and (A^dag, baseRate * exp(-beta * omega)).
inline std::pair<LindbladTerm, LindbladTerm> thermalPair(const Operator& h0, const Operator& a, double baseRate,
                                                         double bohrFrequency, double beta,
                                                         const std::string& bath, double tol = 1e-10) {
  Operator::checkSameDim(h0, a);
  require(baseRate > 0.0, ErrorKind::InvalidArgument, "base rate must be positive");
  const CMatrix res = commutator(h0, a).matrix() + bohrFrequency * a.matrix();
  const double scale = std::max(1.0, maxAbs(h0.matrix())) * std::max(1.0, maxAbs(a.matrix()));
  require(maxAbs(res) <= tol * scale, ErrorKind::NotAnEigenoperator,
          "[H0, A] != -omega A, residual " + std::to_string(maxAbs(res)));
  return {LindbladTerm(a, baseRate, bath), LindbladTerm(a.adjoint(), baseRate * std::exp(-beta * bohrFrequency), bath)};
}

/// Z^-1 exp(-beta H).
inline DensityMatrix gibbsState(const Operator& h, double beta) {
  const RVector ev = detail::hermitianEigenvalues(h.matrix());
  const double shift = beta >= 0 ? ev(0) : ev(ev.size() - 1);
  CMatrix rho = detail::hermitianFunction(h.matrix(), [&](double e) { return std::exp(-beta * (e - shift)); });
  rho /= rho.trace().real();
  return DensityMatrix(Operator(std::move(rho)));
}

// ---------------------------------------------------------------------------
// Stationary states

/// Unique kernel element of the generator, normalized to a state. The
/// superoperator is split into invariant blocks (connected components of its
/// sparsity graph); each block is eigendecomposed and the kernel dimension
/// is summed over blocks. The kernel vector is then refined by solving the
/// block system bordered with the trace constraint.
inline DensityMatrix stationaryState(const GklsGenerator& gen, const GklsTolerances& tol = {}) {
  const Index d = gen.dim();
  const CMatrix s = schrodingerSuper(gen).matrix();
  const double scale = std::max(1.0, maxAbs(s));
  const auto blocks = detail::invariantBlocks(s);

  Index nullity = 0;
  const std::vector<Index>* kernelBlock = nullptr;
  for (const auto& idx : blocks) {
    const CMatrix b = detail::extractBlock(s, idx);
    Index k = 0;
    if (b.rows() <= 1024) {
      Eigen::ComplexEigenSolver<CMatrix> es(b, false);
      require(es.info() == Eigen::Success, ErrorKind::NumericalDrift, "eigensolver failed on generator block");
      for (Index i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i)) <= tol.nullEigenvalue * scale) ++k;
    } else {
      Eigen::ColPivHouseholderQR<CMatrix> qr(b);
      qr.setThreshold(tol.nullEigenvalue);
      k = b.cols() - qr.rank();
    }
    if (k > 0) kernelBlock = &idx;
    nullity += k;
  }
  require(nullity >= 1, ErrorKind::NotAState, "generator has no stationary state");
  require(nullity == 1, ErrorKind::NonUniqueStationary,
          "stationary space has dimension " + std::to_string(nullity));

  const auto& idx = *kernelBlock;
  const Index m = Index(idx.size());
  CMatrix bordered = CMatrix::Zero(m + 1, m);
  bordered.topRows(m) = detail::extractBlock(s, idx);
  bool hasDiagonal = false;
  for (Index i = 0; i < m; ++i)
    if (idx[std::size_t(i)] % (d + 1) == 0) {
      bordered(m, i) = 1.0;
      hasDiagonal = true;
    }
  require(hasDiagonal, ErrorKind::NotAState, "kernel of the generator is traceless");
  CVector rhs = CVector::Zero(m + 1);
  rhs(m) = 1.0;
  const CVector x = bordered.colPivHouseholderQr().solve(rhs);

  CVector full = CVector::Zero(d * d);
  for (Index i = 0; i < m; ++i) full(idx[std::size_t(i)]) = x(i);
  CMatrix rho = unvecMatrix(full, d);
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace();

  StateTolerances st;
  st.positivity = tol.stationaryPositivity;
  return DensityMatrix(Operator(std::move(rho)), st);
}

/// Isometry-restricted generator: H -> W^dag H W and V -> W^dag V W for a
/// D x d isometry W whose range is invariant under H and every jump.
inline GklsGenerator restrictToSubspace(const GklsGenerator& gen, const CMatrix& isometry, double tol = 1e-10) {
  require(isometry.rows() == gen.dim() && isometry.cols() >= 1 && isometry.cols() <= gen.dim(),
          ErrorKind::ShapeError, "isometry shape does not match generator");
  const Index d = isometry.cols();
  require(maxAbs(isometry.adjoint() * isometry - CMatrix::Identity(d, d)) <= tol, ErrorKind::InvalidArgument,
          "columns are not orthonormal");
  const CMatrix proj = CMatrix::Identity(gen.dim(), gen.dim()) - isometry * isometry.adjoint();
  auto restrictOp = [&](const Operator& op) {
    require(maxAbs(proj * op.matrix() * isometry) <= tol && maxAbs(proj * op.matrix().adjoint() * isometry) <= tol,
            ErrorKind::InvalidArgument, "subspace is not invariant");
    return Operator(isometry.adjoint() * op.matrix() * isometry, op.label());
  };
  std::vector<LindbladTerm> terms;
  for (const auto& t : gen.terms()) terms.emplace_back(restrictOp(t.jump), t.rate, t.bath);
  return GklsGenerator(restrictOp(gen.hamiltonian()), std::move(terms));
}

// ---------------------------------------------------------------------------
// Driven families and trajectories

/// Generator family xi -> L[xi] with drive xi(t) = g sin(Omega t). The
/// Hamiltonian must take the form H(xi) = H0 + xi M.
class GeneratorFamily {
 public:
  using Builder = std::function<GklsGenerator(double)>;

  GeneratorFamily(Builder builder, Operator drive, double amplitude, double frequency)
      : builder_(std::move(builder)), drive_(std::move(drive)), g_(amplitude), omega_(frequency) {
    require(omega_ > 0.0, ErrorKind::InvalidArgument, "drive frequency must be positive");
    require(drive_.isHermitian(1e-12 * std::max(1.0, maxAbs(drive_.matrix()))), ErrorKind::NotHermitian,
            "drive observable is not Hermitian");
    const GklsGenerator g0 = builder_(0.0);
    const GklsGenerator g1 = builder_(1.0);
    Operator::checkSameDim(g0.hamiltonian(), drive_);
    const double lin = maxAbs(g1.hamiltonian().matrix() - g0.hamiltonian().matrix() - drive_.matrix());
    require(lin <= 1e-9 * (1.0 + maxAbs(drive_.matrix())), ErrorKind::InvalidArgument,
            "family Hamiltonian is not H0 + xi M");
    commutatorNorm_ = maxAbs(commutator(g0.hamiltonian(), drive_).matrix());
    if (commutatorNorm_ > 1e-10)
      warnings_.push_back("drive observable does not commute with H0 (max |[H0,M]| = " +
                          std::to_string(commutatorNorm_) + "); power formulas assume [H0,M] = 0");
  }

  GklsGenerator at(double xi) const { return builder_(xi); }
  const Operator& drive() const { return drive_; }
  double amplitude() const { return g_; }
  double frequency() const { return omega_; }
  double xi(double t) const { return g_ * std::sin(omega_ * t); }
  double xiRate(double t) const { return g_ * omega_ * std::cos(omega_ * t); }
  double driveCommutatorNorm() const { return commutatorNorm_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  GeneratorFamily withAmplitude(double g) const { return GeneratorFamily(builder_, drive_, g, omega_); }
  GeneratorFamily withFrequency(double omega) const { return GeneratorFamily(builder_, drive_, g_, omega); }

 private:
  Builder builder_;
  Operator drive_;
  double g_;
  double omega_;
  double commutatorNorm_ = 0.0;
  std::vector<std::string> warnings_;
};

/// A static generator as a family with zero drive.
inline GeneratorFamily staticFamily(const GklsGenerator& gen) {
  return GeneratorFamily([gen](double) { return gen; }, Operator::zero(gen.dim()), 0.0, 1.0);
}

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  /// xi at the midpoint of each step (driven propagation only).
  std::vector<double> xiSamples;
};

namespace detail {

inline void checkGrid(const std::vector<double>& times) {
  require(!times.empty(), ErrorKind::InvalidArgument, "time grid is empty");
  for (std::size_t i = 1; i < times.size(); ++i)
    require(times[i] > times[i - 1], ErrorKind::InvalidArgument, "time grid must be strictly increasing");
}

inline DensityMatrix stepState(const CVector& v, Index d, std::size_t step, const GklsTolerances& tol) {
  StateTolerances st{1e-10, tol.hermiticity, tol.positivity};
  try {
    return DensityMatrix(Operator(unvecMatrix(v, d)), st);
  } catch (const Error& e) {
    fail(ErrorKind::NumericalDrift, "state invariants violated at step " + std::to_string(step) + " (" + e.what() + ")");
  }
}

}  // namespace detail

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  require(n >= 2, ErrorKind::InvalidArgument, "linspace needs at least two points");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * double(i) / double(n - 1);
  out.back() = b;
  return out;
}

/// Propagation of a time-independent generator by exponentials of its
/// superoperator between grid points.
inline Trajectory evolve(const GklsGenerator& gen, const DensityMatrix& rho0, const std::vector<double>& times,
                         const GklsTolerances& tol = {}) {
  Operator::checkSameDim(gen.hamiltonian(), rho0.op());
  detail::checkGrid(times);
  const Index d = gen.dim();
  const CMatrix s = schrodingerSuper(gen).matrix();
  std::vector<detail::Propagator> cache;
  Trajectory traj;
  traj.times = times;
  traj.states.reserve(times.size());
  traj.states.push_back(rho0);
  CVector v = vec(rho0.op());
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double dt = times[i] - times[i - 1];
    const detail::Propagator* prop = nullptr;
    for (const auto& p : cache)
      if (std::abs(p.dt() - dt) <= 1e-13 * dt) prop = &p;
    if (!prop) {
      cache.emplace_back(s, dt);
      prop = &cache.back();
    }
    v = prop->apply(v);
    traj.states.push_back(detail::stepState(v, d, i, tol));
    v = vec(traj.states.back().op());
  }
  return traj;
}

/// Piecewise-frozen propagation of a driven family: on each step the
/// generator is evaluated at xi(t_mid) and exponentiated.
inline Trajectory evolveDriven(const GeneratorFamily& family, const DensityMatrix& rho0,
                               const std::vector<double>& times, const GklsTolerances& tol = {}) {
  detail::checkGrid(times);
  const GklsGenerator g0 = family.at(0.0);
  Operator::checkSameDim(g0.hamiltonian(), rho0.op());
  double maxRate = 0.0;
  for (double xi : {-family.amplitude(), 0.0, family.amplitude()}) maxRate = std::max(maxRate, family.at(xi).maxRate());
  double maxStep = 0.05 / family.frequency();
  if (maxRate > 0.0) maxStep = std::min(maxStep, 0.1 / maxRate);
  for (std::size_t i = 1; i < times.size(); ++i)
    require(times[i] - times[i - 1] <= maxStep * (1.0 + 1e-12), ErrorKind::StepTooLarge,
            "step " + std::to_string(i) + " exceeds " + std::to_string(maxStep));

  const Index d = g0.dim();
  Trajectory traj;
  traj.times = times;
  traj.states.reserve(times.size());
  traj.states.push_back(rho0);
  CVector v = vec(rho0.op());
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double dt = times[i] - times[i - 1];
    const double xi = family.xi(0.5 * (times[i] + times[i - 1]));
    traj.xiSamples.push_back(xi);
    const detail::Propagator prop(schrodingerSuper(family.at(xi)).matrix(), dt);
    v = prop.apply(v);
    traj.states.push_back(detail::stepState(v, d, i, tol));
    v = vec(traj.states.back().op());
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Inner product and detailed balance

/// <X, Y>_rhoBar = Tr(rhoBar X^dag Y).
inline cplx weightedInnerProduct(const Operator& x, const Operator& y, const DensityMatrix& rhoBar) {
  Operator::checkSameDim(x, y);
  Operator::checkSameDim(x, rhoBar.op());
  require(rhoBar.minEigenvalue() > 1e-12, ErrorKind::SingularWeight,
          "weight state is not strictly positive, min eigenvalue " + std::to_string(rhoBar.minEigenvalue()));
  return (rhoBar.matrix() * x.matrix().adjoint() * y.matrix()).trace();
}

/// Residuals of the quantum detailed balance condition for the Heisenberg
/// generator with respect to <.,.>_rhoBar, each relative to the norms of the
/// parts involved (zero when the part vanishes).
struct DetailedBalanceReport {
  double dissipativeHermiticity = 0.0;
  double hamiltonianAntiHermiticity = 0.0;
  double commutator = 0.0;
  double tolerance = 1e-10;

  bool passed() const {
    return dissipativeHermiticity <= tolerance && hamiltonianAntiHermiticity <= tolerance && commutator <= tolerance;
  }
};

inline DetailedBalanceReport detailedBalanceReport(const GklsGenerator& gen, const DensityMatrix& rhoBar,
                                                   double tolerance = 1e-10, const GklsTolerances& tol = {}) {
  Operator::checkSameDim(gen.hamiltonian(), rhoBar.op());
  const double stat = gen.apply(rhoBar.op()).frobeniusNorm();
  require(stat < tol.stationarity, ErrorKind::NotStationary,
          "weight state is not stationary, ||L rho|| = " + std::to_string(stat));
  require(rhoBar.minEigenvalue() > 1e-12, ErrorKind::SingularWeight, "weight state is not strictly positive");

  const Index d = gen.dim();
  const CMatrix full = heisenbergSuper(gen).matrix();
  CMatrix ham = CMatrix::Zero(d * d, d * d);
  detail::addHamiltonianPart(ham, gen.hamiltonian().matrix(), -1.0);
  const CMatrix diss = full - ham;

  // In vectorized form <x, y> = x^H (rhoBar^T (x) I) y; conjugating by the
  // square root of that weight turns adjoints into plain conjugate transposes.
  const CMatrix sq = detail::hermitianFunction(rhoBar.matrix(), [](double e) { return std::sqrt(e); });
  const CMatrix isq = detail::hermitianFunction(rhoBar.matrix(), [](double e) { return 1.0 / std::sqrt(e); });
  const CMatrix w = rightMul(Operator(sq)).matrix();
  const CMatrix wi = rightMul(Operator(isq)).matrix();
  const CMatrix dt = w * diss * wi;
  const CMatrix kt = w * ham * wi;

  DetailedBalanceReport r;
  r.tolerance = tolerance;
  const double dn = dt.norm(), kn = kt.norm();
  if (dn > 0.0) r.dissipativeHermiticity = (dt - dt.adjoint()).norm() / dn;
  if (kn > 0.0) r.hamiltonianAntiHermiticity = (kt + kt.adjoint()).norm() / kn;
  if (dn > 0.0 && kn > 0.0) r.commutator = (kt * dt - dt * kt).norm() / (kn * dn);
  return r;
}

}  // namespace qthermo
