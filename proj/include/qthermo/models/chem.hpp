#pragma once

// Chemically pumped oscillator: a harmonic mode damped and pumped by a
// reaction bath, with optional pure dephasing, its closed-form growth laws,
// and a banded propagator for truncations far beyond the superoperator cap.

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "qthermo/gkls.hpp"
#include "qthermo/thermo.hpp"

namespace qthermo {

/// Reaction A + B <-> C + photon with chemical potentials at inverse temperature beta.
struct ChemChemistry {
  double beta = 1.0;
  double muA = 0.0;
  double muB = 0.0;
  double muC = 0.0;
};

struct ChemSpec {
  double omega = 1.0;
  double gammaUp = 0.0;
  double gammaDown = 0.0;
  /// Dephasing strength Gamma in -Gamma [a^dag a, [a^dag a, rho]].
  double decoherence = 0.0;
  Index dim = 60;
  std::optional<ChemChemistry> chemistry;
};

/// Delta G = omega + muC - muA - muB.
inline double reactionFreeEnergy(double omega, const ChemChemistry& c) { return omega + c.muC - c.muA - c.muB; }

/// gamma_up fixed by gamma_down and the chemistry: gamma_up / gamma_down = exp(-beta Delta G).
inline double chemicalGammaUp(double gammaDown, double omega, const ChemChemistry& c) {
  return gammaDown * std::exp(-c.beta * reactionFreeEnergy(omega, c));
}

inline void validate(const ChemSpec& s) {
  require(s.dim >= 2, ErrorKind::InvalidDimension, "oscillator truncation must be at least 2");
  require(std::isfinite(s.omega) && s.omega > 0.0, ErrorKind::InvalidArgument, "omega must be positive");
  require(s.gammaUp >= 0.0 && s.gammaDown >= 0.0 && s.decoherence >= 0.0, ErrorKind::InvalidArgument,
          "rates must be nonnegative");
  if (s.chemistry) {
    require(s.gammaDown > 0.0, ErrorKind::DetailedBalanceViolation, "chemistry requires gammaDown > 0");
    const double target = std::exp(-s.chemistry->beta * reactionFreeEnergy(s.omega, *s.chemistry));
    const double ratio = s.gammaUp / s.gammaDown;
    require(std::abs(ratio - target) < 1e-10, ErrorKind::DetailedBalanceViolation,
            "gammaUp/gammaDown = " + std::to_string(ratio) + " but the chemistry requires " + std::to_string(target));
  }
}

inline GklsGenerator buildChemGenerator(const ChemSpec& s) {
  validate(s);
  const Operator a = fockAnnihilation(s.dim);
  const Operator n = numberOperator(s.dim);
  std::vector<LindbladTerm> terms{{a, s.gammaDown, "chem"}, {a.adjoint(), s.gammaUp, "chem"}};
  if (s.decoherence > 0.0) terms.emplace_back(n, 2.0 * s.decoherence, "dephasing");
  return GklsGenerator(s.omega * n, std::move(terms));
}

/// E(t) = e^{kt} E0 + (e^{kt} - 1) omega gamma_up / k with k = gamma_up - gamma_down.
inline double analyticEnergy(const ChemSpec& s, double e0, double t) {
  const double k = s.gammaUp - s.gammaDown;
  if (k == 0.0) return e0 + s.omega * s.gammaUp * t;
  return std::exp(k * t) * e0 + std::expm1(k * t) * s.omega * s.gammaUp / k;
}

inline cplx analyticAmplitude(const ChemSpec& s, cplx alpha0, double t) {
  const double growth = 0.5 * (s.gammaUp - s.gammaDown) - s.decoherence;
  return std::exp(growth * t) * std::polar(1.0, -s.omega * t) * alpha0;
}

/// eta = |alpha0|^2 / (|alpha0|^2 + gamma_up / (gamma_up - gamma_down)).
inline double storageEfficiency(cplx alpha0, double gammaUp, double gammaDown) {
  require(gammaUp > gammaDown, ErrorKind::NotAmplifying, "storage efficiency needs gammaUp > gammaDown");
  const double a2 = std::norm(alpha0);
  return a2 / (a2 + gammaUp / (gammaUp - gammaDown));
}

/// Tr(rho a) in the Fock basis.
inline cplx meanAmplitude(const CMatrix& rho) {
  cplx s = 0.0;
  for (Index n = 1; n < rho.rows(); ++n) s += std::sqrt(double(n)) * rho(n, n - 1);
  return s;
}

inline double meanNumber(const CMatrix& rho) {
  double s = 0.0;
  for (Index n = 1; n < rho.rows(); ++n) s += double(n) * rho(n, n).real();
  return s;
}

inline DensityMatrix coherentState(Index dim, cplx alpha) { return DensityMatrix::pure(coherentVector(dim, alpha)); }

struct BandOptions {
  double dt = 0.01;
  /// Grow the truncation when the top-level population exceeds this.
  double growthThreshold = 1e-10;
  /// Results are trusted only while the top-level population stays below this.
  double validityThreshold = 1e-8;
  double growthFactor = 1.25;
  Index maxDim = 4096;
};

/// Evolves the oscillator generator band by band: the k-th off-diagonal
/// rho_{m+k,m} is closed under the dynamics and obeys a real tridiagonal
/// system times the phase exp(-i omega k t). Integration is BDF2 with an
/// extrapolated backward-Euler start, and the truncation grows on demand.
class OscillatorBandPropagator {
 public:
  OscillatorBandPropagator(const ChemSpec& spec, const CMatrix& rho0, BandOptions opt = {})
      : spec_(spec), opt_(opt), dim_(rho0.rows()) {
    validate(spec_);
    require(rho0.rows() == rho0.cols() && dim_ >= 2, ErrorKind::ShapeError, "initial state must be square");
    require(opt_.dt > 0.0 && opt_.growthFactor > 1.0 && opt_.maxDim >= dim_, ErrorKind::InvalidArgument,
            "bad band propagator options");
    bands_.resize(std::size_t(dim_));
    for (Index k = 0; k < dim_; ++k) {
      CVector b(dim_ - k);
      for (Index m = 0; m < dim_ - k; ++m) b(m) = rho0(m + k, m);
      bands_[std::size_t(k)] = std::move(b);
    }
    maxTop_ = topPopulation();
    growIfNeeded();
  }

  double time() const { return t_; }
  Index dim() const { return dim_; }
  double topPopulation() const { return std::abs(bands_[0](dim_ - 1).real()); }
  /// Largest top-level population seen at the end of any step so far.
  double maxTopPopulation() const { return maxTop_; }
  bool valid() const { return maxTop_ < opt_.validityThreshold; }

  void advanceTo(double t) {
    require(t >= t_ - 1e-12, ErrorKind::InvalidArgument, "band propagator cannot run backwards");
    if (t - t_ <= 1e-14) return;
    const int steps = std::max(1, int(std::ceil((t - t_) / opt_.dt - 1e-9)));
    const double h = (t - t_) / steps;
    std::vector<CVector> prev;
    for (int i = 0; i < steps; ++i) {
      if (i == 0) {
        prev = bands_;
        startStep(h);
      } else {
        std::vector<CVector> cur = bands_;
        bdf2Step(h, prev);
        prev = std::move(cur);
      }
      t_ += h;
      maxTop_ = std::max(maxTop_, topPopulation());
      if (growIfNeeded()) padHistory(prev);
    }
  }

  cplx amplitude() const {
    const CVector& b = bands_[1];
    cplx s = 0.0;
    for (Index m = 0; m < b.size(); ++m) s += std::sqrt(double(m + 1)) * b(m);
    return phase(1) * s;
  }

  double meanNumber() const {
    const CVector& b = bands_[0];
    double s = 0.0;
    for (Index m = 1; m < b.size(); ++m) s += double(m) * b(m).real();
    return s;
  }

  double energy() const { return spec_.omega * meanNumber(); }

  RVector populations() const { return bands_[0].real(); }

  CMatrix density() const {
    CMatrix r = CMatrix::Zero(dim_, dim_);
    for (Index k = 0; k < dim_; ++k) {
      const cplx ph = phase(k);
      const CVector& b = bands_[std::size_t(k)];
      for (Index m = 0; m < b.size(); ++m) {
        r(m + k, m) = ph * b(m);
        if (k > 0) r(m, m + k) = std::conj(r(m + k, m));
      }
    }
    return r;
  }

 private:
  cplx phase(Index k) const { return std::polar(1.0, -spec_.omega * double(k) * t_); }

  double topFactor(Index j) const { return j < dim_ - 1 ? double(j + 1) : 0.0; }

  // Coefficients of band k: lower(m) x_{m-1} + diag(m) x_m + upper(m) x_{m+1}.
  void coefficients(Index k, RVector& lo, RVector& di, RVector& up) const {
    const Index len = dim_ - k;
    lo.resize(len);
    di.resize(len);
    up.resize(len);
    const double gd = spec_.gammaDown, gu = spec_.gammaUp, dec = spec_.decoherence * double(k) * double(k);
    for (Index m = 0; m < len; ++m) {
      const double dm = double(m), dk = double(k);
      di(m) = -0.5 * gd * (2.0 * dm + dk) - 0.5 * gu * (topFactor(m) + topFactor(m + k)) - dec;
      lo(m) = m > 0 ? gu * std::sqrt(dm * (dm + dk)) : 0.0;
      up(m) = m + 1 < len ? gd * std::sqrt((dm + 1.0) * (dm + 1.0 + dk)) : 0.0;
    }
  }

  // Solves (a I - c T) x = rhs for band k in place (Thomas algorithm).
  void solveShifted(Index k, double a, double c, CVector& rhs) const {
    RVector lo, di, up;
    coefficients(k, lo, di, up);
    const Index len = rhs.size();
    RVector cp(len);
    double denom = a - c * di(0);
    cp(0) = -c * up(0) / denom;
    rhs(0) /= denom;
    for (Index m = 1; m < len; ++m) {
      const double l = -c * lo(m);
      denom = (a - c * di(m)) - l * cp(m - 1);
      cp(m) = -c * up(m) / denom;
      rhs(m) = (rhs(m) - l * rhs(m - 1)) / denom;
    }
    for (Index m = len - 2; m >= 0; --m) rhs(m) -= cp(m) * rhs(m + 1);
  }

  // Backward Euler at h and h/2 + h/2, combined to second order.
  void startStep(double h) {
    for (Index k = 0; k < dim_; ++k) {
      CVector& b = bands_[std::size_t(k)];
      CVector full = b;
      solveShifted(k, 1.0, h, full);
      CVector half = b;
      solveShifted(k, 1.0, 0.5 * h, half);
      solveShifted(k, 1.0, 0.5 * h, half);
      b = 2.0 * half - full;
    }
  }

  // (3 I - 2h T) y_{n+1} = 4 y_n - y_{n-1}.
  void bdf2Step(double h, const std::vector<CVector>& prev) {
    for (Index k = 0; k < dim_; ++k) {
      CVector& b = bands_[std::size_t(k)];
      CVector rhs = 4.0 * b - prev[std::size_t(k)];
      solveShifted(k, 3.0, 2.0 * h, rhs);
      b = std::move(rhs);
    }
  }

  bool growIfNeeded() {
    if (topPopulation() <= opt_.growthThreshold) return false;
    if (dim_ >= opt_.maxDim) {
      require(topPopulation() <= opt_.validityThreshold, ErrorKind::TruncationOverflow,
              "top-level population " + std::to_string(topPopulation()) + " at the maximum truncation " +
                  std::to_string(dim_));
      return false;
    }
    const Index next = std::min(opt_.maxDim, Index(std::ceil(double(dim_) * opt_.growthFactor)));
    padHistory(bands_, next);
    dim_ = next;
    return true;
  }

  void padHistory(std::vector<CVector>& bands, Index newDim) const {
    const Index old = Index(bands.size());
    for (Index k = 0; k < old; ++k) {
      CVector& b = bands[std::size_t(k)];
      const Index oldLen = b.size();
      b.conservativeResize(newDim - k);
      b.tail(newDim - k - oldLen).setZero();
    }
    for (Index k = old; k < newDim; ++k) bands.emplace_back(CVector::Zero(newDim - k));
  }

  void padHistory(std::vector<CVector>& bands) const { padHistory(bands, dim_); }

  ChemSpec spec_;
  BandOptions opt_;
  Index dim_;
  double t_ = 0.0;
  double maxTop_ = 0.0;
  std::vector<CVector> bands_;
};

}  // namespace qthermo
