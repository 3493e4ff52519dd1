#pragma once

// Second-order average power of a periodically driven open system:
// stationary-state derivative, resolvent and high-frequency power formulas,
// and the single-bath equilibrium bound.

#include <cmath>
#include <functional>
#include <optional>

#include "qthermo/gkls.hpp"
#include "qthermo/thermo.hpp"

namespace qthermo {

struct DerivativeOptions {
  /// Finite-difference step; 0 selects 1e-4 * max(1, ||H0||_2).
  double delta = 0.0;
  double identityTolerance = 1e-4;
  /// Disable when states come from an approximate provider that is not the
  /// kernel of the generator.
  bool enforceIdentity = true;
  /// Return the Richardson combination (4 D(delta/2) - D(delta)) / 3
  /// instead of the plain central difference D(delta).
  bool extrapolate = false;
  /// Replaces stationaryState(L[xi]) as the source of rhoBar[xi].
  std::function<DensityMatrix(double)> stateProvider;
  GklsTolerances tolerances;
};

struct StationaryDerivative {
  Operator derivative;
  /// ||L'[0] rhoBar[0] + L[0] rhoBar'[0]||_F with L' by central differences.
  double identityResidual = 0.0;
  /// ||D(delta) - D(delta/2)||_F * 4/3, the leading truncation error of D(delta).
  double richardsonError = 0.0;
  double delta = 0.0;
  DensityMatrix state;
};

inline double defaultDelta(const GeneratorFamily& family) {
  const CMatrix& h = family.at(0.0).hamiltonian().matrix();
  const RVector ev = detail::hermitianEigenvalues(h);
  const double norm2 = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return 1e-4 * std::max(1.0, norm2);
}

/// rhoBar'[0] by a central difference of stationary states at +-delta.
inline StationaryDerivative stationaryDerivative(const GeneratorFamily& family, const DerivativeOptions& opt = {}) {
  const double delta = opt.delta > 0.0 ? opt.delta : defaultDelta(family);
  require(std::isfinite(delta) && delta > 0.0, ErrorKind::InvalidArgument, "delta must be positive");
  auto state = [&](double xi) {
    return opt.stateProvider ? opt.stateProvider(xi) : stationaryState(family.at(xi), opt.tolerances);
  };
  auto central = [&](double h) -> CMatrix { return (state(h).matrix() - state(-h).matrix()) / (2.0 * h); };

  const CMatrix d1 = central(delta);
  const CMatrix d2 = central(0.5 * delta);
  const DensityMatrix rho0 = state(0.0);
  const GklsGenerator l0 = family.at(0.0);
  const Operator deriv(opt.extrapolate ? CMatrix((4.0 * d2 - d1) / 3.0) : d1);

  const CMatrix lPrimeRho =
      (family.at(delta).apply(rho0.op()).matrix() - family.at(-delta).apply(rho0.op()).matrix()) / (2.0 * delta);
  const double residual = (lPrimeRho + l0.apply(deriv).matrix()).norm();
  if (opt.enforceIdentity)
    require(residual <= opt.identityTolerance, ErrorKind::IdentityViolation,
            "stationary-derivative identity residual " + std::to_string(residual));
  return StationaryDerivative{deriv, residual, (d1 - d2).norm() * 4.0 / 3.0, delta, rho0};
}

namespace detail {

inline double traceProductReal(const CMatrix& a, const CMatrix& b) { return (a * b).trace().real(); }

}  // namespace detail

/// Y = Omega^2 (Omega^2 + A^2)^{-1} A M with A the Heisenberg superoperator
/// at xi = 0, solved as (A - i Omega)(A + i Omega) y = Omega^2 A m.
inline Operator resolventResponse(const GklsGenerator& gen, const Operator& m, double omega, double rcondFloor = 1e-12) {
  const Index d = gen.dim();
  const CMatrix a = heisenbergSuper(gen).matrix();
  const CMatrix id = CMatrix::Identity(d * d, d * d);
  const cplx iw(0.0, omega);
  const CVector rhs = (omega * omega) * (a * vec(m));
  Eigen::PartialPivLU<CMatrix> lu1(a - iw * id);
  Eigen::PartialPivLU<CMatrix> lu2(a + iw * id);
  // rcond() misses exact zero pivots, so the pivot ratio is checked as well.
  auto pivotRatio = [](const Eigen::PartialPivLU<CMatrix>& lu) {
    const RVector p = lu.matrixLU().diagonal().cwiseAbs();
    return p.maxCoeff() > 0.0 ? p.minCoeff() / p.maxCoeff() : 0.0;
  };
  const double rc = std::min({lu1.rcond(), lu2.rcond(), pivotRatio(lu1), pivotRatio(lu2)});
  require(std::isfinite(rc) && rc >= rcondFloor, ErrorKind::ResolventSingular,
          "Omega^2 + (L*)^2 is numerically singular (rcond " + std::to_string(rc) + ")");
  const CVector y = lu2.solve(lu1.solve(rhs));
  return unvec(y, d);
}

/// P = -(g^2/2) Tr(rhoBar'[0] Y), the resolvent formula.
inline double averagePowerResolvent(const GeneratorFamily& family, const StationaryDerivative& sd) {
  const Operator y = resolventResponse(family.at(0.0), family.drive(), family.frequency());
  const double g = family.amplitude();
  return -0.5 * g * g * detail::traceProductReal(sd.derivative.matrix(), y.matrix());
}

inline double averagePowerResolvent(const GeneratorFamily& family, const DerivativeOptions& opt = {}) {
  return averagePowerResolvent(family, stationaryDerivative(family, opt));
}

/// P = -(g^2/2) Tr(rhoBar'[0] L*[0] M), the high-frequency formula.
inline double averagePowerFast(const GeneratorFamily& family, const StationaryDerivative& sd) {
  const Operator lm = family.at(0.0).applyHeisenberg(family.drive());
  const double g = family.amplitude();
  return -0.5 * g * g * detail::traceProductReal(sd.derivative.matrix(), lm.matrix());
}

inline double averagePowerFast(const GeneratorFamily& family, const DerivativeOptions& opt = {}) {
  return averagePowerFast(family, stationaryDerivative(family, opt));
}

/// (g^2/2) beta <M, L* M>_Gibbs for a generator in detailed balance with the
/// Gibbs state of its Hamiltonian at inverse temperature beta.
inline double equilibriumPowerBound(const GklsGenerator& gen, const Operator& m, double beta, double g,
                                    double balanceTolerance = 1e-8) {
  Operator::checkSameDim(gen.hamiltonian(), m);
  const DensityMatrix gibbs = gibbsState(gen.hamiltonian(), beta);
  DetailedBalanceReport rep;
  try {
    rep = detailedBalanceReport(gen, gibbs, balanceTolerance);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NotStationary || e.kind() == ErrorKind::SingularWeight)
      fail(ErrorKind::NotEquilibrium, std::string("Gibbs state rejected: ") + e.what());
    throw;
  }
  require(rep.passed(), ErrorKind::NotEquilibrium,
          "generator violates detailed balance (residuals " + std::to_string(rep.dissipativeHermiticity) + ", " +
              std::to_string(rep.hamiltonianAntiHermiticity) + ", " + std::to_string(rep.commutator) + ")");
  const double value =
      0.5 * g * g * beta * weightedInnerProduct(m, gen.applyHeisenberg(m), gibbs).real();
  require(value <= 1e-12, ErrorKind::NumericalDrift, "equilibrium power bound is positive: " + std::to_string(value));
  return value;
}

struct EquilibriumBound {
  double beta = 0.0;
  double value = 0.0;
};

struct PowerReport {
  double pBarResolvent = 0.0;
  double pBarFast = 0.0;
  double identityResidual = 0.0;
  double richardsonError = 0.0;
  std::optional<EquilibriumBound> singleBath;
};

/// Both power formulas from one stationary derivative; the single-bath bound
/// is attached when an equilibrium inverse temperature is supplied.
inline PowerReport powerReport(const GeneratorFamily& family, const DerivativeOptions& opt = {},
                               std::optional<double> equilibriumBeta = std::nullopt) {
  const StationaryDerivative sd = stationaryDerivative(family, opt);
  PowerReport r;
  r.pBarResolvent = averagePowerResolvent(family, sd);
  r.pBarFast = averagePowerFast(family, sd);
  r.identityResidual = sd.identityResidual;
  r.richardsonError = sd.richardsonError;
  if (equilibriumBeta)
    r.singleBath = EquilibriumBound{
        *equilibriumBeta,
        equilibriumPowerBound(family.at(0.0), family.drive(), *equilibriumBeta, family.amplitude())};
  return r;
}

}  // namespace qthermo
