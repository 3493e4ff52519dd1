#pragma once

// Energy, power, heat currents, entropies, entropy production, law residuals
// along driven trajectories, passive states and ergotropy.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "qthermo/gkls.hpp"

namespace qthermo {

/// Eigenvalues below this floor make a matrix logarithm undefined.
inline constexpr double kLogFloor = 1e-14;

struct BathAssignment {
  std::string label;
  double beta = 0.0;
  std::vector<std::size_t> terms;
};

/// Groups generator terms by their bath label; every label must have an
/// inverse temperature.
inline std::vector<BathAssignment> assignBaths(const GklsGenerator& gen, const std::map<std::string, double>& betas) {
  std::vector<BathAssignment> out;
  for (const auto& label : gen.bathLabels()) {
    auto it = betas.find(label);
    require(it != betas.end(), ErrorKind::IncompleteAssignment, "no inverse temperature for bath '" + label + "'");
    BathAssignment b{label, it->second, {}};
    for (std::size_t j = 0; j < gen.terms().size(); ++j)
      if (gen.terms()[j].bath == label) b.terms.push_back(j);
    out.push_back(std::move(b));
  }
  return out;
}

struct HeatCurrents {
  std::vector<double> perBath;
  double total = 0.0;
};

struct ThermoSample {
  double t = 0.0;
  double U = 0.0;
  double P = 0.0;
  std::vector<double> J;
  double Jtotal = 0.0;
  double S = 0.0;
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double firstLawResidual = 0.0;
  double secondLawResidual = 0.0;
};

namespace detail {

inline double realTrace(const CMatrix& m, const char* what) {
  const cplx tr = m.trace();
  require(std::abs(tr.imag()) <= 1e-12 * std::max(1.0, std::abs(tr.real())), ErrorKind::NotHermitian,
          std::string(what) + " has a non-real expectation value");
  return tr.real();
}

inline void checkCoverage(const GklsGenerator& gen, const std::vector<BathAssignment>& baths) {
  std::vector<int> seen(gen.terms().size(), 0);
  for (const auto& b : baths)
    for (std::size_t j : b.terms) {
      require(j < seen.size(), ErrorKind::IncompleteAssignment, "bath '" + b.label + "' refers to a missing term");
      ++seen[j];
    }
  for (std::size_t j = 0; j < seen.size(); ++j)
    require(seen[j] == 1, ErrorKind::IncompleteAssignment,
            "term " + std::to_string(j) + " belongs to " + std::to_string(seen[j]) + " baths");
}

inline CMatrix logPositive(const CMatrix& rho, const char* what) {
  const RVector ev = hermitianEigenvalues(rho);
  require(ev(0) > kLogFloor, ErrorKind::SingularLogarithm,
          std::string(what) + " has eigenvalue " + std::to_string(ev(0)) + " below the logarithm floor");
  return hermitianFunction(rho, [](double e) { return std::log(e); });
}

/// Derivative of samples f on a (possibly nonuniform) grid: three-point
/// central formula inside, second-order one-sided formulas at the ends.
inline std::vector<double> gridDerivative(const std::vector<double>& t, const std::vector<double>& f) {
  const std::size_t n = t.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  if (n == 2) {
    d[0] = d[1] = (f[1] - f[0]) / (t[1] - t[0]);
    return d;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h1 = t[i] - t[i - 1], h2 = t[i + 1] - t[i];
    d[i] = (-h2 / (h1 * (h1 + h2))) * f[i - 1] + ((h2 - h1) / (h1 * h2)) * f[i] + (h1 / (h2 * (h1 + h2))) * f[i + 1];
  }
  {
    const double h1 = t[1] - t[0], h2 = t[2] - t[1];
    d[0] = -(2 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] - h1 / (h2 * (h1 + h2)) * f[2];
  }
  {
    const std::size_t k = n - 1;
    const double h1 = t[k - 1] - t[k - 2], h2 = t[k] - t[k - 1];
    d[k] = h2 / (h1 * (h1 + h2)) * f[k - 2] - (h1 + h2) / (h1 * h2) * f[k - 1] + (h1 + 2 * h2) / (h2 * (h1 + h2)) * f[k];
  }
  return d;
}

}  // namespace detail

/// Tr(rho X) for Hermitian X.
inline double expectation(const DensityMatrix& rho, const Operator& x) {
  Operator::checkSameDim(rho.op(), x);
  return detail::realTrace(rho.matrix() * x.matrix(), "Tr(rho X)");
}

inline double internalEnergy(const DensityMatrix& rho, const Operator& h) { return expectation(rho, h); }

/// P = -Tr(rho dH/dt).
inline double instantaneousPower(const DensityMatrix& rho, const Operator& dHdt) {
  Operator::checkSameDim(rho.op(), dHdt);
  return -detail::realTrace(rho.matrix() * dHdt.matrix(), "Tr(rho dH/dt)");
}

/// J_k = Tr(H L_k rho) for every bath, plus their sum.
inline HeatCurrents heatCurrents(const GklsGenerator& gen, const std::vector<BathAssignment>& baths,
                                 const DensityMatrix& rho, const Operator& h) {
  Operator::checkSameDim(gen.hamiltonian(), rho.op());
  Operator::checkSameDim(gen.hamiltonian(), h);
  detail::checkCoverage(gen, baths);
  HeatCurrents out;
  for (const auto& b : baths) {
    std::vector<LindbladTerm> sel;
    for (std::size_t j : b.terms) sel.push_back(gen.terms()[j]);
    const GklsGenerator part(Operator::zero(gen.dim()), std::move(sel));
    const double jk = detail::realTrace(h.matrix() * part.applyDissipator(rho.op()).matrix(), "heat current");
    out.perBath.push_back(jk);
    out.total += jk;
  }
  return out;
}

inline double vonNeumannEntropy(const DensityMatrix& rho) {
  double s = 0.0;
  for (Index i = 0; i < rho.spectrum().size(); ++i) {
    const double p = rho.spectrum()(i);
    if (p > 0.0) s -= p * std::log(p);
  }
  return std::max(s, 0.0);
}

/// S(rho1 | rho2) = Tr(rho1 ln rho1 - rho1 ln rho2).
inline double relativeEntropy(const DensityMatrix& rho1, const DensityMatrix& rho2, double supportTol = 1e-12) {
  Operator::checkSameDim(rho1.op(), rho2.op());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho2.matrix());
  const RVector& q = es.eigenvalues();
  const CMatrix& u = es.eigenvectors();
  const CMatrix r1 = u.adjoint() * rho1.matrix() * u;
  double cross = 0.0;
  for (Index i = 0; i < q.size(); ++i) {
    const double w = r1(i, i).real();
    if (q(i) <= kLogFloor) {
      require(w <= supportTol, ErrorKind::SupportError, "support of the first state is not contained in the second");
      continue;
    }
    cross += w * std::log(q(i));
  }
  return std::max(-vonNeumannEntropy(rho1) - cross, 0.0);
}

/// sigma = -Tr[L rho (ln rho - ln rhoBar)] for a stationary rhoBar.
inline double entropyProduction(const GklsGenerator& gen, const DensityMatrix& rho, const DensityMatrix& rhoBar,
                                const GklsTolerances& tol = {}) {
  Operator::checkSameDim(gen.hamiltonian(), rho.op());
  Operator::checkSameDim(gen.hamiltonian(), rhoBar.op());
  const double stat = gen.apply(rhoBar.op()).frobeniusNorm();
  require(stat < tol.stationarity, ErrorKind::NotStationary,
          "reference state is not stationary, ||L rhoBar|| = " + std::to_string(stat));
  require(rho.minEigenvalue() > 1e-12 && rhoBar.minEigenvalue() > 1e-12, ErrorKind::SingularLogarithm,
          "entropy production needs strictly positive states");
  const CMatrix diff = detail::logPositive(rho.matrix(), "rho") - detail::logPositive(rhoBar.matrix(), "rhoBar");
  const double sigma = -(gen.apply(rho.op()).matrix() * diff).trace().real();
  require(sigma >= -1e-10, ErrorKind::NumericalDrift, "negative entropy production " + std::to_string(sigma));
  return sigma;
}

struct LawOptions {
  /// Spohn sigma of the frozen generator at every sample (one stationary
  /// solve per sample); left NaN when disabled or when a state is singular.
  bool computeSigma = true;
  /// Step-halving disagreement of dU/dt above this (relative to max(1,|dU/dt|))
  /// is reported as GridTooCoarse.
  double gridTolerance = 1e-3;
};

/// Thermodynamic record of a driven trajectory with First and Second Law
/// residuals dU/dt - J + P and dS/dt - sum_k beta_k J_k.
inline std::vector<ThermoSample> lawResiduals(const Trajectory& traj, const GeneratorFamily& family,
                                              const std::map<std::string, double>& betas,
                                              const LawOptions& opt = {}) {
  const std::size_t n = traj.times.size();
  require(n >= 3 && traj.states.size() == n, ErrorKind::InvalidArgument, "trajectory needs at least three samples");
  require(traj.xiSamples.size() + 1 == n || family.amplitude() == 0.0, ErrorKind::InvalidArgument,
          "trajectory carries no drive samples; use evolveDriven");

  std::vector<ThermoSample> out(n);
  std::vector<double> u(n), s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = traj.times[i];
    const GklsGenerator gen = family.at(family.xi(t));
    const DensityMatrix& rho = traj.states[i];
    const auto baths = assignBaths(gen, betas);
    const HeatCurrents hc = heatCurrents(gen, baths, rho, gen.hamiltonian());
    ThermoSample& smp = out[i];
    smp.t = t;
    smp.U = internalEnergy(rho, gen.hamiltonian());
    smp.P = instantaneousPower(rho, family.xiRate(t) * family.drive());
    smp.J = hc.perBath;
    smp.Jtotal = hc.total;
    smp.S = vonNeumannEntropy(rho);
    double bj = 0.0;
    for (std::size_t k = 0; k < baths.size(); ++k) bj += baths[k].beta * hc.perBath[k];
    smp.secondLawResidual = -bj;
    if (opt.computeSigma && rho.minEigenvalue() > 1e-12) {
      try {
        const DensityMatrix bar = stationaryState(gen);
        if (bar.minEigenvalue() > 1e-12) smp.sigma = entropyProduction(gen, rho, bar);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonUniqueStationary && e.kind() != ErrorKind::SingularLogarithm) throw;
      }
    }
    u[i] = smp.U;
    s[i] = smp.S;
  }

  const std::vector<double> du = detail::gridDerivative(traj.times, u);
  const std::vector<double> ds = detail::gridDerivative(traj.times, s);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].firstLawResidual = du[i] - out[i].Jtotal + out[i].P;
    out[i].secondLawResidual += ds[i];
  }

  // Step-halving check on dU/dt: the stencil on every other sample has four
  // times the truncation error of the fine stencil.
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double h1 = traj.times[i] - traj.times[i - 2], h2 = traj.times[i + 2] - traj.times[i];
    const double coarse = (-h2 / (h1 * (h1 + h2))) * u[i - 2] + ((h2 - h1) / (h1 * h2)) * u[i] +
                          (h1 / (h2 * (h1 + h2))) * u[i + 2];
    const double est = std::abs(coarse - du[i]) / 3.0;
    require(est <= opt.gridTolerance * std::max(1.0, std::abs(du[i])), ErrorKind::GridTooCoarse,
            "dU/dt discretization error " + std::to_string(est) + " at t = " + std::to_string(traj.times[i]));
  }
  return out;
}

/// Passive state: eigenvalues of rho in decreasing order placed on the
/// eigenvectors of H in increasing energy. Degenerate levels are filled in
/// the order returned by the eigensolver.
inline DensityMatrix passiveState(const DensityMatrix& rho, const Operator& h) {
  Operator::checkSameDim(rho.op(), h);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h.matrix() + h.matrix().adjoint()));
  RVector p = rho.spectrum();
  std::sort(p.data(), p.data() + p.size(), std::greater<>());
  const CMatrix& v = es.eigenvectors();
  CMatrix out = v * p.cast<cplx>().asDiagonal() * v.adjoint();
  return DensityMatrix(Operator(std::move(out)));
}

/// W_e = Tr(rho H) - Tr(rho^P H), from the two spectra only.
inline double ergotropy(const DensityMatrix& rho, const Operator& h) {
  Operator::checkSameDim(rho.op(), h);
  const RVector e = detail::hermitianEigenvalues(h.matrix());
  RVector p = rho.spectrum();
  std::sort(p.data(), p.data() + p.size(), std::greater<>());
  const double passive = p.dot(e);
  const double w = internalEnergy(rho, h) - passive;
  return w < 0.0 && w > -1e-12 * std::max(1.0, std::abs(passive)) ? 0.0 : w;
}

}  // namespace qthermo
