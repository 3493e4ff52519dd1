#pragma once

// Generic multi-level working media: a diagonal level scheme coupled to
// thermal baths on chosen transitions, and a Davies-type family for an
// arbitrary Hermitian drive observable.

#include <string>
#include <vector>

#include "qthermo/gkls.hpp"

namespace qthermo {

struct LevelTransition {
  Index lower = 0;
  Index upper = 1;
  /// Downward (emission) rate; the upward rate follows from the Gibbs ratio.
  double rate = 1.0;
};

struct LevelBath {
  std::string label;
  double beta = 1.0;
  std::vector<LevelTransition> transitions;
};

/// H(xi) = diag(E) + xi diag(m); each bath acts on its transitions with
/// Bohr frequencies taken from H(xi).
struct LevelSpec {
  std::vector<double> energies;
  std::vector<double> drive;
  double g = 0.0;
  double Omega = 1.0;
  std::vector<LevelBath> baths;
};

inline void validate(const LevelSpec& s) {
  require(s.energies.size() >= 2 && s.energies.size() <= std::size_t(kMaxOperatorDim), ErrorKind::InvalidDimension,
          "level model needs between 2 and 64 levels");
  require(s.drive.empty() || s.drive.size() == s.energies.size(), ErrorKind::ShapeError,
          "drive diagonal must have one entry per level");
  require(s.Omega > 0.0, ErrorKind::InvalidArgument, "drive frequency must be positive");
  for (const auto& b : s.baths)
    for (const auto& t : b.transitions) {
      require(t.lower >= 0 && t.upper < Index(s.energies.size()) && t.lower != t.upper, ErrorKind::InvalidArgument,
              "bath '" + b.label + "' has a transition outside the level range");
      require(t.rate >= 0.0, ErrorKind::InvalidArgument, "transition rates must be nonnegative");
    }
}

inline Operator levelDrive(const LevelSpec& s) {
  return s.drive.empty() ? Operator::zero(Index(s.energies.size())) : Operator::diagonal(s.drive, "M");
}

inline GklsGenerator buildLevelGenerator(const LevelSpec& s, double xi = 0.0) {
  validate(s);
  const Index d = Index(s.energies.size());
  std::vector<double> e = s.energies;
  for (std::size_t i = 0; i < e.size() && !s.drive.empty(); ++i) e[i] += xi * s.drive[i];
  const Operator h = Operator::diagonal(e, "H");
  std::vector<LindbladTerm> terms;
  for (const auto& b : s.baths)
    for (const auto& t : b.transitions) {
      if (t.rate == 0.0) continue;
      const double w = e[std::size_t(t.upper)] - e[std::size_t(t.lower)];
      auto [down, up] = thermalPair(h, Operator::transition(d, t.lower, t.upper), t.rate, w, b.beta, b.label);
      terms.push_back(std::move(down));
      terms.push_back(std::move(up));
    }
  return GklsGenerator(h, std::move(terms));
}

inline GeneratorFamily buildLevelFamily(const LevelSpec& s) {
  validate(s);
  return GeneratorFamily([s](double xi) { return buildLevelGenerator(s, xi); }, levelDrive(s), s.g, s.Omega);
}

/// Davies generator of H(xi) = H0 + xi M for a single bath: jumps |u_i><u_j|
/// between the eigenvectors of H(xi) (ascending energies), downward rate
/// baseRates(i, j) for i < j and the Gibbs-ratio upward partner.
inline GklsGenerator daviesGenerator(const Operator& h0, const Operator& m, const Eigen::MatrixXd& baseRates,
                                     double beta, double xi, const std::string& bath = "bath") {
  Operator::checkSameDim(h0, m);
  const Index d = h0.dim();
  require(baseRates.rows() == d && baseRates.cols() == d, ErrorKind::ShapeError, "rate matrix must be D x D");
  const Operator h = h0 + xi * m;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h.matrix() + h.matrix().adjoint()));
  const RVector& e = es.eigenvalues();
  const CMatrix& u = es.eigenvectors();
  std::vector<LindbladTerm> terms;
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j) {
      const double r = baseRates(i, j);
      require(r >= 0.0, ErrorKind::InvalidArgument, "rates must be nonnegative");
      if (r == 0.0) continue;
      const Operator v(u.col(i) * u.col(j).adjoint());
      terms.emplace_back(v, r, bath);
      terms.emplace_back(v.adjoint(), r * std::exp(-beta * (e(j) - e(i))), bath);
    }
  return GklsGenerator(h, std::move(terms));
}

inline GeneratorFamily daviesFamily(const Operator& h0, const Operator& m, const Eigen::MatrixXd& baseRates,
                                    double beta, double g, double omega, const std::string& bath = "bath") {
  return GeneratorFamily([=](double xi) { return daviesGenerator(h0, m, baseRates, beta, xi, bath); }, m, g, omega);
}

}  // namespace qthermo
