#pragma once

#include <random>
#include <vector>

#include "qthermo/qthermo.hpp"

namespace qtest {

using namespace qthermo;

inline CMatrix randomMatrix(std::mt19937_64& rng, Index d) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) m(i, j) = cplx(n(rng), n(rng));
  return m;
}

inline Operator randomHermitian(std::mt19937_64& rng, Index d) {
  const CMatrix m = randomMatrix(rng, d);
  return Operator(0.5 * (m + m.adjoint()));
}

/// Full-rank mixed state.
inline DensityMatrix randomState(std::mt19937_64& rng, Index d) {
  const CMatrix m = randomMatrix(rng, d);
  CMatrix r = m * m.adjoint() + 0.05 * CMatrix::Identity(d, d);
  r /= r.trace().real();
  return DensityMatrix(Operator(r));
}

inline GklsGenerator randomGenerator(std::mt19937_64& rng, Index d, int nTerms = 3) {
  std::uniform_real_distribution<double> u(0.1, 1.5);
  std::vector<LindbladTerm> terms;
  for (int j = 0; j < nTerms; ++j) terms.emplace_back(Operator(randomMatrix(rng, d)), u(rng), "b" + std::to_string(j % 2));
  return GklsGenerator(randomHermitian(rng, d), std::move(terms));
}

/// Thermal generator with a random nondegenerate spectrum: Davies jumps
/// |i><j| between every pair of levels with Gibbs-ratio rates.
inline GklsGenerator randomThermalGenerator(std::mt19937_64& rng, Index d, double beta, const std::string& bath = "bath") {
  std::uniform_real_distribution<double> e(0.0, 2.0), r(0.2, 1.2);
  std::vector<double> levels(static_cast<std::size_t>(d));
  for (auto& x : levels) x = e(rng);
  std::sort(levels.begin(), levels.end());
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i] - levels[i - 1] < 0.05) levels[i] = levels[i - 1] + 0.05;
  const Operator h0 = Operator::diagonal(levels);
  std::vector<LindbladTerm> terms;
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j) {
      const double w = levels[std::size_t(j)] - levels[std::size_t(i)];
      auto [down, up] = thermalPair(h0, Operator::transition(d, i, j), r(rng), w, beta, bath);
      terms.push_back(down);
      terms.push_back(up);
    }
  return GklsGenerator(h0, std::move(terms));
}

inline double maxDiff(const CMatrix& a, const CMatrix& b) { return maxAbs(a - b); }

}  // namespace qtest
