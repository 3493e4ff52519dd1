#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace qthermo;

namespace {

GklsGenerator amplitudeDamping(double gamma) {
  return GklsGenerator(Operator::diagonal({0.0, 1.0}), {LindbladTerm(fockAnnihilation(2), gamma, "bath")});
}

GklsGenerator thermalTwoLevel(double omega, double beta, double gammaDown) {
  const Operator h = Operator::diagonal({0.0, omega});
  auto [down, up] = thermalPair(h, fockAnnihilation(2), gammaDown, omega, beta, "bath");
  return GklsGenerator(h, {down, up});
}

/// Three levels, bath "cold" on 0-1 and 1-2, bath "hot" on 0-2.
GklsGenerator maser(double betaCold, double betaHot) {
  const Operator h = Operator::diagonal({0.0, 1.0, 2.5});
  std::vector<LindbladTerm> terms;
  auto add = [&](Index lo, Index hi, double beta, const std::string& bath) {
    const double w = h.matrix()(hi, hi).real() - h.matrix()(lo, lo).real();
    auto [d, u] = thermalPair(h, Operator::transition(3, lo, hi), 1.0, w, beta, bath);
    terms.push_back(d);
    terms.push_back(u);
  };
  add(0, 1, betaCold, "cold");
  add(1, 2, betaCold, "cold");
  add(0, 2, betaHot, "hot");
  return GklsGenerator(h, std::move(terms));
}

template <typename F>
ErrorKind kindOf(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;  // sentinel for "no throw"; callers compare against the expected kind
}

}  // namespace

TEST(Schrodinger, ZeroGenerator) {
  const GklsGenerator g(Operator::zero(3));
  EXPECT_EQ(schrodingerSuper(g).matrix(), CMatrix::Zero(9, 9));
}

TEST(Schrodinger, AmplitudeDampingHandValue) {
  const SuperOperator s = schrodingerSuper(amplitudeDamping(1.0));
  const CMatrix out = s.apply(DensityMatrix::diagonal({0.0, 1.0}).op()).matrix();
  EXPECT_LT(maxAbs(out - Operator::diagonal({1.0, -1.0}).matrix()), 1e-15);
}

TEST(Schrodinger, MatchesOperatorFormAndPreservesTrace) {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 20; ++k) {
    const Index d = 2 + k % 4;
    const GklsGenerator g = qtest::randomGenerator(rng, d);
    const DensityMatrix rho = qtest::randomState(rng, d);
    const Operator lr = schrodingerSuper(g).apply(rho.op());
    EXPECT_LT(std::abs(lr.trace()), 1e-12);
    EXPECT_LT(maxAbs(lr.matrix() - g.apply(rho.op()).matrix()), 1e-12);
  }
}

TEST(Heisenberg, UnitalAndDual) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const Index d = 2 + k % 4;
    const GklsGenerator g = qtest::randomGenerator(rng, d);
    const SuperOperator h = heisenbergSuper(g);
    EXPECT_LT(maxAbs(h.apply(Operator::identity(d)).matrix()), 1e-12);
    const Operator rho(qtest::randomMatrix(rng, d)), x(qtest::randomMatrix(rng, d));
    const cplx lhs = (schrodingerSuper(g).apply(rho).matrix().adjoint() * x.matrix()).trace();
    const cplx rhs = (rho.matrix().adjoint() * h.apply(x).matrix()).trace();
    EXPECT_LT(std::abs(lhs - rhs), 1e-12 * std::max(1.0, std::abs(lhs)));
    EXPECT_LT(maxAbs(h.matrix() - schrodingerSuper(g).matrix().adjoint()), 1e-12);
    EXPECT_LT(maxAbs(h.apply(x).matrix() - g.applyHeisenberg(x).matrix()), 1e-12);
  }
}

TEST(Heisenberg, AmplitudeDampingExcitedProjector) {
  const double gamma = 0.7;
  const Operator pe = Operator::diagonal({0.0, 1.0});
  const Operator out = heisenbergSuper(amplitudeDamping(gamma)).apply(pe);
  EXPECT_LT(maxAbs(out.matrix() + gamma * pe.matrix()), 1e-15);
}

TEST(ThermalPair, Rates) {
  const Operator h = Operator::diagonal({0.0, 2.0});
  auto [d0, u0] = thermalPair(h, fockAnnihilation(2), 0.8, 2.0, 0.0, "b");
  EXPECT_EQ(d0.rate, u0.rate);
  auto [d1, u1] = thermalPair(h, fockAnnihilation(2), 0.8, 2.0, std::log(2.0) / 2.0, "b");
  EXPECT_NEAR(u1.rate, 0.4, 1e-15);
  EXPECT_EQ(u1.jump.matrix(), fockAnnihilation(2).adjoint().matrix());
  EXPECT_EQ(kindOf([&] { thermalPair(h, fockAnnihilation(2).adjoint(), 1.0, 2.0, 1.0, "b"); }),
            ErrorKind::NotAnEigenoperator);
}

TEST(Stationary, ThermalTwoLevel) {
  const DensityMatrix r = stationaryState(thermalTwoLevel(1.0, std::log(2.0), 1.0));
  EXPECT_LT(maxAbs(r.matrix() - Operator::diagonal({2.0 / 3.0, 1.0 / 3.0}).matrix()), 1e-12);
}

TEST(Stationary, PumpedDampedOscillator) {
  const Index d = 40;
  const Operator a = fockAnnihilation(d);
  const GklsGenerator g(numberOperator(d), {LindbladTerm(a, 1.0, "b"), LindbladTerm(a.adjoint(), 0.25, "b")});
  const DensityMatrix r = stationaryState(g);
  EXPECT_NEAR((r.matrix() * numberOperator(d).matrix()).trace().real(), 1.0 / 3.0, 1e-10);
  for (Index n = 0; n < 10; ++n) EXPECT_NEAR(r.matrix()(n, n).real(), 0.75 * std::pow(0.25, double(n)), 1e-12);
  EXPECT_LT(g.apply(r.op()).frobeniusNorm(), 1e-10);
}

TEST(Stationary, DegenerateHamiltonianIsNotUnique) {
  const GklsGenerator g(Operator::diagonal({0.0, 1.0, 1.0}));
  EXPECT_EQ(kindOf([&] { stationaryState(g); }), ErrorKind::NonUniqueStationary);
}

TEST(Stationary, ResidualOnRandomGenerators) {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 10; ++k) {
    const GklsGenerator g = qtest::randomGenerator(rng, 2 + k % 5);
    const DensityMatrix r = stationaryState(g);
    EXPECT_LT(g.apply(r.op()).frobeniusNorm(), 1e-10);
  }
}

TEST(Stationary, GibbsStateOfSingleBath) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 10; ++k) {
    const double beta = 0.3 + 0.2 * k;
    const GklsGenerator g = qtest::randomThermalGenerator(rng, 2 + k % 5, beta);
    const DensityMatrix gibbs = gibbsState(g.hamiltonian(), beta);
    EXPECT_LT(g.apply(gibbs.op()).frobeniusNorm(), 1e-10);
    EXPECT_LT(traceDistance(stationaryState(g), gibbs), 1e-10);
  }
}

TEST(Evolve, UnitaryKeepsPurity) {
  std::mt19937_64 rng(8);
  const GklsGenerator g(qtest::randomHermitian(rng, 4));
  CVector psi = qtest::randomMatrix(rng, 4).col(0);
  const Trajectory tr = evolve(g, DensityMatrix::pure(psi), linspace(0.0, 5.0, 101));
  for (const auto& s : tr.states) {
    EXPECT_NEAR(s.purity(), 1.0, 1e-9);
    EXPECT_NEAR(s.op().trace().real(), 1.0, 1e-10);
  }
}

TEST(Evolve, AmplitudeDampingDecay) {
  const Trajectory tr = evolve(amplitudeDamping(1.0), DensityMatrix::basisState(2, 1), linspace(0.0, 1.0, 11));
  EXPECT_NEAR(tr.states.back().matrix()(1, 1).real(), std::exp(-1.0), 1e-8);
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    EXPECT_NEAR(tr.states[i].matrix()(1, 1).real(), std::exp(-tr.times[i]), 1e-12);
}

TEST(Evolve, SparsePathMatchesDensePath) {
  // dim 20 -> 400 x 400 superoperator, above the dense exponential limit.
  const Index d = 20;
  const Operator a = fockAnnihilation(d);
  const GklsGenerator g(numberOperator(d), {LindbladTerm(a, 0.6, "b"), LindbladTerm(a.adjoint(), 0.2, "b")});
  const DensityMatrix rho0 = DensityMatrix::pure(coherentVector(d, cplx(1.2, -0.4)));
  const Trajectory tr = evolve(g, rho0, linspace(0.0, 2.0, 5));
  const CMatrix dense = (schrodingerSuper(g).matrix() * 2.0).exp();
  const CMatrix ref = unvecMatrix(dense * vec(rho0.op()), d);
  EXPECT_LT(maxAbs(tr.states.back().matrix() - ref), 1e-12);
}

TEST(Evolve, RejectsBadGrid) {
  EXPECT_EQ(kindOf([&] { evolve(amplitudeDamping(1.0), DensityMatrix::basisState(2, 1), {0.0, 0.5, 0.5}); }),
            ErrorKind::InvalidArgument);
}

TEST(EvolveDriven, ZeroAmplitudeMatchesStatic) {
  const GklsGenerator g = thermalTwoLevel(1.0, 0.8, 1.0);
  const GeneratorFamily fam([g](double xi) { return GklsGenerator(g.hamiltonian() + xi * Operator::diagonal({0.0, 1.0}), g.terms()); },
                            Operator::diagonal({0.0, 1.0}), 0.0, 2.0);
  const auto grid = linspace(0.0, 1.0, 101);
  const DensityMatrix rho0 = DensityMatrix::diagonal({0.1, 0.9});
  const Trajectory a = evolve(g, rho0, grid), b = evolveDriven(fam, rho0, grid);
  ASSERT_EQ(b.xiSamples.size(), grid.size() - 1);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_LT(maxAbs(a.states[i].matrix() - b.states[i].matrix()), 1e-12);
}

TEST(EvolveDriven, TraceAndStepGuard) {
  const GklsGenerator g = thermalTwoLevel(1.0, 0.8, 1.0);
  const Operator m = Operator::diagonal({0.0, 1.0});
  const GeneratorFamily fam([g, m](double xi) { return GklsGenerator(g.hamiltonian() + xi * m, g.terms()); }, m, 0.3, 2.0);
  const Trajectory tr = evolveDriven(fam, DensityMatrix::diagonal({0.5, 0.5}), linspace(0.0, M_PI, 201));
  double avg = 0.0;
  for (const auto& s : tr.states) avg += s.op().trace().real();
  EXPECT_NEAR(avg / double(tr.states.size()), 1.0, 1e-10);
  EXPECT_EQ(kindOf([&] { evolveDriven(fam, DensityMatrix::diagonal({0.5, 0.5}), linspace(0.0, 1.0, 11)); }),
            ErrorKind::StepTooLarge);
}

TEST(Family, ChecksLinearHamiltonianAndWarnsOnCommutator) {
  const Operator h0 = Operator::diagonal({0.0, 1.0});
  const Operator sx(CMatrix(fockAnnihilation(2).matrix() + fockAnnihilation(2).adjoint().matrix()));
  const GeneratorFamily fam([&](double xi) { return GklsGenerator(h0 + xi * sx); }, sx, 0.1, 1.0);
  EXPECT_FALSE(fam.warnings().empty());
  EXPECT_EQ(kindOf([&] {
              GeneratorFamily([&](double xi) { return GklsGenerator(h0 + (xi * xi) * sx); }, sx, 0.1, 1.0);
            }),
            ErrorKind::InvalidArgument);
}

TEST(InnerProduct, Examples) {
  const DensityMatrix rb = DensityMatrix::diagonal({2.0 / 3.0, 1.0 / 3.0});
  EXPECT_NEAR(weightedInnerProduct(Operator::identity(2), Operator::identity(2), rb).real(), 1.0, 1e-15);
  const Operator x = Operator::transition(2, 1, 0);  // |e><g|
  EXPECT_NEAR(weightedInnerProduct(x, x, rb).real(), 2.0 / 3.0, 1e-15);
  std::mt19937_64 rng(12);
  const DensityMatrix r3 = qtest::randomState(rng, 3);
  for (int k = 0; k < 10; ++k) {
    const Operator y(qtest::randomMatrix(rng, 3));
    const cplx v = weightedInnerProduct(y, y, r3);
    EXPECT_GT(v.real(), 0.0);
    EXPECT_LT(std::abs(v.imag()), 1e-12);
  }
  EXPECT_EQ(kindOf([&] { weightedInnerProduct(x, x, DensityMatrix::basisState(2, 0)); }), ErrorKind::SingularWeight);
}

TEST(DetailedBalance, ThermalPasses) {
  const GklsGenerator g = thermalTwoLevel(1.0, std::log(2.0), 1.0);
  const DetailedBalanceReport r = detailedBalanceReport(g, stationaryState(g));
  EXPECT_TRUE(r.passed());
  EXPECT_LT(r.dissipativeHermiticity, 1e-10);
  EXPECT_LT(r.hamiltonianAntiHermiticity, 1e-10);
  EXPECT_LT(r.commutator, 1e-10);
}

TEST(DetailedBalance, TwoTemperatureMaserFails) {
  const GklsGenerator g = maser(2.0, 0.1);
  const DetailedBalanceReport r = detailedBalanceReport(g, stationaryState(g));
  EXPECT_GT(r.dissipativeHermiticity, 1e-3);
  EXPECT_FALSE(r.passed());
}

TEST(DetailedBalance, EqualTemperatureMaserPasses) {
  const GklsGenerator g = maser(0.7, 0.7);
  EXPECT_TRUE(detailedBalanceReport(g, stationaryState(g)).passed());
}

TEST(DetailedBalance, ZeroDissipator) {
  const GklsGenerator g(Operator::diagonal({0.0, 1.0}));
  const DetailedBalanceReport r = detailedBalanceReport(g, DensityMatrix::diagonal({0.3, 0.7}));
  EXPECT_EQ(r.dissipativeHermiticity, 0.0);
  EXPECT_EQ(r.commutator, 0.0);
}

TEST(DetailedBalance, RequiresStationaryWeight) {
  const GklsGenerator g = thermalTwoLevel(1.0, 1.0, 1.0);
  EXPECT_EQ(kindOf([&] { detailedBalanceReport(g, DensityMatrix::diagonal({0.5, 0.5})); }), ErrorKind::NotStationary);
}

TEST(DetailedBalance, PassingImpliesRealNonpositiveDissipativeSpectrum) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 10; ++k) {
    const double beta = 0.5 + 0.1 * k;
    const GklsGenerator g = qtest::randomThermalGenerator(rng, 2 + k % 4, beta);
    const DensityMatrix gibbs = gibbsState(g.hamiltonian(), beta);
    ASSERT_TRUE(detailedBalanceReport(g, gibbs).passed());
    Eigen::ComplexEigenSolver<CMatrix> es(heisenbergSuper(g.dissipativePart()).matrix(), false);
    for (Index i = 0; i < es.eigenvalues().size(); ++i) {
      EXPECT_LT(std::abs(es.eigenvalues()(i).imag()), 1e-8);
      EXPECT_LT(es.eigenvalues()(i).real(), 1e-8);
    }
  }
}

TEST(CompletePositivity, ChoiMatrixSmoke) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 10; ++k) {
    const Index d = 2 + k % 3;
    const GklsGenerator g = qtest::randomGenerator(rng, d);
    for (double t : {0.1, 1.0}) {
      const CMatrix phi = (schrodingerSuper(g).matrix() * t).exp();
      CMatrix choi = CMatrix::Zero(d * d, d * d);
      for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) {
          const CMatrix img = unvecMatrix(phi * vec(Operator::transition(d, i, j).matrix()), d);
          choi.block(i * d, j * d, d, d) = img;
        }
      EXPECT_GE(detail::hermitianEigenvalues(choi)(0), -1e-9);
    }
  }
}

TEST(Restriction, InvariantSubspace) {
  // Two independent two-level blocks; restricting to one recovers its Gibbs state.
  const Operator h = Operator::diagonal({0.0, 1.0, 5.0, 6.0});
  auto [d1, u1] = thermalPair(h, Operator::transition(4, 0, 1), 1.0, 1.0, 1.0, "b");
  auto [d2, u2] = thermalPair(h, Operator::transition(4, 2, 3), 1.0, 1.0, 1.0, "b");
  const GklsGenerator g(h, {d1, u1, d2, u2});
  EXPECT_EQ(kindOf([&] { stationaryState(g); }), ErrorKind::NonUniqueStationary);
  CMatrix w = CMatrix::Zero(4, 2);
  w(0, 0) = 1.0;
  w(1, 1) = 1.0;
  const DensityMatrix r = stationaryState(restrictToSubspace(g, w));
  EXPECT_NEAR(r.matrix()(1, 1).real(), 1.0 / (1.0 + std::exp(1.0)), 1e-12);
  CMatrix bad = CMatrix::Zero(4, 2);
  bad(0, 0) = 1.0;
  bad(2, 1) = 1.0;
  EXPECT_EQ(kindOf([&] { restrictToSubspace(g, bad); }), ErrorKind::InvalidArgument);
}

TEST(LindbladTerm, RejectsNegativeRate) {
  EXPECT_EQ(kindOf([&] { LindbladTerm(fockAnnihilation(2), -1.0); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kindOf([&] { GklsGenerator(Operator::diagonal({0.0, 1.0}), {LindbladTerm(fockAnnihilation(3), 1.0)}); }),
            ErrorKind::ShapeError);
  CMatrix nh(2, 2);
  nh << 0, 1, 0, 0;
  EXPECT_EQ(kindOf([&] { GklsGenerator(Operator(nh)); }), ErrorKind::NotHermitian);
}
