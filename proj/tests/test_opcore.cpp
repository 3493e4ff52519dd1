#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace qthermo;

TEST(Fock, SmallestSpace) {
  const Operator a = fockAnnihilation(2);
  CMatrix expect(2, 2);
  expect << 0, 1, 0, 0;
  EXPECT_EQ(a.matrix(), expect);
}

TEST(Fock, NumberOperatorSpectrum) {
  // sqrt(n)^2 rounds to n within a few ulps; the off-diagonal part is exactly zero.
  for (Index d : {2, 5, 17, 64}) {
    const Operator a = fockAnnihilation(d);
    const CMatrix n = a.adjoint().matrix() * a.matrix();
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) {
        if (i == j)
          EXPECT_DOUBLE_EQ(n(i, j).real(), double(i));
        else
          EXPECT_EQ(n(i, j), cplx(0.0));
      }
    const RVector ev = detail::hermitianEigenvalues(n);
    for (Index i = 0; i < d; ++i) EXPECT_EQ(std::round(ev(i)), double(i));
  }
}

TEST(Fock, CommutatorTruncationArtifact) {
  const Index d = 7;
  const Operator a = fockAnnihilation(d);
  const CMatrix c = commutator(a, a.adjoint()).matrix();
  for (Index i = 0; i + 1 < d; ++i) EXPECT_NEAR(c(i, i).real(), 1.0, 1e-14);
  EXPECT_NEAR(c(d - 1, d - 1).real(), -double(d - 1), 1e-13);
  EXPECT_LT(maxAbs(c - CMatrix(c.diagonal().asDiagonal())), 1e-14);
}

TEST(Fock, RejectsTinySpace) {
  try {
    fockAnnihilation(1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidDimension);
  }
}

TEST(Fermions, SingleMode) {
  const auto c = fermionModes(1);
  ASSERT_EQ(c.size(), 1u);
  CMatrix expect(2, 2);
  expect << 0, 1, 0, 0;
  EXPECT_EQ(c[0].matrix(), expect);
}

TEST(Fermions, CanonicalAnticommutationUpToTen) {
  for (int n = 1; n <= 10; ++n) {
    const auto c = fermionModes(n);
    const Index d = Index(1) << n;
    using Sp = Eigen::SparseMatrix<cplx>;
    std::vector<Sp> s;
    for (const auto& op : c) s.push_back(op.matrix().sparseView());
    Sp id(d, d);
    id.setIdentity();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const Sp si = s[std::size_t(i)];
      EXPECT_EQ(Sp(si * si).nonZeros(), 0) << "c_" << i << "^2 != 0 at n=" << n;
      for (int j = 0; j < n; ++j) {
        const Sp sjd = Sp(s[std::size_t(j)].adjoint());
        Sp ac = si * sjd + sjd * si;
        if (i == j) ac -= id;
        for (int k = 0; k < ac.outerSize(); ++k)
          for (Sp::InnerIterator it(ac, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
        Sp aa = si * s[std::size_t(j)] + s[std::size_t(j)] * si;
        for (int k = 0; k < aa.outerSize(); ++k)
          for (Sp::InnerIterator it(aa, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
      }
    }
    EXPECT_LT(worst, 1e-14) << "n=" << n;
  }
}

TEST(Fermions, TwelveModesOneAtATime) {
  // Dense 4096 x 4096 operators are built one pair at a time to bound memory.
  const int n = 12;
  using Sp = Eigen::SparseMatrix<cplx>;
  const Index d = Index(1) << n;
  Sp id(d, d);
  id.setIdentity();
  std::vector<Sp> s;
  for (int i = 0; i < n; ++i) s.push_back(fermionMode(n, i).matrix().sparseView());
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Sp sjd = Sp(s[std::size_t(j)].adjoint());
      Sp ac = s[std::size_t(i)] * sjd + sjd * s[std::size_t(i)];
      if (i == j) ac -= id;
      for (int k = 0; k < ac.outerSize(); ++k)
        for (Sp::InnerIterator it(ac, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
    }
  EXPECT_LT(worst, 1e-14);
}

TEST(Fermions, ModeCountOutOfRange) {
  for (int n : {0, 13}) {
    try {
      fermionModes(n);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidDimension);
    }
  }
}

TEST(Vectorization, LeftAndRightMultiplication) {
  std::mt19937_64 rng(11);
  double worstL = 0.0, worstR = 0.0;
  for (int k = 0; k < 10; ++k) {
    const CMatrix a = qtest::randomMatrix(rng, 3), x = qtest::randomMatrix(rng, 3);
    worstL = std::max(worstL, maxAbs(unvecMatrix(leftMul(Operator(a)).matrix() * vec(x), 3) - a * x));
    worstR = std::max(worstR, maxAbs(unvecMatrix(rightMul(Operator(a)).matrix() * vec(x), 3) - x * a));
  }
  EXPECT_LT(worstL, 1e-13);
  EXPECT_LT(worstR, 1e-13);
}

TEST(Vectorization, ColumnStackingConvention) {
  CMatrix x(2, 2);
  x << 1, 2, 3, 4;
  const CVector v = vec(x);
  EXPECT_EQ(v(0), cplx(1));
  EXPECT_EQ(v(1), cplx(3));
  EXPECT_EQ(v(2), cplx(2));
  EXPECT_EQ(v(3), cplx(4));
}

TEST(Vectorization, IdentityAndCommutingSides) {
  EXPECT_EQ(leftMul(Operator::identity(4)).matrix(), SuperOperator::identity(4).matrix());
  std::mt19937_64 rng(5);
  const Operator a(qtest::randomMatrix(rng, 3)), b(qtest::randomMatrix(rng, 3));
  const CMatrix l = leftMul(a).matrix(), r = rightMul(b).matrix();
  EXPECT_LT(maxAbs(l * r - r * l), 1e-12);
}

TEST(Vectorization, RoundTripAllDims) {
  std::mt19937_64 rng(3);
  for (Index d = 1; d <= 64; d += 9) {
    const CMatrix x = qtest::randomMatrix(rng, d);
    EXPECT_EQ(unvecMatrix(vec(x), d), x);
  }
}

TEST(Operator, AdjointRoundTripAndShapes) {
  std::mt19937_64 rng(1);
  const Operator x(qtest::randomMatrix(rng, 4));
  EXPECT_EQ(x.adjoint().adjoint().matrix(), x.matrix());
  try {
    Operator(CMatrix::Zero(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeError);
  }
  try {
    (void)(x + Operator::identity(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeError);
  }
}

TEST(DensityMatrix, Validation) {
  EXPECT_NO_THROW(DensityMatrix::diagonal({0.25, 0.75}));
  for (auto probs : {std::vector<double>{0.5, 0.6}, std::vector<double>{1.1, -0.1}}) {
    try {
      DensityMatrix::diagonal(probs);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::NotAState);
    }
  }
  const DensityMatrix psi = DensityMatrix::pure(coherentVector(30, cplx(1.0, 0.5)));
  EXPECT_NEAR(psi.purity(), 1.0, 1e-12);
}
