#include <gtest/gtest.h>

#include <random>

#include "gfanm/nnls.hpp"
#include "oracles.hpp"

using namespace gfanm;

TEST(Nnls, InteriorSolutionMatchesLeastSquares) {
  RMatrix a(4, 2);
  a << 1, 0, 0, 1, 1, 1, 2, 1;
  const RVector x_true = (RVector(2) << 0.7, 1.3).finished();
  const RVector b = a * x_true;
  const NnlsResult r = nnls(a, b);
  EXPECT_LT((r.x - x_true).norm(), 1e-12);
  EXPECT_LT(r.residual_norm, 1e-12);
}

TEST(Nnls, ClampsNegativeDirection) {
  RMatrix a = RMatrix::Identity(3, 3);
  const RVector b = (RVector(3) << 1.0, -2.0, 0.5).finished();
  const NnlsResult r = nnls(a, b);
  EXPECT_NEAR(r.x(0), 1.0, 1e-15);
  EXPECT_EQ(r.x(1), 0.0);
  EXPECT_NEAR(r.x(2), 0.5, 1e-15);
  EXPECT_NEAR(r.residual_norm, 2.0, 1e-12);
}

TEST(Nnls, ZeroRightHandSide) {
  const RMatrix a = RMatrix::Random(5, 3);
  const NnlsResult r = nnls(a, RVector::Zero(5));
  EXPECT_EQ(r.x.norm(), 0.0);
}

TEST(Nnls, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 60; ++trial) {
    const int rows = 3 + trial % 6;
    const int cols = 2 + trial % 9;
    RMatrix a(rows, cols);
    RVector b(rows);
    for (int i = 0; i < rows; ++i) {
      b(i) = nd(rng);
      for (int j = 0; j < cols; ++j) a(i, j) = nd(rng);
    }
    const NnlsResult r = nnls(a, b);
    const RVector ref = oracle::nnls_enumerate(a, b);
    EXPECT_NEAR(r.residual_norm, (a * ref - b).norm(), 1e-10) << "trial " << trial;
    EXPECT_GE(r.x.minCoeff(), 0.0);
    // KKT: gradient nonpositive on the zero set, zero on the support
    const RVector w = a.transpose() * (b - a * r.x);
    for (int j = 0; j < cols; ++j) {
      if (r.x(j) > 0.0) {
        EXPECT_NEAR(w(j), 0.0, 1e-9);
      } else {
        EXPECT_LE(w(j), 1e-9);
      }
    }
  }
}

TEST(Nnls, ShapeMismatchThrows) {
  EXPECT_THROW(nnls(RMatrix::Zero(3, 2), RVector::Zero(4)), Error);
}
