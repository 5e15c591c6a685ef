#include <gtest/gtest.h>

#include <random>

#include "bandprec/data.hpp"
#include "bandprec/linalg.hpp"
#include "oracles.hpp"

using namespace bandprec;

TEST(DataMatrix, RejectsNonFinite) {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(DataMatrix{m}, std::invalid_argument);
}

TEST(DataMatrix, GramAndCentering) {
  std::mt19937_64 rng(1);
  const Matrix y = oracle::random_matrix(7, 4, rng);
  const DataMatrix d(y);
  EXPECT_LT((d.gram() - y.transpose() * y).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(d.centered().column_means().cwiseAbs().maxCoeff(), 1e-14);
  const DataMatrix sub = d.rows({3, 0});
  EXPECT_EQ(sub.values().row(0), y.row(3));
  EXPECT_EQ(sub.values().row(1), y.row(0));
  EXPECT_THROW(d.rows({7}), std::out_of_range);
}

TEST(Residuals, MatchNaiveLoop) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 3 + rep, p = 2 + rep % 6;
    const Matrix y = oracle::random_matrix(n, p, rng);
    const BandedCholesky t = oracle::random_factor(p, rng);
    const Matrix r = residuals(DataMatrix(y), t);
    for (Index i = 0; i < n; ++i) {
      for (Index c = 0; c < p; ++c) {
        double v = y(i, c);
        for (Index k = 0; k < c; ++k) v -= t.phi(c, k) * y(i, k);
        EXPECT_NEAR(r(i, c), v, 1e-12);
      }
    }
  }
}

TEST(ResidualVariances, FormulaAndFloor) {
  std::mt19937_64 rng(3);
  const Matrix y = oracle::random_matrix(10, 3, rng);
  const BandedCholesky t = oracle::random_factor(3, rng);
  const DiagonalVariances d = residual_variances(DataMatrix(y), t);
  EXPECT_NEAR(d[0], y.col(0).squaredNorm() / 10.0, 1e-14);
  double s = 0.0;
  for (Index i = 0; i < 10; ++i) {
    const double r = y(i, 2) - t.phi(2, 0) * y(i, 0) - t.phi(2, 1) * y(i, 1);
    s += r * r;
  }
  EXPECT_NEAR(d[2], s / 10.0, 1e-12);

  // Noiseless column: the floor keeps the variance strictly positive.
  Matrix z(4, 2);
  z << 1, 2, -1, -2, 2, 4, 0.5, 1;
  BandedCholesky exact(2);
  exact.band(1)[0] = 2.0;
  const DiagonalVariances dz = residual_variances(DataMatrix(z), exact);
  EXPECT_GT(dz[1], 0.0);
  EXPECT_LT(dz[1], 1e-12);
}

TEST(Linalg, JitterOnSingularGram) {
  Matrix g(2, 2);
  g << 1, 1, 1, 1;
  Vector rhs(2);
  rhs << 1, 1;
  const auto s = linalg::solve_spd_with_jitter(g, rhs);
  EXPECT_TRUE(s.jittered);
  EXPECT_TRUE(s.x.allFinite());
  EXPECT_NEAR((g * s.x - rhs).norm(), 0.0, 1e-6);

  const auto ok = linalg::solve_spd_with_jitter(Matrix::Identity(2, 2) * 2.0, rhs);
  EXPECT_FALSE(ok.jittered);
  EXPECT_NEAR(ok.x[0], 0.5, 1e-15);
}

TEST(Linalg, MaxEigenvalueMatchesEigensolve) {
  std::mt19937_64 rng(4);
  for (Index p : {1, 3, 8, 9, 20, 40}) {
    const Matrix x = oracle::random_matrix(30, p, rng);
    const Matrix g = x.transpose() * x;
    const double ref = oracle::max_abs_eigenvalue(g);
    EXPECT_NEAR(linalg::max_eigenvalue_psd(g), ref, 1e-8 * ref) << "p = " << p;
  }
}
