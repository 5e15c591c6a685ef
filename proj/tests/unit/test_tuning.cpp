#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "bandprec/tuning.hpp"
#include "oracles.hpp"

using namespace bandprec;

namespace {

// Ridge per (row t, column k), computed from the SCAD branches directly.
std::vector<std::vector<double>> ridge_table(const BandedCholesky& t0, double lambda, double a,
                                             const BlockPartition& part, Index n) {
  const Index p = t0.dim();
  std::vector<std::vector<double>> out(static_cast<std::size_t>(p));
  for (Index t = 0; t < p; ++t) {
    out[t].assign(static_cast<std::size_t>(t), 0.0);
    for (Index k = 0; k < t; ++k) {
      const Index b = part.block_of_band(t - k);
      const auto [first, last] = part.bands_of(b);
      double sq = 0.0;
      Index len = 0;
      for (Index j = first; j <= last; ++j) {
        sq += t0.band(j).squaredNorm();
        len += p - j;
      }
      const double theta = std::sqrt(sq);
      if (theta == 0.0) {
        out[t][k] = -1.0;
        continue;
      }
      const double lb = lambda * std::sqrt(static_cast<double>(len));
      const double d = theta <= lb ? lb : std::max(a * lb - theta, 0.0);
      out[t][k] = static_cast<double>(n) * d / theta;
    }
  }
  return out;
}

}  // namespace

TEST(Gcv, MatchesDenseOracleSmallInstance) {
  Matrix y(5, 3);
  y << 0.3, -1.2, 0.8,
       1.1, 0.4, -0.5,
       -0.7, 0.9, 1.6,
       0.2, -0.3, -0.9,
       1.5, 1.0, 0.1;
  const DataMatrix d(y);
  const auto part = BlockPartition::unstacked(3);
  BandedCholesky t0(3);
  t0.band(1) << 0.4, -0.2;
  t0.band(2) << 0.05;
  GcvOptions smoothed;
  smoothed.residual = GcvResidual::SmoothedInitial;
  for (double lambda : {0.0, 0.01, 0.05, 0.2, 1.0}) {
    const ScadParams s{lambda};
    const auto ridge = ridge_table(t0, lambda, 3.7, part, 5);
    const auto ref = oracle::gcv(y, t0, ridge);
    const GcvScore got = gcv_score(d, t0, s, part, smoothed);
    EXPECT_NEAR(got.value, ref.value, 1e-10 * ref.value) << lambda;
    EXPECT_EQ(got.excluded_terms, ref.excluded);

    // Fitted mode with M = 0: restricted least squares on zero-weight blocks.
    std::vector<bool> free(3, lambda == 0.0);
    if (lambda > 0.0) {
      const BlockWeights w = block_weights(t0, s, part, 5);
      for (Index j = 1; j < 3; ++j) free[j] = w.w[part.block_of_band(j)] == 0.0;
    }
    const BandedCholesky fitted = restricted_least_squares(d, free);
    const auto ref_fit = oracle::gcv(y, fitted, ridge);
    EXPECT_NEAR(gcv_score(d, t0, s, part).value, ref_fit.value, 1e-10 * ref_fit.value);
  }
}

TEST(Gcv, ZeroLambdaUsesProjectionRank) {
  std::mt19937_64 rng(51);
  const Index n = 20, p = 6;
  const Matrix y = oracle::random_matrix(n, p, rng);
  const BandedCholesky t0 = oracle::random_factor(p, rng);
  const auto part = BlockPartition::stacked(p);
  GcvOptions o;
  o.residual = GcvResidual::SmoothedInitial;
  double expect = 0.0;
  const Matrix r = residuals(DataMatrix(y), t0);
  for (Index t = 1; t < p; ++t) {
    const double denom = static_cast<double>(n - t);
    expect += n * r.col(t).squaredNorm() / (denom * denom);
  }
  EXPECT_NEAR(gcv_score(DataMatrix(y), t0, ScadParams{0.0}, part, o).value, expect, 1e-10 * expect);
}

TEST(Gcv, LargeRidgeLimit) {
  std::mt19937_64 rng(52);
  const Index n = 30, p = 5;
  const Matrix y = oracle::random_matrix(n, p, rng);
  const BandedCholesky t0 = oracle::random_factor(p, rng, 0.01);
  const auto part = BlockPartition::unstacked(p);
  GcvOptions o;
  o.residual = GcvResidual::SmoothedInitial;
  // Every block sits in the first SCAD branch, so the ridge grows like lambda.
  const Matrix r = residuals(DataMatrix(y), t0);
  double limit = 0.0;
  for (Index t = 1; t < p; ++t) limit += r.col(t).squaredNorm() / n;
  const double v = gcv_score(DataMatrix(y), t0, ScadParams{1e6}, part, o).value;
  EXPECT_NEAR(v, limit, 1e-6 * limit);
}

TEST(Gcv, ContinuousInLambda) {
  std::mt19937_64 rng(53);
  const Matrix y = oracle::random_matrix(25, 6, rng);
  const BandedCholesky t0 = oracle::random_factor(6, rng);
  const auto part = BlockPartition::stacked(6);
  GcvOptions o;
  o.residual = GcvResidual::SmoothedInitial;
  const double lam = 0.013;
  const double base = gcv_score(DataMatrix(y), t0, ScadParams{lam}, part, o).value;
  double prev_gap = std::numeric_limits<double>::infinity();
  for (double eps : {1e-4, 1e-6, 1e-8}) {
    const double gap =
        std::abs(gcv_score(DataMatrix(y), t0, ScadParams{lam + eps}, part, o).value - base);
    EXPECT_LE(gap, prev_gap);
    prev_gap = gap;
  }
  EXPECT_LT(prev_gap, 1e-5 * base);
}

TEST(Gcv, ZeroNormBlockColumnsDropped) {
  std::mt19937_64 rng(54);
  const Index n = 12, p = 4;
  const Matrix y = oracle::random_matrix(n, p, rng);
  BandedCholesky t0(p);
  t0.band(1).setConstant(0.3);
  const auto part = BlockPartition::unstacked(p);
  GcvOptions o;
  o.residual = GcvResidual::SmoothedInitial;
  const auto ridge = ridge_table(t0, 0.1, 3.7, part, n);
  const auto ref = oracle::gcv(y, t0, ridge);
  EXPECT_NEAR(gcv_score(DataMatrix(y), t0, ScadParams{0.1}, part, o).value, ref.value,
              1e-10 * ref.value);
}

TEST(Gcv, NonPositiveDenominatorExcluded) {
  std::mt19937_64 rng(55);
  const Index n = 3, p = 6;
  const Matrix y = oracle::random_matrix(n, p, rng);
  const BandedCholesky t0 = oracle::random_factor(p, rng);
  GcvOptions o;
  o.residual = GcvResidual::SmoothedInitial;
  const GcvScore s = gcv_score(DataMatrix(y), t0, ScadParams{0.0}, BlockPartition::unstacked(p), o);
  // Rows t >= 3 have a rank-3 hat matrix, so n - trace = 0.
  EXPECT_EQ(s.excluded_terms, 3);
}

TEST(SelectLambda, ContractAndPermutationInvariance) {
  std::mt19937_64 rng(56);
  const Matrix y = oracle::random_matrix(40, 8, rng);
  const DataMatrix d(y);
  const BandedCholesky t0 = oracle::ols_factor(y);
  const auto part = BlockPartition::stacked(8);
  std::vector<double> grid = default_lambda_grid(t0, part, 3.7, 12);
  const GcvResult a = select_lambda(d, t0, grid, part);
  const auto it = std::min_element(a.gcv_values.begin(), a.gcv_values.end());
  EXPECT_EQ(a.best_lambda, grid[static_cast<std::size_t>(it - a.gcv_values.begin())]);
  std::vector<double> rev(grid.rbegin(), grid.rend());
  std::shuffle(rev.begin(), rev.end(), rng);
  EXPECT_EQ(select_lambda(d, t0, rev, part).best_lambda, a.best_lambda);
  EXPECT_EQ(select_lambda(d, t0, {0.37}, part).best_lambda, 0.37);
  EXPECT_THROW(select_lambda(d, t0, {}, part), DomainError);
}

TEST(SelectLambda, TiesGoToSmallerLambda) {
  std::mt19937_64 rng(57);
  const Matrix y = oracle::random_matrix(30, 4, rng);
  const BandedCholesky t0 = oracle::random_factor(4, rng, 5.0);
  // Far above every plateau: all weights vanish, so both scores coincide.
  const auto part = BlockPartition::unstacked(4);
  const GcvResult r = select_lambda(DataMatrix(y), t0, {2e-3, 1e-3}, part);
  EXPECT_EQ(r.gcv_values[0], r.gcv_values[1]);
  EXPECT_EQ(r.best_lambda, 1e-3);
}

TEST(DefaultGrid, SpansThreeDecadesAndPositiveWeights) {
  std::mt19937_64 rng(58);
  const BandedCholesky t0 = oracle::random_factor(10, rng);
  const auto part = BlockPartition::stacked(10);
  const auto g = default_lambda_grid(t0, part, 3.7);
  ASSERT_EQ(g.size(), 20u);
  EXPECT_NEAR(g.back() / g.front(), 1000.0, 1e-9);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
  const BlockWeights w = block_weights(t0, ScadParams{g.back()}, part, 10);
  EXPECT_GT(w.w.minCoeff(), 0.0);
  const BlockWeights below = block_weights(t0, ScadParams{g.back() / (1 + 1e-5)}, part, 10);
  EXPECT_EQ(below.w.minCoeff(), 0.0);
  EXPECT_THROW(default_lambda_grid(BandedCholesky(10), part, 3.7), DomainError);
}

TEST(Kfold, PartitionCoversRowsOnce) {
  const auto folds = kfold_partition(23, 5, 9);
  ASSERT_EQ(folds.size(), 5u);
  std::set<Index> seen;
  for (const auto& f : folds) {
    EXPECT_GE(f.size(), 4u);
    EXPECT_LE(f.size(), 5u);
    seen.insert(f.begin(), f.end());
  }
  EXPECT_EQ(seen.size(), 23u);
  EXPECT_EQ(kfold_partition(23, 5, 9), folds);
  EXPECT_NE(kfold_partition(23, 5, 10), folds);
  EXPECT_THROW(kfold_partition(5, 1, 0), DomainError);
  EXPECT_THROW(kfold_partition(5, 6, 0), DomainError);
}

TEST(Kfold, CvContract) {
  std::mt19937_64 rng(59);
  const DataMatrix d(oracle::random_matrix(10, 3, rng));
  const std::function<PrecisionEstimate(const DataMatrix&, const int&)> fit =
      [](const DataMatrix& tr, const int&) {
        return PrecisionEstimate(BandedCholesky(tr.p()), DiagonalVariances::constant(tr.p(), 1.0));
      };
  const std::function<double(const PrecisionEstimate&, const DataMatrix&)> constant =
      [](const PrecisionEstimate&, const DataMatrix&) { return 1.0; };
  const auto r = kfold_cv<int>(d, 2, {7, 3, 5}, fit, constant, 1);
  EXPECT_EQ(r.best, 7);
  EXPECT_EQ(r.best_index, 0u);
  EXPECT_EQ(kfold_cv<int>(d, 10, {4}, fit, constant, 1).best, 4);
  EXPECT_THROW(kfold_cv<int>(d, 11, {4}, fit, constant, 1), DomainError);
  EXPECT_THROW(kfold_cv<int>(d, 2, {}, fit, constant, 1), DomainError);

  const std::function<PrecisionEstimate(const DataMatrix&, const int&)> flaky =
      [&](const DataMatrix& tr, const int& c) {
        if (c == 0) throw DomainError("boom");
        return fit(tr, c);
      };
  const auto f = kfold_cv<int>(d, 2, {0, 1}, flaky, constant, 1);
  EXPECT_EQ(f.best, 1);
  EXPECT_TRUE(std::isinf(f.mean_loss[0]));
}

TEST(GaussianNll, MatchesDenseFormula) {
  std::mt19937_64 rng(60);
  const Index p = 4;
  const PrecisionEstimate e(oracle::random_factor(p, rng), oracle::random_variances(p, rng));
  const Matrix y = oracle::random_matrix(7, p, rng);
  const Matrix omega = oracle::precision(e);
  const Matrix s = y.transpose() * y / 7.0;
  const double ref = (omega * s).trace() - std::log(omega.determinant());
  EXPECT_NEAR(gaussian_nll(e, DataMatrix(y)), ref, 1e-10 * std::abs(ref));
}
