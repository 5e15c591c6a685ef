#include <gtest/gtest.h>

#include <random>

#include "bandprec/errors.hpp"
#include "bandprec/penalty.hpp"
#include "oracles.hpp"

using namespace bandprec;

TEST(Scad, DerivativeExamples) {
  ScadParams s{0.2};
  EXPECT_DOUBLE_EQ(scad_derivative(0.0, s), 0.2);
  s.lambda = 1.0;
  EXPECT_NEAR(scad_derivative(2.0, s), 1.7, 1e-15);
  EXPECT_EQ(scad_derivative(3.8, s), 0.0);
  s.conventional_divisor = true;
  EXPECT_NEAR(scad_derivative(2.0, s), 1.7 / 2.7, 1e-15);
  EXPECT_THROW(scad_derivative(-1e-3, s), DomainError);
}

TEST(Scad, PenaltyIsIntegralOfDerivative) {
  for (bool div : {false, true}) {
    const ScadParams s{0.7, 3.7, div};
    // Midpoint rule on a grid with lambda and a * lambda on nodes; the printed
    // derivative jumps at lambda, so the rule is exact up to rounding.
    const int steps = 370000;
    const double dx = 1e-5;
    double integral = 0.0;
    for (int i = 0; i < steps; ++i) {
      integral += scad_derivative((i + 0.5) * dx, s) * dx;
      if ((i + 1) % 37000 == 0) {
        const double x = (i + 1) * dx;
        EXPECT_NEAR(scad_penalty(x, s), integral, 1e-9) << x;
      }
    }
    EXPECT_DOUBLE_EQ(scad_penalty(0.3, s), 0.7 * 0.3);
  }
  EXPECT_THROW(scad_penalty(-1.0, {}), DomainError);
}

TEST(Scad, ParamsValidation) {
  EXPECT_THROW((ScadParams{-1.0}.validate()), ValidationError);
  EXPECT_THROW((ScadParams{0.1, 2.0}.validate()), ValidationError);
  EXPECT_NO_THROW((ScadParams{0.0}.validate()));
}

TEST(BlockPartition, StackingRule) {
  const auto part = BlockPartition::stacked(9);
  EXPECT_EQ(part.block_count(), 3);
  EXPECT_EQ(part.bands_of(2), (std::pair<Index, Index>{3, 8}));
  EXPECT_EQ(part.length(2), 21);
  EXPECT_EQ(part.length(0), 8);
  EXPECT_EQ(part.block_of_band(7), 2);
  EXPECT_EQ(part.block_of_band(2), 1);
  EXPECT_THROW(part.bands_of(3), std::out_of_range);

  const auto p100 = BlockPartition::stacked(100);
  EXPECT_EQ(p100.block_count(), 80);
  Index total = 0;
  for (Index b = 0; b < p100.block_count(); ++b) total += p100.length(b);
  EXPECT_EQ(total, 100 * 99 / 2);
  EXPECT_EQ(BlockPartition::unstacked(5).block_count(), 4);
  // Small p clamps to one block.
  EXPECT_EQ(BlockPartition::stacked(3).block_count(), 1);
}

TEST(BandLambda, Examples) {
  const auto part = BlockPartition::stacked(101);
  EXPECT_NEAR(band_lambda(0.1, part, 0), 1.0, 1e-15);
  EXPECT_EQ(band_lambda(0.0, part, 3), 0.0);
  EXPECT_NEAR(band_lambda(1.0, BlockPartition::stacked(9), 2), std::sqrt(21.0), 1e-15);
}

TEST(BlockWeights, Examples) {
  const Index p = 12, n = 40;
  const auto part = BlockPartition::unstacked(p);
  const ScadParams s{0.05};
  const BlockWeights zero = block_weights(BandedCholesky(p), s, part, n);
  for (Index b = 0; b < part.block_count(); ++b) {
    EXPECT_NEAR(zero.w[b], n * std::sqrt(static_cast<double>(p - 1 - b)), 1e-10);
  }

  BandedCholesky ref(p);
  const double lam3 = band_lambda(s.lambda, part, 2);
  ref.band(3).setConstant(2.0 * lam3 / std::sqrt(static_cast<double>(p - 3)));
  const double lam5 = band_lambda(s.lambda, part, 4);
  ref.band(5).setConstant(4.0 * lam5 / std::sqrt(static_cast<double>(p - 5)));
  const BlockWeights w = block_weights(ref, s, part, n);
  EXPECT_NEAR(w.w[2], n * 1.7 * std::sqrt(static_cast<double>(p - 3)), 1e-8);
  EXPECT_EQ(w.w[4], 0.0);

  EXPECT_THROW(block_weights(ref, ScadParams{0.0}, part, n), DomainError);
  BandedCholesky wrong(p + 1);
  EXPECT_THROW(block_weights(wrong, s, part, n), std::invalid_argument);
}

TEST(Objective, LeastSquaresCases) {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 5 + rep, p = 2 + rep % 7;
    const Matrix y = oracle::random_matrix(n, p, rng);
    const BandedCholesky t = oracle::random_factor(p, rng);
    const DataMatrix d(y);
    const double ref = oracle::ls_objective(y, t);
    EXPECT_NEAR(objective_ls(d, t), ref, 1e-10 * std::max(1.0, ref));
    EXPECT_NEAR(objective_ls(d, BandedCholesky(p)), y.rightCols(p - 1).squaredNorm(), 1e-10);
  }
  // Noiseless data from the factor itself.
  Matrix y(6, 3);
  y.col(0) << 1, 2, -1, 0.5, 3, -2;
  y.col(1) = 0.4 * y.col(0);
  y.col(2) = -0.3 * y.col(1);
  BandedCholesky t(3);
  t.band(1) << 0.4, -0.3;
  EXPECT_NEAR(objective_ls(DataMatrix(y), t), 0.0, 1e-24);
}

TEST(Objective, PenalizedBranches) {
  std::mt19937_64 rng(32);
  const Matrix y = oracle::random_matrix(8, 2, rng);
  const DataMatrix d(y);
  const auto part = BlockPartition::unstacked(2);
  BandedCholesky t(2);
  EXPECT_DOUBLE_EQ(objective_penalized(d, t, ScadParams{0.0}, part), objective_ls(d, t));
  t.band(1)[0] = 0.05;
  const ScadParams s{0.1};
  EXPECT_NEAR(objective_penalized(d, t, s, part), objective_ls(d, t) + 8 * 0.1 * 0.05, 1e-12);
  EXPECT_NEAR(block_penalty(t, s, part, 8), 8 * 0.1 * 0.05, 1e-15);
  // Beyond a * lambda the penalty is flat.
  t.band(1)[0] = 1.0;
  const double flat = block_penalty(t, s, part, 8);
  t.band(1)[0] = 2.0;
  EXPECT_NEAR(block_penalty(t, s, part, 8), flat, 1e-15);
  EXPECT_NEAR(flat, 8 * 0.01 * (1.0 + 2.7 * 2.7 / 2.0), 1e-12);
}

TEST(Objective, ContinuousInFactorAndLambda) {
  std::mt19937_64 rng(33);
  const Index p = 6;
  const Matrix y = oracle::random_matrix(15, p, rng);
  const DataMatrix d(y);
  const auto part = BlockPartition::stacked(p);
  const BandedCholesky t = oracle::random_factor(p, rng);
  const double base = objective_penalized(d, t, ScadParams{0.2}, part);
  BandedCholesky u = t;
  u.band(1)[0] += 1e-9;
  EXPECT_NEAR(objective_penalized(d, u, ScadParams{0.2}, part), base, 1e-6);
  EXPECT_NEAR(objective_penalized(d, t, ScadParams{1e-12}, part), objective_ls(d, t), 1e-8);
}
