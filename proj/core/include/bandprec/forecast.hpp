#pragma once

#include <string>
#include <vector>

#include "bandprec/cholesky_core.hpp"
#include "bandprec/data.hpp"
#include "bandprec/pipeline.hpp"

namespace bandprec {

struct ForecastSplit {
  /// Size of the conditioning block (the first p1 coordinates).
  Index p1 = 0;
  void validate(Index p) const;
};

/// y = sqrt(N + 1/4) elementwise. Throws DomainError for negative or
/// non-finite counts.
DataMatrix transform_counts(const Matrix& counts);

/// mu_2 + Sigma_21 Sigma_11^{-1} (y1 - mu_1). Throws DomainError if Sigma_11
/// is not positive definite.
Vector conditional_mean(const Vector& mu, const DenseSymmetric& sigma_hat,
                        const ForecastSplit& split, const Vector& y1);

/// Row-wise conditional means for every row of `y1` (one test row per row).
Matrix conditional_mean_rows(const Vector& mu, const DenseSymmetric& sigma_hat,
                             const ForecastSplit& split, const Matrix& y1);

/// Err_j = mean_i |pred_ij - actual_ij|.
Vector mae_by_interval(const Matrix& pred, const Matrix& actual);

enum class ForecastEstimator { SampleCov, Banding, BP };

std::string to_string(ForecastEstimator e);
ForecastEstimator parse_forecast_estimator(const std::string& s);

struct ForecastOptions {
  ForecastEstimator estimator = ForecastEstimator::BP;
  /// Banding order.
  Index k = 19;
  BpOptions bp;
};

struct ForecastResult {
  Vector err;
  double mean_err = 0.0;
  /// BP only.
  double lambda = 0.0;
};

/// Fits the covariance on train-mean-centered training rows, forecasts the
/// last p - p1 coordinates of each test row and returns Err_j.
ForecastResult run_callcenter(const DataMatrix& train, const DataMatrix& test,
                              const ForecastSplit& split, const ForecastOptions& opts);

}  // namespace bandprec
