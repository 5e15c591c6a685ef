#pragma once

#include <cstdint>
#include <vector>

#include "bandprec/cholesky_core.hpp"
#include "bandprec/data.hpp"

namespace bandprec {

struct BandingConfig {
  std::vector<Index> k_grid;
  int folds = 5;
  std::uint64_t seed = 0;

  /// Throws ValidationError for an empty grid, negative k, k >= n or k >= p,
  /// or folds outside [2, n].
  void validate(Index n, Index p) const;
};

/// k-banded Cholesky factor: y_i is regressed by OLS on its min(k, i-1)
/// immediate predecessors. Requires k < n.
PrecisionEstimate fit_banded(const DataMatrix& data, Index k);

struct BandedCvFit {
  PrecisionEstimate estimate;
  Index k = 0;
  /// Mean validation loss per grid entry; empty for a one-entry grid (no CV run).
  std::vector<double> cv_loss;
};

/// Chooses k from cfg.k_grid by K-fold CV with the Gaussian negative
/// log-likelihood, then refits on the full data.
BandedCvFit fit_banded_cv(const DataMatrix& data, const BandingConfig& cfg);

/// S = n^{-1} sum_i (y_i - ybar)(y_i - ybar)'.
DenseSymmetric sample_covariance(const DataMatrix& data);

}  // namespace bandprec
