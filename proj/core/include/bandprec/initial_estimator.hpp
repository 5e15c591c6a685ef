#pragma once

#include <optional>

#include "bandprec/cholesky_core.hpp"
#include "bandprec/data.hpp"

namespace bandprec {

struct InitialConfig {
  /// Window fraction: row i regresses on at most floor(gamma * n) predecessors.
  double gamma = 0.9;
  /// Fill coefficients outside the first window by regressing y_i on each
  /// successive batch of floor(gamma * n) earlier variables.
  bool continue_beyond_window = false;
  /// Local-linear bandwidth on the normalized position scale [0, 1].
  std::optional<double> smoothing_bandwidth = 0.3;
  /// Bands shorter than this are not smoothed.
  Index min_smooth_length = 5;

  /// Throws ValidationError listing every offending field.
  void validate() const;
};

struct InitialEstimate {
  BandedCholesky factor;
  /// Number of window regressions solved with ridge jitter.
  Index jittered_windows = 0;
};

/// First predictor (1-based) of row i: max(floor(i - gamma n), 1).
Index window_start(Index i, Index n, double gamma);

/// Windowed OLS factor: for each i = 2..p, y_i is regressed on
/// y_{c_i}, ..., y_{i-1}; remaining coefficients are zero unless
/// continue_beyond_window is set.
InitialEstimate initial_ols(const DataMatrix& data, const InitialConfig& cfg);

/// Replaces each band of length >= min_smooth_length by its local-linear
/// Epanechnikov fit against position (j + r) / p. Requires a bandwidth.
BandedCholesky smooth_bands(const BandedCholesky& t, const InitialConfig& cfg);

/// Local-linear smoother for one series observed at positions x.
/// Falls back to the local-constant fit where the local design is degenerate.
Vector local_linear_smooth(const Vector& x, const Vector& y, double h);

}  // namespace bandprec
