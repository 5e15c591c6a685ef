#pragma once

#include "bandprec/cholesky_core.hpp"

namespace bandprec {

/// n x p observations, one row per observation.
class DataMatrix {
 public:
  DataMatrix() = default;
  explicit DataMatrix(Matrix y);

  Index n() const noexcept { return y_.rows(); }
  Index p() const noexcept { return y_.cols(); }
  const Matrix& values() const noexcept { return y_; }
  auto column(Index j) const { return y_.col(j); }

  Vector column_means() const;
  /// Copy with column means subtracted.
  DataMatrix centered() const;
  /// Copy with `means` subtracted from every row.
  DataMatrix centered(const Vector& means) const;
  /// Rows selected by 0-based index, in the given order.
  DataMatrix rows(const std::vector<Index>& idx) const;

  /// Y'Y (p x p), the uncentered cross-product used by every regression.
  Matrix gram() const;

 private:
  Matrix y_;
};

/// Residual matrix R = Y T': column t holds y_t - Y_[t] phi_t, and
/// column 0 holds y_1 itself. Zero bands are skipped.
Matrix residuals(const DataMatrix& data, const BandedCholesky& t);

/// sigma_1^2 = mean y_1^2, sigma_j^2 = mean of squared residuals. Entries are
/// floored at eps * mean(y_j^2) so D stays invertible on noiseless data.
DiagonalVariances residual_variances(const DataMatrix& data,
                                     const BandedCholesky& t);

}  // namespace bandprec
