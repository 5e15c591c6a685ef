#include "bandprec/data.hpp"

#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bandprec {

DataMatrix::DataMatrix(Matrix y) : y_(std::move(y)) {
  if (!y_.allFinite()) {
    throw std::invalid_argument("DataMatrix: non-finite entry");
  }
}

Vector DataMatrix::column_means() const {
  if (n() == 0) return Vector::Zero(p());
  return y_.colwise().mean().transpose();
}

DataMatrix DataMatrix::centered() const { return centered(column_means()); }

DataMatrix DataMatrix::centered(const Vector& means) const {
  if (means.size() != p()) {
    throw std::invalid_argument("centered: mean vector has wrong length");
  }
  Matrix out = y_.rowwise() - means.transpose();
  return DataMatrix(std::move(out));
}

DataMatrix DataMatrix::rows(const std::vector<Index>& idx) const {
  Matrix out(static_cast<Index>(idx.size()), p());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || idx[r] >= n()) {
      throw std::out_of_range("row index " + std::to_string(idx[r]));
    }
    out.row(static_cast<Index>(r)) = y_.row(idx[r]);
  }
  return DataMatrix(std::move(out));
}

Matrix DataMatrix::gram() const {
  Matrix g = Matrix::Zero(p(), p());
  g.selfadjointView<Eigen::Lower>().rankUpdate(y_.transpose());
  return g.selfadjointView<Eigen::Lower>();
}

Matrix residuals(const DataMatrix& data, const BandedCholesky& t) {
  if (data.p() != t.dim()) {
    throw std::invalid_argument("residuals: data has " +
                                std::to_string(data.p()) +
                                " columns, factor has dimension " +
                                std::to_string(t.dim()));
  }
  const Matrix& y = data.values();
  Matrix r = y;
  const Index p = t.dim();
  for (Index j = 1; j < p; ++j) {
    if (t.band_is_zero(j)) continue;
    const Vector& b = t.band(j);
    for (Index k = 0; k < p - j; ++k) {
      if (b[k] != 0.0) r.col(j + k).noalias() -= b[k] * y.col(k);
    }
  }
  return r;
}

DiagonalVariances residual_variances(const DataMatrix& data,
                                     const BandedCholesky& t) {
  const Matrix r = residuals(data, t);
  const double n = static_cast<double>(data.n());
  Vector s(data.p());
  for (Index j = 0; j < data.p(); ++j) {
    const double raw = data.column(j).squaredNorm() / n;
    const double floor = std::numeric_limits<double>::epsilon() *
                         std::max(raw, std::numeric_limits<double>::min());
    s[j] = std::max(r.col(j).squaredNorm() / n, floor);
  }
  return DiagonalVariances(std::move(s));
}

}  // namespace bandprec
