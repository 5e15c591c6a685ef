#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bandprec {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense p x p symmetric matrix. Symmetry is exact: construction from a
/// general matrix copies the lower triangle onto the upper one.
class DenseSymmetric {
 public:
  DenseSymmetric() = default;
  explicit DenseSymmetric(Index p) : m_(Matrix::Zero(p, p)) {}

  /// Mirrors the lower triangle of `m` (the upper triangle is ignored).
  static DenseSymmetric from_lower(Matrix m);
  /// Requires m(i,j) == m(j,i) bit-for-bit; throws std::invalid_argument.
  static DenseSymmetric from_exact(Matrix m);
  static DenseSymmetric identity(Index p, double scale = 1.0);

  Index dim() const noexcept { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }

 private:
  explicit DenseSymmetric(Matrix m, int) : m_(std::move(m)) {}
  Matrix m_;
};

/// Unit lower-triangular factor T of the modified Cholesky decomposition,
/// stored band-major. Band j (1 <= j <= p-1) holds
/// (phi_{j+1,1}, phi_{j+2,2}, ..., phi_{p,p-j}): element r (0-based) is the
/// coefficient of variable r in the regression of variable j + r.
/// Dense T carries -phi below the diagonal.
class BandedCholesky {
 public:
  BandedCholesky() = default;
  /// All-zero factor (T = I).
  explicit BandedCholesky(Index p);
  /// Takes band vectors for j = 1..p-1; bands[j-1].size() must be p - j.
  BandedCholesky(Index p, std::vector<Vector> bands);

  /// Reads phi from a dense unit lower-triangular T (entries below the
  /// diagonal are -phi). The diagonal and upper triangle are not inspected.
  static BandedCholesky from_dense_factor(const Matrix& t);
  /// Builds the factor from per-row regression coefficients: coef(i, k) is
  /// phi_{i,k} for k < i (0-based), the rest is ignored.
  static BandedCholesky from_coefficients(const Matrix& coef);

  Index dim() const noexcept { return p_; }
  Index band_count() const noexcept { return p_ > 0 ? p_ - 1 : 0; }

  /// Band j, 1 <= j <= p-1. Throws std::out_of_range otherwise.
  const Vector& band(Index j) const;
  Vector& band(Index j);

  /// phi_{row,col} for 0-based row > col.
  double phi(Index row, Index col) const { return bands_[row - col - 1][col]; }
  void set_phi(Index row, Index col, double v) { bands_[row - col - 1][col] = v; }

  /// Regression coefficients of variable `row` on variables 0..row-1.
  Vector row_coefficients(Index row) const;

  bool band_is_zero(Index j) const;
  double band_norm(Index j) const { return band(j).norm(); }

  /// Dense T = I - Phi.
  Matrix dense_factor() const;
  /// Dense Phi (strictly lower triangular, phi_{i,k} at (i,k)).
  Matrix dense_coefficients() const;

  /// Largest |phi| over all bands.
  double max_abs() const;
  /// Total number of coefficients, p(p-1)/2.
  Index coefficient_count() const noexcept { return p_ * (p_ - 1) / 2; }

  friend bool operator==(const BandedCholesky& a, const BandedCholesky& b);

 private:
  Index p_ = 0;
  std::vector<Vector> bands_;
};

/// Innovation variances sigma_j^2 (the diagonal of D); all > 0 and finite.
class DiagonalVariances {
 public:
  DiagonalVariances() = default;
  explicit DiagonalVariances(Vector sigma2);
  static DiagonalVariances constant(Index p, double value);

  Index dim() const noexcept { return s_.size(); }
  double operator[](Index j) const { return s_[j]; }
  const Vector& values() const noexcept { return s_; }

 private:
  Vector s_;
};

/// (T, D) pair. Omega = T' D^{-1} T is positive definite by construction.
struct PrecisionEstimate {
  PrecisionEstimate() = default;
  PrecisionEstimate(BandedCholesky t, DiagonalVariances d);

  BandedCholesky factor;
  DiagonalVariances variances;

  Index dim() const noexcept { return factor.dim(); }
  /// -log|Omega| = sum_j log sigma_j^2, exact from the decomposition.
  double log_det_covariance() const;
};

/// Band j of T as a read-only view; throws std::out_of_range for j outside
/// 1..p-1.
std::span<const double> extract_band(const BandedCholesky& t, Index j);

/// Omega = T' D^{-1} T, lower triangle computed and mirrored.
DenseSymmetric assemble_precision(const PrecisionEstimate& est);

/// Sigma = T^{-1} D T^{-T} by unit-triangular forward substitution.
DenseSymmetric assemble_covariance(const PrecisionEstimate& est);

/// max_{i,j} |a_ij - b_ij|.
double norm_inf_elementwise(const DenseSymmetric& a, const DenseSymmetric& b);

/// Spectral norm of a symmetric matrix (max |eigenvalue|) by power
/// iteration on A^2. Throws NumericError if the relative change of the
/// estimate does not fall below `rel_tol` within `max_iter` iterations.
double norm_operator(const DenseSymmetric& a, double rel_tol = 1e-10,
                     int max_iter = 10000);

/// Spectral norm by a full symmetric eigendecomposition. Used where the
/// top two |eigenvalues| may nearly coincide and power iteration stalls.
/// Throws NumericError if the eigensolver fails.
double norm_operator_eigen(const DenseSymmetric& a);

DenseSymmetric operator-(const DenseSymmetric& a, const DenseSymmetric& b);

}  // namespace bandprec
