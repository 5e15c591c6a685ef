#include "bandprec/cholesky_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "bandprec/errors.hpp"

namespace bandprec {

DenseSymmetric DenseSymmetric::from_lower(Matrix m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("DenseSymmetric: matrix is not square");
  }
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < j; ++i) m(i, j) = m(j, i);
  }
  return DenseSymmetric(std::move(m), 0);
}

DenseSymmetric DenseSymmetric::from_exact(Matrix m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("DenseSymmetric: matrix is not square");
  }
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < j; ++i) {
      if (m(i, j) != m(j, i)) {
        throw std::invalid_argument("DenseSymmetric: entries (" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + ") differ");
      }
    }
  }
  return DenseSymmetric(std::move(m), 0);
}

DenseSymmetric DenseSymmetric::identity(Index p, double scale) {
  return DenseSymmetric(Matrix::Identity(p, p) * scale, 0);
}

DenseSymmetric operator-(const DenseSymmetric& a, const DenseSymmetric& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("DenseSymmetric: dimension mismatch");
  }
  return DenseSymmetric::from_lower(a.matrix() - b.matrix());
}

BandedCholesky::BandedCholesky(Index p) : p_(p) {
  if (p < 1) throw std::invalid_argument("BandedCholesky: p must be >= 1");
  bands_.reserve(static_cast<std::size_t>(p - 1));
  for (Index j = 1; j < p; ++j) bands_.push_back(Vector::Zero(p - j));
}

BandedCholesky::BandedCholesky(Index p, std::vector<Vector> bands)
    : p_(p), bands_(std::move(bands)) {
  if (p < 1) throw std::invalid_argument("BandedCholesky: p must be >= 1");
  if (static_cast<Index>(bands_.size()) != p - 1) {
    throw std::invalid_argument("BandedCholesky: expected " +
                                std::to_string(p - 1) + " bands, got " +
                                std::to_string(bands_.size()));
  }
  for (Index j = 1; j < p; ++j) {
    if (bands_[j - 1].size() != p - j) {
      throw std::invalid_argument("BandedCholesky: band " + std::to_string(j) +
                                  " has length " +
                                  std::to_string(bands_[j - 1].size()) +
                                  ", expected " + std::to_string(p - j));
    }
  }
}

BandedCholesky BandedCholesky::from_dense_factor(const Matrix& t) {
  if (t.rows() != t.cols()) {
    throw std::invalid_argument("from_dense_factor: matrix is not square");
  }
  BandedCholesky out(t.rows());
  for (Index j = 1; j < out.p_; ++j) {
    for (Index r = 0; r < out.p_ - j; ++r) out.bands_[j - 1][r] = -t(j + r, r);
  }
  return out;
}

BandedCholesky BandedCholesky::from_coefficients(const Matrix& coef) {
  if (coef.rows() != coef.cols()) {
    throw std::invalid_argument("from_coefficients: matrix is not square");
  }
  BandedCholesky out(coef.rows());
  for (Index j = 1; j < out.p_; ++j) {
    for (Index r = 0; r < out.p_ - j; ++r) out.bands_[j - 1][r] = coef(j + r, r);
  }
  return out;
}

const Vector& BandedCholesky::band(Index j) const {
  if (j < 1 || j >= p_) {
    throw std::out_of_range("band index " + std::to_string(j) +
                            " outside 1.." + std::to_string(p_ - 1));
  }
  return bands_[j - 1];
}

Vector& BandedCholesky::band(Index j) {
  if (j < 1 || j >= p_) {
    throw std::out_of_range("band index " + std::to_string(j) +
                            " outside 1.." + std::to_string(p_ - 1));
  }
  return bands_[j - 1];
}

Vector BandedCholesky::row_coefficients(Index row) const {
  Vector out(row);
  for (Index k = 0; k < row; ++k) out[k] = phi(row, k);
  return out;
}

bool BandedCholesky::band_is_zero(Index j) const {
  const Vector& b = band(j);
  for (Index r = 0; r < b.size(); ++r) {
    if (b[r] != 0.0) return false;
  }
  return true;
}

Matrix BandedCholesky::dense_factor() const {
  Matrix t = Matrix::Identity(p_, p_);
  for (Index j = 1; j < p_; ++j) {
    for (Index r = 0; r < p_ - j; ++r) t(j + r, r) = -bands_[j - 1][r];
  }
  return t;
}

Matrix BandedCholesky::dense_coefficients() const {
  Matrix c = Matrix::Zero(p_, p_);
  for (Index j = 1; j < p_; ++j) {
    for (Index r = 0; r < p_ - j; ++r) c(j + r, r) = bands_[j - 1][r];
  }
  return c;
}

double BandedCholesky::max_abs() const {
  double m = 0.0;
  for (const auto& b : bands_) {
    if (b.size() > 0) m = std::max(m, b.cwiseAbs().maxCoeff());
  }
  return m;
}

bool operator==(const BandedCholesky& a, const BandedCholesky& b) {
  if (a.p_ != b.p_) return false;
  for (std::size_t j = 0; j < a.bands_.size(); ++j) {
    if (a.bands_[j] != b.bands_[j]) return false;
  }
  return true;
}

DiagonalVariances::DiagonalVariances(Vector sigma2) : s_(std::move(sigma2)) {
  for (Index j = 0; j < s_.size(); ++j) {
    if (!(s_[j] > 0.0) || !std::isfinite(s_[j])) {
      throw DomainError("variance " + std::to_string(j) +
                        " is not strictly positive and finite");
    }
  }
}

DiagonalVariances DiagonalVariances::constant(Index p, double value) {
  return DiagonalVariances(Vector::Constant(p, value));
}

PrecisionEstimate::PrecisionEstimate(BandedCholesky t, DiagonalVariances d)
    : factor(std::move(t)), variances(std::move(d)) {
  if (factor.dim() != variances.dim()) {
    throw std::invalid_argument("PrecisionEstimate: factor has dimension " +
                                std::to_string(factor.dim()) +
                                " but variances have " +
                                std::to_string(variances.dim()));
  }
}

double PrecisionEstimate::log_det_covariance() const {
  return variances.values().array().log().sum();
}

std::span<const double> extract_band(const BandedCholesky& t, Index j) {
  const Vector& b = t.band(j);
  return {b.data(), static_cast<std::size_t>(b.size())};
}

namespace {

void check_estimate(const PrecisionEstimate& est) {
  if (est.factor.dim() != est.variances.dim()) {
    throw std::invalid_argument("PrecisionEstimate: dimension mismatch");
  }
  const Vector& s = est.variances.values();
  for (Index j = 0; j < s.size(); ++j) {
    if (!(s[j] > 0.0)) throw DomainError("non-positive variance");
  }
}

}  // namespace

DenseSymmetric assemble_precision(const PrecisionEstimate& est) {
  check_estimate(est);
  const Index p = est.dim();
  const Matrix t = est.factor.dense_factor();
  const Vector inv = est.variances.values().cwiseInverse();
  // Omega(a,b) = sum_i T(i,a) T(i,b) / sigma_i^2; T(i,a) = 0 for i < a.
  Matrix omega = Matrix::Zero(p, p);
  for (Index b = 0; b < p; ++b) {
    for (Index a = b; a < p; ++a) {
      double s = 0.0;
      for (Index i = a; i < p; ++i) s += t(i, a) * t(i, b) * inv[i];
      omega(a, b) = s;
    }
  }
  return DenseSymmetric::from_lower(std::move(omega));
}

DenseSymmetric assemble_covariance(const PrecisionEstimate& est) {
  check_estimate(est);
  const Index p = est.dim();
  const Matrix t = est.factor.dense_factor();
  Matrix tinv = Matrix::Identity(p, p);
  t.triangularView<Eigen::UnitLower>().solveInPlace(tinv);
  const Vector sd = est.variances.values().cwiseSqrt();
  const Matrix scaled = tinv * sd.asDiagonal();
  Matrix sigma = Matrix::Zero(p, p);
  sigma.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  return DenseSymmetric::from_lower(std::move(sigma));
}

double norm_inf_elementwise(const DenseSymmetric& a, const DenseSymmetric& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("norm_inf_elementwise: dimension mismatch");
  }
  if (a.dim() == 0) return 0.0;
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

double norm_operator(const DenseSymmetric& a, double rel_tol, int max_iter) {
  const Index p = a.dim();
  if (p == 0) return 0.0;
  const Matrix& m = a.matrix();
  if (m.cwiseAbs().maxCoeff() == 0.0) return 0.0;

  Vector x(p);
  for (Index i = 0; i < p; ++i) x[i] = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i) + 0.3);
  x.normalize();

  // For unit x, ||A x||^2 is the Rayleigh quotient of A^2.
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const Vector y = m * x;
    const double est = y.norm();
    if (est == 0.0) {
      // x landed in the null space; restart from a coordinate direction.
      x.setZero();
      x[it % p] = 1.0;
      continue;
    }
    const Vector z = m * y;
    const double zn = z.norm();
    if (zn == 0.0) return est;
    x = z / zn;
    if (it > 1 && std::abs(est - prev) <= rel_tol * est) return est;
    prev = est;
  }
  throw NumericError("norm_operator: power iteration did not converge", max_iter);
}

double norm_operator_eigen(const DenseSymmetric& a) {
  if (a.dim() == 0) return 0.0;
  const Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("norm_operator_eigen: eigensolver failed", 0);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace bandprec
