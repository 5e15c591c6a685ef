#include "bandprec/forecast.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "bandprec/baselines.hpp"
#include "bandprec/errors.hpp"

namespace bandprec {

void ForecastSplit::validate(Index p) const {
  if (p1 < 1 || p1 >= p) {
    throw ValidationError({"p1: must satisfy 1 <= p1 < p (p = " + std::to_string(p) + ")"});
  }
}

DataMatrix transform_counts(const Matrix& counts) {
  for (Index j = 0; j < counts.cols(); ++j) {
    for (Index i = 0; i < counts.rows(); ++i) {
      const double v = counts(i, j);
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DomainError("transform_counts: entry (" + std::to_string(i + 1) + "," +
                          std::to_string(j + 1) + ") is not a non-negative count");
      }
    }
  }
  return DataMatrix((counts.array() + 0.25).sqrt().matrix());
}

namespace {

Eigen::LLT<Matrix> factor_s11(const DenseSymmetric& sigma_hat, Index p1) {
  Eigen::LLT<Matrix> llt(sigma_hat.matrix().topLeftCorner(p1, p1));
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const auto d = llt.matrixLLT().diagonal();
    const double dmax = d.maxCoeff();
    for (Index i = 0; i < d.size(); ++i) ok = ok && d[i] > 1e-12 * dmax;
  }
  if (!ok) throw DomainError("conditional_mean: Sigma_11 is not positive definite");
  return llt;
}

}  // namespace

Matrix conditional_mean_rows(const Vector& mu, const DenseSymmetric& sigma_hat,
                             const ForecastSplit& split, const Matrix& y1) {
  const Index p = sigma_hat.dim();
  split.validate(p);
  const Index p1 = split.p1;
  if (mu.size() != p || y1.cols() != p1) {
    throw std::invalid_argument("conditional_mean: dimension mismatch");
  }
  const auto llt = factor_s11(sigma_hat, p1);
  const Matrix dev = (y1.rowwise() - mu.head(p1).transpose()).transpose();
  const Matrix x = llt.solve(dev);
  const Matrix s21 = sigma_hat.matrix().bottomLeftCorner(p - p1, p1);
  Matrix out = (s21 * x).transpose();
  out.rowwise() += mu.tail(p - p1).transpose();
  return out;
}

Vector conditional_mean(const Vector& mu, const DenseSymmetric& sigma_hat,
                        const ForecastSplit& split, const Vector& y1) {
  return conditional_mean_rows(mu, sigma_hat, split, y1.transpose()).row(0).transpose();
}

Vector mae_by_interval(const Matrix& pred, const Matrix& actual) {
  if (pred.rows() != actual.rows() || pred.cols() != actual.cols()) {
    throw std::invalid_argument("mae_by_interval: shape mismatch");
  }
  if (pred.rows() == 0) throw DomainError("mae_by_interval: no rows");
  return (pred - actual).cwiseAbs().colwise().mean().transpose();
}

std::string to_string(ForecastEstimator e) {
  switch (e) {
    case ForecastEstimator::SampleCov: return "SampleCov";
    case ForecastEstimator::Banding: return "Banding";
    case ForecastEstimator::BP: return "BP";
  }
  return "?";
}

ForecastEstimator parse_forecast_estimator(const std::string& s) {
  if (s == "SampleCov" || s == "sample") return ForecastEstimator::SampleCov;
  if (s == "Banding" || s == "banding") return ForecastEstimator::Banding;
  if (s == "BP" || s == "bp") return ForecastEstimator::BP;
  throw ValidationError({"estimator: unknown estimator '" + s + "'"});
}

ForecastResult run_callcenter(const DataMatrix& train, const DataMatrix& test,
                              const ForecastSplit& split, const ForecastOptions& opts) {
  const Index p = train.p();
  if (test.p() != p) throw std::invalid_argument("run_callcenter: train/test column mismatch");
  split.validate(p);
  const Vector mu = train.column_means();
  const DataMatrix centered = train.centered(mu);

  ForecastResult res;
  DenseSymmetric sigma;
  switch (opts.estimator) {
    case ForecastEstimator::SampleCov:
      sigma = sample_covariance(train);
      break;
    case ForecastEstimator::Banding:
      sigma = assemble_covariance(fit_banded(centered, opts.k));
      break;
    case ForecastEstimator::BP: {
      const BpFit fit = estimate_bp(centered, opts.bp);
      res.lambda = fit.lambda;
      sigma = assemble_covariance(fit.estimate);
      break;
    }
  }
  const Index p1 = split.p1;
  const Matrix pred = conditional_mean_rows(mu, sigma, split, test.values().leftCols(p1));
  res.err = mae_by_interval(pred, test.values().rightCols(p - p1));
  res.mean_err = res.err.mean();
  return res;
}

}  // namespace bandprec
