#include "bandprec/baselines.hpp"

#include <string>

#include "bandprec/errors.hpp"
#include "bandprec/linalg.hpp"
#include "bandprec/tuning.hpp"

namespace bandprec {

void BandingConfig::validate(Index n, Index p) const {
  std::vector<std::string> bad;
  if (k_grid.empty()) bad.push_back("k_grid: empty");
  for (Index k : k_grid) {
    if (k < 0 || k >= n || k >= p) {
      bad.push_back("k_grid: value " + std::to_string(k) + " outside [0, min(n, p))");
      break;
    }
  }
  if (folds < 2 || folds > n) bad.push_back("folds: must lie in [2, n]");
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

PrecisionEstimate fit_banded(const DataMatrix& data, Index k) {
  const Index n = data.n();
  const Index p = data.p();
  if (k < 0) throw DomainError("fit_banded: k must be non-negative");
  if (k >= n) throw DomainError("fit_banded: k must be smaller than n");
  const Matrix gram = data.gram();
  BandedCholesky t(p);
  for (Index i = 1; i < p; ++i) {
    const Index m = std::min(k, i);
    if (m == 0) continue;
    const Index c0 = i - m;
    const Matrix g = gram.block(c0, c0, m, m);
    const Vector rhs = gram.block(c0, i, m, 1);
    const Vector beta = linalg::solve_spd_with_jitter(g, rhs).x;
    for (Index c = 0; c < m; ++c) t.set_phi(i, c0 + c, beta[c]);
  }
  DiagonalVariances d = residual_variances(data, t);
  return {std::move(t), std::move(d)};
}

BandedCvFit fit_banded_cv(const DataMatrix& data, const BandingConfig& cfg) {
  cfg.validate(data.n(), data.p());
  BandedCvFit out;
  if (cfg.k_grid.size() == 1) {
    out.k = cfg.k_grid.front();
  } else {
    const auto cv = kfold_cv<Index>(
        data, cfg.folds, cfg.k_grid,
        [](const DataMatrix& tr, const Index& k) { return fit_banded(tr, k); },
        gaussian_nll, cfg.seed);
    out.k = cv.best;
    out.cv_loss = cv.mean_loss;
  }
  out.estimate = fit_banded(data, out.k);
  return out;
}

DenseSymmetric sample_covariance(const DataMatrix& data) {
  const Index n = data.n();
  if (n == 0) throw DomainError("sample_covariance: no observations");
  const Matrix c = data.centered().values();
  Matrix s = Matrix::Zero(data.p(), data.p());
  s.selfadjointView<Eigen::Lower>().rankUpdate(c.transpose(), 1.0 / static_cast<double>(n));
  return DenseSymmetric::from_lower(std::move(s));
}

}  // namespace bandprec
