#include "bandprec/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "bandprec/linalg.hpp"

namespace bandprec {

namespace {

BandedCholesky fitted_at_lambda(const DataMatrix& data, const BandedCholesky& smoothed,
                                const ScadParams& params, const BlockPartition& part,
                                const GcvOptions& opts) {
  const BlockWeights w = params.lambda > 0.0
                             ? block_weights(smoothed, params, part, data.n())
                             : BlockWeights{Vector::Zero(part.block_count())};
  if (opts.solver.M == 0.0) {
    return restricted_least_squares(data, free_bands(w, part, 0.0));
  }
  return solve_linearized(data, smoothed, w, part, opts.solver).factor;
}

}  // namespace

GcvScore gcv_score(const DataMatrix& data, const BandedCholesky& smoothed_init,
                   const ScadParams& params, const BlockPartition& part,
                   const GcvOptions& opts) {
  params.validate();
  const Index n = data.n();
  const Index p = data.p();
  if (smoothed_init.dim() != p || part.dim() != p) {
    throw std::invalid_argument("gcv_score: dimension mismatch");
  }
  const double nd = static_cast<double>(n);
  const Vector norms = block_norms(smoothed_init, part);

  // Ridge entry lambda * w_b / ||block b|| = n p'_{lambda_b}(theta_b) / theta_b.
  Vector ridge = Vector::Zero(part.block_count());
  if (params.lambda > 0.0) {
    const BlockWeights w = block_weights(smoothed_init, params, part, n);
    for (Index b = 0; b < ridge.size(); ++b) {
      if (norms[b] > 0.0) ridge[b] = params.lambda * w.w[b] / norms[b];
    }
  }

  const BandedCholesky coef = opts.residual == GcvResidual::SmoothedInitial
                                  ? smoothed_init
                                  : fitted_at_lambda(data, smoothed_init, params, part, opts);
  const Matrix r = residuals(data, coef);
  const Matrix gram = data.gram();

  GcvScore out;
  std::vector<Index> cols;
  for (Index t = 1; t < p; ++t) {
    cols.clear();
    for (Index k = 0; k < t; ++k) {
      if (norms[part.block_of_band(t - k)] > 0.0) cols.push_back(k);
    }
    double trace = 0.0;
    if (!cols.empty()) {
      const Matrix g = linalg::principal_submatrix(gram, cols);
      Matrix a = g;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        a(static_cast<Index>(c), static_cast<Index>(c)) += ridge[part.block_of_band(t - cols[c])];
      }
      const Eigen::LDLT<Matrix> ldlt(a);
      trace = ldlt.solve(g).trace();
    }
    const double denom = nd - trace;
    if (!(denom > 0.0)) {
      ++out.excluded_terms;
      continue;
    }
    out.value += nd * r.col(t).squaredNorm() / (denom * denom);
  }
  return out;
}

GcvResult select_lambda(const DataMatrix& data, const BandedCholesky& smoothed_init,
                        const std::vector<double>& grid, const BlockPartition& part,
                        const ScadParams& params, const GcvOptions& opts) {
  if (grid.empty()) throw DomainError("select_lambda: empty lambda grid");
  GcvResult res;
  res.lambda_grid = grid;
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ScadParams pi = params;
    pi.lambda = grid[i];
    const GcvScore s = gcv_score(data, smoothed_init, pi, part, opts);
    res.gcv_values.push_back(s.value);
    res.excluded_terms.push_back(s.excluded_terms);
    if (i == 0) continue;
    const double v = s.value;
    const double bv = res.gcv_values[best];
    if (v < bv || (v == bv && grid[i] < grid[best])) best = i;
  }
  res.best_lambda = grid[best];
  return res;
}

std::vector<double> default_lambda_grid(const BandedCholesky& smoothed_init,
                                        const BlockPartition& part, double a,
                                        int count) {
  if (count < 1) throw DomainError("default_lambda_grid: count must be >= 1");
  const Vector norms = block_norms(smoothed_init, part);
  double lmax = 0.0;
  for (Index b = 0; b < norms.size(); ++b) {
    lmax = std::max(lmax, norms[b] / (a * std::sqrt(static_cast<double>(part.length(b)))));
  }
  if (!(lmax > 0.0)) throw DomainError("default_lambda_grid: initial factor is zero");
  lmax *= 1.0 + 1e-6;
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = lmax;
    return grid;
  }
  const double lo = std::log(lmax / 1000.0);
  const double hi = std::log(lmax);
  for (int i = 0; i < count; ++i) {
    grid[static_cast<std::size_t>(i)] = std::exp(lo + (hi - lo) * i / (count - 1));
  }
  grid.back() = lmax;
  return grid;
}

std::vector<std::vector<Index>> kfold_partition(Index n, int k, std::uint64_t seed) {
  if (k < 2 || k > n) throw DomainError("kfold_partition: need 2 <= K <= n");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<Index>> folds(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    const Index lo = n * f / k;
    const Index hi = n * (f + 1) / k;
    folds[static_cast<std::size_t>(f)].assign(perm.begin() + lo, perm.begin() + hi);
  }
  return folds;
}

double gaussian_nll(const PrecisionEstimate& est, const DataMatrix& validation) {
  if (validation.p() != est.dim()) {
    throw std::invalid_argument("gaussian_nll: dimension mismatch");
  }
  if (validation.n() == 0) throw DomainError("gaussian_nll: empty validation set");
  // y' T' D^{-1} T y = sum_j (T y)_j^2 / sigma_j^2, and (T y)_j is the
  // j-th residual column.
  const Matrix r = residuals(validation, est.factor);
  const Vector inv = est.variances.values().cwiseInverse();
  double quad = 0.0;
  for (Index j = 0; j < r.cols(); ++j) quad += r.col(j).squaredNorm() * inv[j];
  quad /= static_cast<double>(validation.n());
  return quad + est.log_det_covariance();
}

}  // namespace bandprec
