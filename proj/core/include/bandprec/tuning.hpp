#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "bandprec/cholesky_core.hpp"
#include "bandprec/data.hpp"
#include "bandprec/errors.hpp"
#include "bandprec/gp_solver.hpp"
#include "bandprec/penalty.hpp"

namespace bandprec {

/// Which coefficients enter the residual sum of squares of each GCV term.
enum class GcvResidual {
  /// The one-step fit at the candidate lambda (linearized at the smoothed
  /// initial factor). The trace term is the same in both modes.
  FittedAtLambda,
  /// The smoothed initial coefficients themselves, independent of lambda.
  SmoothedInitial,
};

struct GcvOptions {
  GcvResidual residual = GcvResidual::FittedAtLambda;
  /// Used for the fitted residuals; with M = 0 the fit is computed in
  /// closed form as restricted least squares.
  SolverConfig solver;
};

struct GcvScore {
  double value = 0.0;
  /// Terms dropped because n - trace <= 0.
  Index excluded_terms = 0;
};

/// GCV(lambda) = sum_{j=2..p} n RSS_j / (n - tr[X_j (X_j'X_j + lambda W_j)^{-1} X_j'])^2.
/// W_j is diagonal with entry w_b / ||block b of smoothed_init|| for the
/// predictor at lag t - k in block b; columns whose block has zero norm are
/// dropped (infinite ridge).
GcvScore gcv_score(const DataMatrix& data, const BandedCholesky& smoothed_init,
                   const ScadParams& params, const BlockPartition& part,
                   const GcvOptions& opts = {});

struct GcvResult {
  std::vector<double> lambda_grid;
  std::vector<double> gcv_values;
  std::vector<Index> excluded_terms;
  double best_lambda = 0.0;
};

/// Evaluates gcv_score on each grid point; the minimizer wins, ties go to
/// the smaller lambda. `params.lambda` is ignored.
GcvResult select_lambda(const DataMatrix& data, const BandedCholesky& smoothed_init,
                        const std::vector<double>& grid, const BlockPartition& part,
                        const ScadParams& params = {}, const GcvOptions& opts = {});

/// `count` log-spaced values on [lambda_max / 1000, lambda_max], where
/// lambda_max is (just above) the smallest lambda giving every block of
/// `smoothed_init` a positive weight.
std::vector<double> default_lambda_grid(const BandedCholesky& smoothed_init,
                                        const BlockPartition& part, double a,
                                        int count = 20);

/// Row indices of each fold: a seeded shuffle of 0..n-1 cut into K
/// contiguous pieces.
std::vector<std::vector<Index>> kfold_partition(Index n, int k, std::uint64_t seed);

/// tr(Omega S_val) - log|Omega| with S_val the (uncentered) second-moment
/// matrix of the validation rows.
double gaussian_nll(const PrecisionEstimate& est, const DataMatrix& validation);

template <class H>
struct CvResult {
  H best;
  std::size_t best_index = 0;
  std::vector<double> mean_loss;
};

/// K-fold cross-validation over `candidates`. A fit or score that throws
/// counts as +infinity for that fold. Ties go to the earliest candidate.
template <class H>
CvResult<H> kfold_cv(
    const DataMatrix& data, int k, const std::vector<H>& candidates,
    const std::function<PrecisionEstimate(const DataMatrix&, const H&)>& fit,
    const std::function<double(const PrecisionEstimate&, const DataMatrix&)>& score,
    std::uint64_t seed) {
  if (candidates.empty()) throw DomainError("kfold_cv: empty candidate set");
  if (k < 2 || k > data.n()) throw DomainError("kfold_cv: need 2 <= K <= n");
  const auto folds = kfold_partition(data.n(), k, seed);

  std::vector<double> loss(candidates.size(), 0.0);
  for (int f = 0; f < k; ++f) {
    std::vector<Index> train;
    for (int g = 0; g < k; ++g) {
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    }
    const DataMatrix tr = data.rows(train);
    const DataMatrix va = data.rows(folds[f]);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      double l;
      try {
        l = score(fit(tr, candidates[c]), va);
      } catch (const std::exception&) {
        l = std::numeric_limits<double>::infinity();
      }
      loss[c] += l / static_cast<double>(k);
    }
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    if (loss[c] < loss[best]) best = c;
  }
  return {candidates[best], best, std::move(loss)};
}

}  // namespace bandprec
