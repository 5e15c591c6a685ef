#pragma once

#include <optional>
#include <vector>

#include "bandprec/cholesky_core.hpp"
#include "bandprec/data.hpp"
#include "bandprec/penalty.hpp"

namespace bandprec {

struct SolverConfig {
  /// Radius of the weighted block-norm ball sum_b w_b ||block b|| <= M.
  /// M = 0 pins every positively weighted block to zero.
  double M = 0.0;
  /// Gradient stepsize; computed from the Gram spectrum when unset.
  std::optional<double> step;
  double step_safety = 0.95;
  /// Linearization steps; 1 gives the one-step estimator.
  int max_outer = 1;
  int max_inner = 5000;
  /// Inner convergence threshold on max |phi^(t) - phi^(t-1)|.
  double tol = 1e-6;

  void validate() const;
};

struct SolveReport {
  int iterations_used = 0;
  /// L_n at the returned iterate.
  double final_objective = 0.0;
  bool converged = false;
  /// Blocks with nonzero norm in the returned factor.
  std::vector<Index> active_blocks;
  double step = 0.0;
  /// Inner iterations where L_n rose by more than 1e-9 (relative).
  Index ls_increases = 0;
  double max_ls_increase = 0.0;
  /// Q_n at phi^(0), phi^(1), ... (filled by fit_block_penalized).
  std::vector<double> outer_objectives;
  /// Outer steps where Q_n rose by more than 1e-9 (relative).
  Index outer_increases = 0;
  int outer_steps = 0;
};

/// Gradient of L_n laid out like the factor: entry (t, k) is
/// -2 sum_i y_ik (y_it - y_i[t]' phi_t).
using BandGradient = BandedCholesky;
BandGradient gradient_ls(const DataMatrix& data, const BandedCholesky& t);

/// 1 / lambda_max(S_Y), S_Y = blockdiag_j(sum_i y_i[j] y_i[j]').
double max_stepsize(const DataMatrix& data);

/// Same bound with S_Y restricted to coefficients of bands where
/// free_band[j] is true (index 0 unused).
double max_stepsize_restricted(const DataMatrix& data,
                               const std::vector<bool>& free_band);

/// Solves min sum_{w_b>0} (b_b - M_b)^2 s.t. sum w_b M_b <= M, M_b >= 0.
/// Zero-weight entries pass through unchanged.
Vector project_block_norms(const Vector& b_norms, const BlockWeights& w, double M);

/// Bands whose block is not pinned at zero: with M = 0 these are the blocks
/// with w_b = 0; with M > 0 every band is free.
std::vector<bool> free_bands(const BlockWeights& w, const BlockPartition& part,
                             double M);

struct LinearizedSolution {
  BandedCholesky factor;
  SolveReport report;
};

/// Gradient projection for min L_n s.t. sum_b w_b ||block b|| <= M,
/// started from the projection of t0.
LinearizedSolution solve_linearized(const DataMatrix& data,
                                    const BandedCholesky& t0,
                                    const BlockWeights& w,
                                    const BlockPartition& part,
                                    const SolverConfig& cfg);

struct BlockPenalizedFit {
  PrecisionEstimate estimate;
  SolveReport report;
  /// Weights of the final linearization step.
  BlockWeights weights;
};

/// Iterates the linearized problem max_outer times (stopping early once the
/// support and coefficients settle), then estimates D from the residuals.
BlockPenalizedFit fit_block_penalized(const DataMatrix& data,
                                      const BandedCholesky& init,
                                      const ScadParams& params,
                                      const BlockPartition& part,
                                      const SolverConfig& cfg);

/// Exact least squares with every band outside `free_band` held at zero.
BandedCholesky restricted_least_squares(const DataMatrix& data,
                                        const std::vector<bool>& free_band);

struct KktReport {
  /// Both conditions below hold.
  bool satisfied = false;
  /// max over nonzero blocks of |2 sum y r - lambda w phi / ||block|||,
  /// divided by 2 ||y_k|| ||y_t||.
  double max_equality_violation = 0.0;
  /// max over zero blocks of |2 sum y r| / (lambda w (len)^{-1/2}).
  double max_inequality_ratio = 0.0;
  Index equality_entries = 0;
  Index inequality_entries = 0;
  /// Smallest multiplier mu for which the inequality holds with mu in place
  /// of lambda (the constrained problem's own KKT); infinity if some zero
  /// block has w = 0 and a nonzero correlation.
  double required_multiplier = 0.0;
};

/// Checks the first-order conditions of the linearized objective:
/// equality 2 sum_i y_{i,t-j} r_it = lambda w_b phi_{t,t-j} / ||block b||
/// on nonzero blocks and |2 sum_i y_{i,t-j} r_it| <= lambda w_b len_b^{-1/2}
/// on zero blocks, with scaled tolerance `tol`.
KktReport check_kkt(const DataMatrix& data, const BandedCholesky& solution,
                    const BlockWeights& w, double lambda,
                    const BlockPartition& part, double tol = 1e-4);

}  // namespace bandprec
