#pragma once

#include <optional>
#include <vector>

#include "bandprec/cholesky_core.hpp"
#include "bandprec/data.hpp"
#include "bandprec/gp_solver.hpp"
#include "bandprec/initial_estimator.hpp"
#include "bandprec/penalty.hpp"
#include "bandprec/tuning.hpp"

namespace bandprec {

struct BpOptions {
  InitialConfig initial;
  /// `scad.lambda` is ignored unless `lambda` is set.
  ScadParams scad;
  /// Fixed lambda; skips GCV when set.
  std::optional<double> lambda;
  /// GCV grid; empty means default_lambda_grid with `grid_size` points.
  std::vector<double> lambda_grid;
  int grid_size = 20;
  /// Stack the far bands into one block (off: one block per band).
  bool stack_far_bands = true;
  SolverConfig solver;
  GcvResidual gcv_residual = GcvResidual::FittedAtLambda;
  bool check_kkt = true;

  void validate() const;
};

struct BpFit {
  PrecisionEstimate estimate;
  BandedCholesky initial;
  BandedCholesky smoothed;
  BlockPartition partition;
  double lambda = 0.0;
  std::optional<GcvResult> gcv;
  SolveReport report;
  BlockWeights weights;
  std::optional<KktReport> kkt;
  Index jittered_windows = 0;
};

/// Windowed OLS, band smoothing, GCV over lambda, then the block-penalized
/// one-step fit and variance estimation.
BpFit estimate_bp(const DataMatrix& data, const BpOptions& opts = {});

}  // namespace bandprec
