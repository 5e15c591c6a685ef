#include "bandprec/pipeline.hpp"

#include <string>

#include "bandprec/errors.hpp"

namespace bandprec {

void BpOptions::validate() const {
  std::vector<std::string> bad;
  try {
    initial.validate();
  } catch (const ValidationError& e) {
    bad.insert(bad.end(), e.fields().begin(), e.fields().end());
  }
  try {
    solver.validate();
  } catch (const ValidationError& e) {
    bad.insert(bad.end(), e.fields().begin(), e.fields().end());
  }
  if (!(scad.a > 2.0)) bad.push_back("a: must exceed 2");
  if (lambda && !(*lambda >= 0.0)) bad.push_back("lambda: must be non-negative");
  for (double l : lambda_grid) {
    if (!(l >= 0.0)) {
      bad.push_back("lambda_grid: values must be non-negative");
      break;
    }
  }
  if (lambda_grid.empty() && grid_size < 1) bad.push_back("grid_size: must be >= 1");
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

BpFit estimate_bp(const DataMatrix& data, const BpOptions& opts) {
  opts.validate();
  const Index p = data.p();
  if (p < 2) throw DomainError("estimate_bp: need at least two variables");

  BpFit fit;
  fit.partition = opts.stack_far_bands ? BlockPartition::stacked(p) : BlockPartition::unstacked(p);
  const InitialEstimate init = initial_ols(data, opts.initial);
  fit.initial = init.factor;
  fit.jittered_windows = init.jittered_windows;
  fit.smoothed = opts.initial.smoothing_bandwidth ? smooth_bands(init.factor, opts.initial)
                                                  : init.factor;

  ScadParams params = opts.scad;
  if (opts.lambda) {
    params.lambda = *opts.lambda;
  } else {
    std::vector<double> grid = opts.lambda_grid;
    if (grid.empty()) {
      grid = default_lambda_grid(fit.smoothed, fit.partition, params.a, opts.grid_size);
    }
    GcvOptions gopt;
    gopt.residual = opts.gcv_residual;
    gopt.solver = opts.solver;
    fit.gcv = select_lambda(data, fit.smoothed, grid, fit.partition, params, gopt);
    params.lambda = fit.gcv->best_lambda;
  }
  fit.lambda = params.lambda;

  BlockPenalizedFit bp = fit_block_penalized(data, fit.smoothed, params, fit.partition, opts.solver);
  fit.estimate = std::move(bp.estimate);
  fit.report = std::move(bp.report);
  fit.weights = std::move(bp.weights);
  if (opts.check_kkt && params.lambda > 0.0) {
    fit.kkt = check_kkt(data, fit.estimate.factor, fit.weights, params.lambda, fit.partition);
  }
  return fit;
}

}  // namespace bandprec
