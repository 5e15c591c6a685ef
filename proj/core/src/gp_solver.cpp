#include "bandprec/gp_solver.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "bandprec/errors.hpp"
#include "bandprec/linalg.hpp"

namespace bandprec {

void SolverConfig::validate() const {
  std::vector<std::string> bad;
  if (!(M >= 0.0) || !std::isfinite(M)) bad.push_back("M must be >= 0");
  if (step && !(*step > 0.0)) bad.push_back("step must be > 0");
  if (!(step_safety > 0.0 && step_safety < 1.0)) bad.push_back("step_safety must lie in (0,1)");
  if (max_outer < 1) bad.push_back("max_outer must be >= 1");
  if (max_inner < 1) bad.push_back("max_inner must be >= 1");
  if (!(tol > 0.0)) bad.push_back("tol must be > 0");
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

namespace {

void check_dims(const DataMatrix& data, const BandedCholesky& t) {
  if (data.p() != t.dim()) {
    throw std::invalid_argument("data has " + std::to_string(data.p()) +
                                " columns, factor has dimension " +
                                std::to_string(t.dim()));
  }
}

// -2 * colwise sum of y_k * r_{k+j} for k = 0..p-j-1.
Vector band_gradient(const Matrix& y, const Matrix& r, Index j) {
  const Index len = y.cols() - j;
  return -2.0 * (y.leftCols(len).array() * r.rightCols(len).array())
                    .colwise()
                    .sum()
                    .transpose();
}

double ls_from_residuals(const Matrix& r) {
  return r.cols() <= 1 ? 0.0 : r.rightCols(r.cols() - 1).squaredNorm();
}

}  // namespace

BandGradient gradient_ls(const DataMatrix& data, const BandedCholesky& t) {
  check_dims(data, t);
  const Matrix r = residuals(data, t);
  BandGradient g(t.dim());
  for (Index j = 1; j < t.dim(); ++j) g.band(j) = band_gradient(data.values(), r, j);
  return g;
}

double max_stepsize(const DataMatrix& data) {
  // The Gram blocks are nested leading submatrices of Y'Y, so by interlacing
  // the largest block (predictors of y_p) carries the largest eigenvalue.
  const Index p = data.p();
  if (p < 2) throw DomainError("max_stepsize: need p >= 2");
  const Matrix g = data.gram();
  const double lmax = linalg::max_eigenvalue_psd(g.topLeftCorner(p - 1, p - 1));
  if (!(lmax > 0.0)) throw DomainError("max_stepsize: Gram matrix is zero");
  return 1.0 / lmax;
}

double max_stepsize_restricted(const DataMatrix& data,
                               const std::vector<bool>& free_band) {
  const Index p = data.p();
  if (static_cast<Index>(free_band.size()) != p) {
    throw std::invalid_argument("max_stepsize_restricted: mask must have p entries");
  }
  const Matrix g = data.gram();
  double lmax = 0.0;
  std::vector<Index> cols;
  for (Index t = 1; t < p; ++t) {
    cols.clear();
    for (Index j = 1; j <= t; ++j) {
      if (free_band[j]) cols.push_back(t - j);
    }
    if (cols.empty()) continue;
    lmax = std::max(lmax, linalg::max_eigenvalue_psd(linalg::principal_submatrix(g, cols)));
  }
  if (!(lmax > 0.0)) return std::numeric_limits<double>::infinity();
  return 1.0 / lmax;
}

Vector project_block_norms(const Vector& b_norms, const BlockWeights& w, double M) {
  if (!(M >= 0.0)) throw DomainError("project_block_norms: M must be >= 0");
  if (b_norms.size() != w.w.size()) {
    throw std::invalid_argument("project_block_norms: size mismatch");
  }
  const Index s = b_norms.size();
  for (Index j = 0; j < s; ++j) {
    if (!(b_norms[j] >= 0.0) || !(w.w[j] >= 0.0)) {
      throw DomainError("project_block_norms: norms and weights must be >= 0");
    }
  }
  Vector out = b_norms;
  std::vector<Index> tau;
  double load = 0.0;
  for (Index j = 0; j < s; ++j) {
    if (w.w[j] > 0.0) {
      tau.push_back(j);
      load += w.w[j] * b_norms[j];
    }
  }
  if (load <= M) return out;
  if (M == 0.0) {
    for (Index j : tau) out[j] = 0.0;
    return out;
  }
  // Project onto the hyperplane restricted to tau, drop non-positive
  // coordinates, repeat. Each pass removes at least one index.
  while (!tau.empty()) {
    double wb = 0.0, ww = 0.0;
    for (Index j : tau) {
      wb += w.w[j] * b_norms[j];
      ww += w.w[j] * w.w[j];
    }
    const double shift = (M - wb) / ww;
    std::vector<Index> keep;
    for (Index j : tau) {
      const double mj = b_norms[j] + shift * w.w[j];
      out[j] = mj;
      if (mj > 0.0) keep.push_back(j);
    }
    if (keep.size() == tau.size()) break;
    for (Index j : tau) {
      if (out[j] <= 0.0) out[j] = 0.0;
    }
    tau = std::move(keep);
  }
  return out;
}

std::vector<bool> free_bands(const BlockWeights& w, const BlockPartition& part,
                             double M) {
  std::vector<bool> mask(static_cast<std::size_t>(part.dim()), false);
  for (Index j = 1; j < part.dim(); ++j) {
    mask[j] = M > 0.0 || w.w[part.block_of_band(j)] == 0.0;
  }
  return mask;
}

namespace {

// Applies the projection step to `b` in place: rescales each block to the
// projected norm M_b (zero when ||b_(b)|| = 0).
void project_factor(BandedCholesky& b, const BlockWeights& w,
                    const BlockPartition& part, double M) {
  const Vector norms = block_norms(b, part);
  const Vector target = project_block_norms(norms, w, M);
  for (Index blk = 0; blk < part.block_count(); ++blk) {
    if (target[blk] == norms[blk]) continue;
    const double scale = norms[blk] > 0.0 ? target[blk] / norms[blk] : 0.0;
    const auto [first, last] = part.bands_of(blk);
    for (Index j = first; j <= last; ++j) {
      if (scale == 0.0) {
        b.band(j).setZero();
      } else {
        b.band(j) *= scale;
      }
    }
  }
}

std::vector<Index> active_blocks(const BandedCholesky& t, const BlockPartition& part) {
  const Vector norms = block_norms(t, part);
  std::vector<Index> out;
  for (Index b = 0; b < norms.size(); ++b) {
    if (norms[b] > 0.0) out.push_back(b);
  }
  return out;
}

}  // namespace

LinearizedSolution solve_linearized(const DataMatrix& data,
                                    const BandedCholesky& t0,
                                    const BlockWeights& w,
                                    const BlockPartition& part,
                                    const SolverConfig& cfg) {
  cfg.validate();
  check_dims(data, t0);
  if (part.dim() != t0.dim() || w.w.size() != part.block_count()) {
    throw std::invalid_argument("solve_linearized: partition/weights mismatch");
  }
  const Index p = t0.dim();
  const Matrix& y = data.values();
  const std::vector<bool> mask = free_bands(w, part, cfg.M);

  SolveReport report;
  if (cfg.step) {
    report.step = *cfg.step;
  } else {
    bool any_pinned = false;
    for (Index j = 1; j < p; ++j) any_pinned = any_pinned || !mask[j];
    // Pinned coordinates never move, so the relevant Lipschitz constant is
    // that of the gradient restricted to the free ones.
    const double bound = any_pinned ? max_stepsize_restricted(data, mask) : max_stepsize(data);
    report.step = std::isfinite(bound) ? cfg.step_safety * bound : 1.0;
  }
  const double s = report.step;

  BandedCholesky phi = t0;
  for (Index j = 1; j < p; ++j) {
    if (!mask[j]) phi.band(j).setZero();
  }
  if (cfg.M > 0.0) project_factor(phi, w, part, cfg.M);

  Matrix r = residuals(data, phi);
  double ls_prev = ls_from_residuals(r);

  BandedCholesky next = phi;
  for (int it = 1; it <= cfg.max_inner; ++it) {
    for (Index j = 1; j < p; ++j) {
      if (!mask[j]) continue;
      next.band(j) = phi.band(j) - s * band_gradient(y, r, j);
    }
    if (cfg.M > 0.0) project_factor(next, w, part, cfg.M);

    double change = 0.0;
    for (Index j = 1; j < p; ++j) {
      if (!mask[j]) continue;
      const Index len = p - j;
      if (len > 0) change = std::max(change, (next.band(j) - phi.band(j)).cwiseAbs().maxCoeff());
    }
    std::swap(phi, next);
    r = residuals(data, phi);
    const double ls = ls_from_residuals(r);
    const double rise = ls - ls_prev;
    if (rise > 1e-9 * std::max(1.0, ls_prev)) {
      ++report.ls_increases;
      report.max_ls_increase = std::max(report.max_ls_increase, rise);
    }
    assert(!(rise > 1e-9 * std::max(1.0, ls_prev)) && "L_n increased in projected gradient step");
    ls_prev = ls;
    report.iterations_used = it;
    if (change <= cfg.tol) {
      report.converged = true;
      break;
    }
  }
  report.final_objective = ls_prev;
  report.active_blocks = active_blocks(phi, part);
  return {std::move(phi), std::move(report)};
}

BlockPenalizedFit fit_block_penalized(const DataMatrix& data,
                                      const BandedCholesky& init,
                                      const ScadParams& params,
                                      const BlockPartition& part,
                                      const SolverConfig& cfg) {
  params.validate();
  cfg.validate();
  check_dims(data, init);
  const Index n = data.n();

  BandedCholesky phi = init;
  SolveReport total;
  total.outer_objectives.push_back(objective_penalized(data, phi, params, part));
  BlockWeights weights{Vector::Zero(part.block_count())};
  int inner_total = 0;

  for (int k = 0; k < cfg.max_outer; ++k) {
    weights = params.lambda > 0.0 ? block_weights(phi, params, part, n)
                                  : BlockWeights{Vector::Zero(part.block_count())};
    auto sol = solve_linearized(data, phi, weights, part, cfg);
    inner_total += sol.report.iterations_used;

    const double q = objective_penalized(data, sol.factor, params, part);
    const double q_prev = total.outer_objectives.back();
    if (q - q_prev > 1e-9 * std::max(1.0, std::abs(q_prev))) ++total.outer_increases;
    total.outer_objectives.push_back(q);

    double change = 0.0;
    bool same_support = true;
    for (Index j = 1; j < phi.dim(); ++j) {
      same_support = same_support && (phi.band_is_zero(j) == sol.factor.band_is_zero(j));
      if (phi.dim() - j > 0) {
        change = std::max(change, (phi.band(j) - sol.factor.band(j)).cwiseAbs().maxCoeff());
      }
    }

    total.ls_increases += sol.report.ls_increases;
    total.max_ls_increase = std::max(total.max_ls_increase, sol.report.max_ls_increase);
    total.step = sol.report.step;
    total.converged = sol.report.converged;
    total.final_objective = sol.report.final_objective;
    total.active_blocks = sol.report.active_blocks;
    total.outer_steps = k + 1;
    phi = std::move(sol.factor);
    if (same_support && change <= cfg.tol) break;
  }
  total.iterations_used = inner_total;

  DiagonalVariances d = residual_variances(data, phi);
  return {PrecisionEstimate(std::move(phi), std::move(d)), std::move(total), std::move(weights)};
}

BandedCholesky restricted_least_squares(const DataMatrix& data,
                                        const std::vector<bool>& free_band) {
  const Index p = data.p();
  if (static_cast<Index>(free_band.size()) != p) {
    throw std::invalid_argument("restricted_least_squares: mask must have p entries");
  }
  const Matrix g = data.gram();
  BandedCholesky out(p);
  std::vector<Index> cols;
  for (Index t = 1; t < p; ++t) {
    cols.clear();
    for (Index j = 1; j <= t; ++j) {
      if (free_band[j]) cols.push_back(t - j);
    }
    if (cols.empty()) continue;
    Vector rhs(static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) rhs[static_cast<Index>(c)] = g(cols[c], t);
    const auto fit = linalg::solve_spd_with_jitter(linalg::principal_submatrix(g, cols), rhs);
    for (std::size_t c = 0; c < cols.size(); ++c) out.set_phi(t, cols[c], fit.x[static_cast<Index>(c)]);
  }
  return out;
}

KktReport check_kkt(const DataMatrix& data, const BandedCholesky& solution,
                    const BlockWeights& w, double lambda,
                    const BlockPartition& part, double tol) {
  check_dims(data, solution);
  const Index p = solution.dim();
  const Matrix& y = data.values();
  const Matrix r = residuals(data, solution);
  const Vector norms = block_norms(solution, part);
  Vector col_norm(p);
  for (Index k = 0; k < p; ++k) col_norm[k] = y.col(k).norm();

  KktReport rep;
  bool eq_ok = true;
  bool ineq_ok = true;
  for (Index j = 1; j < p; ++j) {
    const Index b = part.block_of_band(j);
    const double len = static_cast<double>(part.length(b));
    const Vector g = -band_gradient(y, r, j);  // 2 sum_i y_{i,t-j} r_it
    for (Index k = 0; k < p - j; ++k) {
      const Index t = k + j;
      const double scale = 2.0 * col_norm[k] * col_norm[t];
      const double denom = scale > 0.0 ? scale : 1.0;
      if (norms[b] > 0.0) {
        const double target = lambda * w.w[b] * solution.phi(t, k) / norms[b];
        const double v = std::abs(g[k] - target) / denom;
        rep.max_equality_violation = std::max(rep.max_equality_violation, v);
        eq_ok = eq_ok && v <= tol;
        ++rep.equality_entries;
      } else {
        const double bound = lambda * w.w[b] / std::sqrt(len);
        const double a = std::abs(g[k]);
        double ratio;
        if (bound > 0.0) {
          ratio = a / bound;
        } else {
          ratio = a > tol * denom ? std::numeric_limits<double>::infinity() : 0.0;
        }
        rep.max_inequality_ratio = std::max(rep.max_inequality_ratio, ratio);
        ineq_ok = ineq_ok && a <= bound + tol * denom;
        ++rep.inequality_entries;

        double mu;
        if (w.w[b] > 0.0) {
          mu = std::max(0.0, a - tol * denom) * std::sqrt(len) / w.w[b];
        } else {
          mu = a > tol * denom ? std::numeric_limits<double>::infinity() : 0.0;
        }
        rep.required_multiplier = std::max(rep.required_multiplier, mu);
      }
    }
  }
  rep.satisfied = eq_ok && ineq_ok;
  return rep;
}

}  // namespace bandprec
