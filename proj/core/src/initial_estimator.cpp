#include "bandprec/initial_estimator.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "bandprec/errors.hpp"
#include "bandprec/linalg.hpp"

namespace bandprec {

void InitialConfig::validate() const {
  std::vector<std::string> bad;
  if (!(gamma > 0.0 && gamma < 1.0)) bad.push_back("gamma must lie in (0,1)");
  if (smoothing_bandwidth &&
      !(*smoothing_bandwidth > 0.0 && *smoothing_bandwidth <= 1.0)) {
    bad.push_back("smoothing_bandwidth must lie in (0,1]");
  }
  if (min_smooth_length < 1) bad.push_back("min_smooth_length must be >= 1");
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

Index window_start(Index i, Index n, double gamma) {
  const double raw = std::floor(static_cast<double>(i) - gamma * static_cast<double>(n));
  return std::max<Index>(static_cast<Index>(raw), 1);
}

namespace {

// Regresses column `target` on the contiguous 0-based columns [first, last).
linalg::SpdSolve regress_window(const Matrix& gram, Index target, Index first,
                                Index last) {
  const Index k = last - first;
  const Matrix g = gram.block(first, first, k, k);
  const Vector rhs = gram.block(first, target, k, 1);
  return linalg::solve_spd_with_jitter(g, rhs);
}

}  // namespace

InitialEstimate initial_ols(const DataMatrix& data, const InitialConfig& cfg) {
  cfg.validate();
  const Index n = data.n();
  const Index p = data.p();
  if (n < 2) throw DomainError("initial_ols: need n >= 2");
  if (p < 2) throw DomainError("initial_ols: need p >= 2");

  const Matrix gram = data.gram();
  const Index batch = std::max<Index>(
      static_cast<Index>(std::floor(cfg.gamma * static_cast<double>(n))), 1);

  InitialEstimate out{BandedCholesky(p), 0};
  // Rows are independent; each writes only its own coefficients.
  for (Index i = 2; i <= p; ++i) {
    const Index row = i - 1;
    Index first = window_start(i, n, cfg.gamma) - 1;
    Index last = row;
    while (true) {
      const auto fit = regress_window(gram, row, first, last);
      if (fit.jittered) ++out.jittered_windows;
      for (Index k = first; k < last; ++k) out.factor.set_phi(row, k, fit.x[k - first]);
      if (!cfg.continue_beyond_window || first == 0) break;
      last = first;
      first = std::max<Index>(last - batch, 0);
    }
  }
  return out;
}

Vector local_linear_smooth(const Vector& x, const Vector& y, double h) {
  const Index len = x.size();
  Vector out(len);
  for (Index k = 0; k < len; ++k) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
    for (Index r = 0; r < len; ++r) {
      const double d = x[r] - x[k];
      const double u = d / h;
      if (std::abs(u) >= 1.0) continue;
      const double w = 0.75 * (1.0 - u * u);
      s0 += w;
      s1 += w * d;
      s2 += w * d * d;
      t0 += w * y[r];
      t1 += w * d * y[r];
    }
    const double det = s0 * s2 - s1 * s1;
    if (s2 > 0.0 && det > 1e-12 * s0 * s2) {
      out[k] = (s2 * t0 - s1 * t1) / det;
    } else {
      out[k] = t0 / s0;
    }
  }
  return out;
}

BandedCholesky smooth_bands(const BandedCholesky& t, const InitialConfig& cfg) {
  cfg.validate();
  if (!cfg.smoothing_bandwidth) {
    throw DomainError("smooth_bands: smoothing_bandwidth is not set");
  }
  const double h = *cfg.smoothing_bandwidth;
  const Index p = t.dim();
  BandedCholesky out = t;
  for (Index j = 1; j < p; ++j) {
    const Index len = p - j;
    if (len < cfg.min_smooth_length || t.band_is_zero(j)) continue;
    Vector x(len);
    for (Index r = 0; r < len; ++r) {
      x[r] = static_cast<double>(j + r + 1) / static_cast<double>(p);
    }
    out.band(j) = local_linear_smooth(x, t.band(j), h);
  }
  return out;
}

}  // namespace bandprec
