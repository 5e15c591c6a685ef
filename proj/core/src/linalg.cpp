#include "bandprec/linalg.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "bandprec/errors.hpp"

namespace bandprec::linalg {

SpdSolve solve_spd_with_jitter(const Matrix& g, const Vector& rhs) {
  const Index k = g.rows();
  if (k == 0) return {Vector(0), false};
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() == Eigen::Success && llt.rcond() > 1e-13) {
    return {llt.solve(rhs), false};
  }
  const double trace = g.trace();
  const double scale = trace > 0.0 ? trace / static_cast<double>(k) : 1.0;
  Matrix jittered = g;
  jittered.diagonal().array() += 1e-10 * scale;
  Eigen::LDLT<Matrix> ldlt(jittered);
  return {ldlt.solve(rhs), true};
}

double max_eigenvalue_psd(const Matrix& g) {
  const Index k = g.rows();
  if (k == 0) return 0.0;
  if (k <= 8) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
      throw NumericError("max_eigenvalue_psd: eigensolver failed", 0);
    }
    return std::max(0.0, es.eigenvalues()[k - 1]);
  }
  Vector x = Vector::Ones(k) / std::sqrt(static_cast<double>(k));
  double prev = 0.0;
  constexpr int kMaxIter = 100000;
  for (int it = 1; it <= kMaxIter; ++it) {
    Vector y = g * x;
    const double est = x.dot(y);
    const double yn = y.norm();
    if (yn == 0.0) return 0.0;
    x = y / yn;
    if (it > 1 && std::abs(est - prev) <= 1e-12 * std::abs(est)) {
      // Rayleigh quotient of the updated iterate is at least as large.
      return std::max(est, x.dot(g * x));
    }
    prev = est;
  }
  throw NumericError("max_eigenvalue_psd: power iteration did not converge", kMaxIter);
}

Matrix principal_submatrix(const Matrix& g, const std::vector<Index>& idx) {
  const Index k = static_cast<Index>(idx.size());
  Matrix out(k, k);
  for (Index b = 0; b < k; ++b) {
    for (Index a = 0; a < k; ++a) out(a, b) = g(idx[a], idx[b]);
  }
  return out;
}

}  // namespace bandprec::linalg
