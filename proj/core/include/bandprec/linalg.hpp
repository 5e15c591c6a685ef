#pragma once

#include "bandprec/cholesky_core.hpp"

namespace bandprec::linalg {

struct SpdSolve {
  Vector x;
  bool jittered = false;
};

/// Solves G x = rhs for symmetric positive semidefinite G. If the Cholesky
/// factorization fails or G is numerically singular, retries with
/// G + 1e-10 * (trace(G)/dim) * I and flags the result.
SpdSolve solve_spd_with_jitter(const Matrix& g, const Vector& rhs);

/// Largest eigenvalue of a symmetric positive semidefinite matrix. Small
/// matrices use a direct eigensolve; larger ones use power iteration with
/// relative tolerance 1e-12.
double max_eigenvalue_psd(const Matrix& g);

/// Extracts g(idx, idx).
Matrix principal_submatrix(const Matrix& g, const std::vector<Index>& idx);

}  // namespace bandprec::linalg
