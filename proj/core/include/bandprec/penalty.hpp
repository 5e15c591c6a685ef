#pragma once

#include <utility>
#include <vector>

#include "bandprec/cholesky_core.hpp"
#include "bandprec/data.hpp"

namespace bandprec {

struct ScadParams {
  double lambda = 0.0;
  double a = 3.7;
  /// Divide the middle branch of the derivative by (a - 1) as in the usual
  /// SCAD definition. Off by default: the middle branch is (a lambda - theta)_+.
  bool conventional_divisor = false;

  void validate() const;
};

/// Partition of bands 1..p-1 into blocks. Blocks 0..s-2 are single bands
/// 1..s-1; block s-1 concatenates bands s..p-1.
class BlockPartition {
 public:
  BlockPartition() = default;
  /// `stacked_blocks` = s, clamped to [1, p-1].
  BlockPartition(Index p, Index stacked_blocks);

  /// s = p - ceil(2 sqrt(p)).
  static BlockPartition stacked(Index p);
  /// One block per band.
  static BlockPartition unstacked(Index p);

  Index dim() const noexcept { return p_; }
  Index block_count() const noexcept { return s_; }
  /// Bands [first, last] (inclusive, 1-based) in block b.
  std::pair<Index, Index> bands_of(Index b) const;
  Index block_of_band(Index j) const;
  /// Number of coefficients in block b.
  Index length(Index b) const;

 private:
  Index p_ = 0;
  Index s_ = 0;
};

struct BlockWeights {
  Vector w;
};

/// p'_lambda(theta): lambda on [0, lambda], (a lambda - theta)_+ above
/// (divided by a - 1 when conventional_divisor is set).
double scad_derivative(double theta, const ScadParams& params);
/// p_lambda(theta), the integral of scad_derivative from 0.
double scad_penalty(double theta, const ScadParams& params);

/// lambda * sqrt(length of block b).
double band_lambda(double lambda, const BlockPartition& part, Index b);

/// L2 norm of each block (stacked block: norm of the concatenation).
Vector block_norms(const BandedCholesky& t, const BlockPartition& part);

/// w_b = n p'_{lambda_b}(||block b of ref||) / lambda. Throws DomainError
/// for lambda <= 0.
BlockWeights block_weights(const BandedCholesky& ref, const ScadParams& params,
                           const BlockPartition& part, Index n);

/// L_n = sum_i sum_{j>=2} (y_ij - y_i[j]' phi_j)^2.
double objective_ls(const DataMatrix& data, const BandedCholesky& t);

/// Q_n = L_n + n sum_b p_{lambda_b}(||block b||).
double objective_penalized(const DataMatrix& data, const BandedCholesky& t,
                           const ScadParams& params, const BlockPartition& part);

/// n sum_b p_{lambda_b}(||block b||) alone.
double block_penalty(const BandedCholesky& t, const ScadParams& params,
                     const BlockPartition& part, Index n);

}  // namespace bandprec
