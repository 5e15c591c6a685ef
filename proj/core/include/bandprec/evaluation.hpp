#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bandprec/cholesky_core.hpp"

namespace bandprec {

/// tr(Omega_hat Sigma) - log|Omega_hat Sigma| - p, using Omega_hat from the
/// decomposition directly. Throws DomainError naming sigma_true if it is
/// not positive definite.
double kl_loss(const DenseSymmetric& sigma_true, const PrecisionEstimate& est);

/// Same loss for a dense covariance estimate; both matrices are factored by
/// Cholesky and a non-PD one is named in the DomainError.
double kl_loss(const DenseSymmetric& sigma_true, const DenseSymmetric& sigma_hat);

struct SparsityRecovery {
  /// Empty when the truth has no zero (respectively nonzero) bands.
  std::optional<double> pct_zeros;
  std::optional<double> pct_nonzeros;
};

/// Band-level recovery: a band counts as zero when every entry has
/// |entry| <= zero_tol (0 means exact zeros).
SparsityRecovery sparsity_recovery(const BandedCholesky& est, const BandedCholesky& truth,
                                   double zero_tol = 0.0);

/// Linear interpolation between order statistics at h = (n - 1) q.
double quantile_type7(std::vector<double> x, double q);
double median(std::vector<double> x);
/// Interquartile range / 1.349.
double sd_mad(const std::vector<double>& x);

struct MetricRow {
  std::string method;
  double kl_loss = 0.0;
  double op_norm = 0.0;
  double inf_norm = 0.0;
  std::optional<double> pct_correct_zeros;
  std::optional<double> pct_correct_nonzeros;
};

/// Evaluates an MCD estimate against the truth: KL on Sigma_0, operator and
/// elementwise norms of Omega_hat - Omega_0, band-level sparsity.
MetricRow evaluate(const std::string& method, const PrecisionEstimate& truth,
                   const PrecisionEstimate& est);

/// Evaluates a dense covariance estimate (no sparsity columns). Throws
/// DomainError when sigma_hat is singular.
MetricRow evaluate(const std::string& method, const PrecisionEstimate& truth,
                   const DenseSymmetric& sigma_hat);

struct Summary {
  double median = 0.0;
  double sd_mad = 0.0;
  Index count = 0;
};

Summary summarize_values(const std::vector<double>& x);

struct MetricSummary {
  std::string method;
  Summary kl_loss;
  Summary op_norm;
  Summary inf_norm;
  std::optional<Summary> pct_correct_zeros;
  std::optional<Summary> pct_correct_nonzeros;
  Index runs = 0;
};

/// Per-metric median and SD_mad over runs (all rows share one method).
MetricSummary summarize(const std::vector<MetricRow>& runs);

/// Table-style number: 0 -> "0", |x| >= 100 -> integer, otherwise one
/// decimal with the leading zero dropped (0.5 -> ".5").
std::string format_table_number(double x);
/// "median(sd_mad)", e.g. "5.6(.5)" or "100(0)".
std::string format_summary(const Summary& s);

struct TextTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write_csv(std::ostream& os) const;
  /// Columns padded to their widest cell.
  void write_text(std::ostream& os) const;
};

}  // namespace bandprec
