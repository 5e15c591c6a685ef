#include "bandprec/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "bandprec/errors.hpp"

namespace bandprec {

namespace {

Eigen::LLT<Matrix> factor_pd(const DenseSymmetric& m, const char* name) {
  Eigen::LLT<Matrix> llt(m.matrix());
  if (llt.info() != Eigen::Success) {
    throw DomainError(std::string(name) + " is not positive definite");
  }
  const auto& l = llt.matrixLLT();
  for (Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) {
      throw DomainError(std::string(name) + " is not positive definite");
    }
  }
  return llt;
}

double log_det(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

void check_dims(Index a, Index b) {
  if (a != b) throw std::invalid_argument("kl_loss: dimension mismatch");
}

}  // namespace

double kl_loss(const DenseSymmetric& sigma_true, const PrecisionEstimate& est) {
  check_dims(sigma_true.dim(), est.dim());
  const auto llt = factor_pd(sigma_true, "sigma_true");
  const Matrix t = est.factor.dense_factor();
  const Vector& s2 = est.variances.values();
  // tr(T' D^{-1} T Sigma) = sum_j (T Sigma T')_jj / sigma_j^2.
  const Matrix ts = t * sigma_true.matrix();
  double tr = 0.0;
  for (Index j = 0; j < t.rows(); ++j) tr += ts.row(j).dot(t.row(j)) / s2[j];
  // log|Omega_hat Sigma| = log|Sigma| - log|Sigma_hat|.
  const double ld = log_det(llt) - est.log_det_covariance();
  return tr - ld - static_cast<double>(est.dim());
}

double kl_loss(const DenseSymmetric& sigma_true, const DenseSymmetric& sigma_hat) {
  check_dims(sigma_true.dim(), sigma_hat.dim());
  const auto lt = factor_pd(sigma_true, "sigma_true");
  const auto lh = factor_pd(sigma_hat, "sigma_hat");
  // tr(Sigma_hat^{-1} Sigma) = ||L_hat^{-1} L_true||_F^2.
  const Matrix ltrue = lt.matrixL();
  const Matrix x = lh.matrixL().solve(ltrue);
  const double tr = x.squaredNorm();
  return tr - (log_det(lt) - log_det(lh)) - static_cast<double>(sigma_true.dim());
}

SparsityRecovery sparsity_recovery(const BandedCholesky& est, const BandedCholesky& truth,
                                   double zero_tol) {
  if (est.dim() != truth.dim()) {
    throw std::invalid_argument("sparsity_recovery: dimension mismatch");
  }
  auto is_zero = [zero_tol](const BandedCholesky& t, Index j) {
    const Vector& b = t.band(j);
    return b.size() == 0 || b.cwiseAbs().maxCoeff() <= zero_tol;
  };
  Index zeros = 0, zeros_hit = 0, nonzeros = 0, nonzeros_hit = 0;
  for (Index j = 1; j < truth.dim(); ++j) {
    const bool ez = is_zero(est, j);
    if (is_zero(truth, j)) {
      ++zeros;
      if (ez) ++zeros_hit;
    } else {
      ++nonzeros;
      if (!ez) ++nonzeros_hit;
    }
  }
  SparsityRecovery out;
  if (zeros > 0) out.pct_zeros = 100.0 * static_cast<double>(zeros_hit) / static_cast<double>(zeros);
  if (nonzeros > 0) {
    out.pct_nonzeros = 100.0 * static_cast<double>(nonzeros_hit) / static_cast<double>(nonzeros);
  }
  return out;
}

double quantile_type7(std::vector<double> x, double q) {
  if (x.empty()) throw DomainError("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile: q outside [0, 1]");
  std::sort(x.begin(), x.end());
  const double h = static_cast<double>(x.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double median(std::vector<double> x) { return quantile_type7(std::move(x), 0.5); }

double sd_mad(const std::vector<double>& x) {
  return (quantile_type7(x, 0.75) - quantile_type7(x, 0.25)) / 1.349;
}

MetricRow evaluate(const std::string& method, const PrecisionEstimate& truth,
                   const PrecisionEstimate& est) {
  MetricRow row;
  row.method = method;
  const DenseSymmetric sigma0 = assemble_covariance(truth);
  const DenseSymmetric diff = assemble_precision(est) - assemble_precision(truth);
  row.kl_loss = kl_loss(sigma0, est);
  row.op_norm = norm_operator_eigen(diff);
  row.inf_norm = diff.matrix().size() ? diff.matrix().cwiseAbs().maxCoeff() : 0.0;
  const SparsityRecovery sr = sparsity_recovery(est.factor, truth.factor);
  row.pct_correct_zeros = sr.pct_zeros;
  row.pct_correct_nonzeros = sr.pct_nonzeros;
  return row;
}

MetricRow evaluate(const std::string& method, const PrecisionEstimate& truth,
                   const DenseSymmetric& sigma_hat) {
  MetricRow row;
  row.method = method;
  const DenseSymmetric sigma0 = assemble_covariance(truth);
  row.kl_loss = kl_loss(sigma0, sigma_hat);
  const auto llt = factor_pd(sigma_hat, "sigma_hat");
  const Matrix omega_hat = llt.solve(Matrix::Identity(sigma_hat.dim(), sigma_hat.dim()));
  const DenseSymmetric diff =
      DenseSymmetric::from_lower(omega_hat) - assemble_precision(truth);
  row.op_norm = norm_operator_eigen(diff);
  row.inf_norm = diff.matrix().size() ? diff.matrix().cwiseAbs().maxCoeff() : 0.0;
  return row;
}

Summary summarize_values(const std::vector<double>& x) {
  if (x.empty()) return {};
  return {median(x), sd_mad(x), static_cast<Index>(x.size())};
}

MetricSummary summarize(const std::vector<MetricRow>& runs) {
  MetricSummary out;
  if (runs.empty()) return out;
  out.method = runs.front().method;
  out.runs = static_cast<Index>(runs.size());
  std::vector<double> kl, op, inf, pz, pn;
  for (const auto& r : runs) {
    kl.push_back(r.kl_loss);
    op.push_back(r.op_norm);
    inf.push_back(r.inf_norm);
    if (r.pct_correct_zeros) pz.push_back(*r.pct_correct_zeros);
    if (r.pct_correct_nonzeros) pn.push_back(*r.pct_correct_nonzeros);
  }
  out.kl_loss = summarize_values(kl);
  out.op_norm = summarize_values(op);
  out.inf_norm = summarize_values(inf);
  if (!pz.empty()) out.pct_correct_zeros = summarize_values(pz);
  if (!pn.empty()) out.pct_correct_nonzeros = summarize_values(pn);
  return out;
}

std::string format_table_number(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "NA" : (x > 0 ? "Inf" : "-Inf");
  char buf[64];
  if (std::abs(x) >= 99.95) {
    std::snprintf(buf, sizeof buf, "%.0f", x);
    return buf;
  }
  std::snprintf(buf, sizeof buf, "%.1f", x);
  std::string s = buf;
  if (s == "0.0" || s == "-0.0") return "0";
  if (s.rfind("0.", 0) == 0) s.erase(0, 1);
  else if (s.rfind("-0.", 0) == 0) s.erase(1, 1);
  return s;
}

std::string format_summary(const Summary& s) {
  return format_table_number(s.median) + "(" + format_table_number(s.sd_mad) + ")";
}

void TextTable::write_csv(std::ostream& os) const {
  auto emit = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (!quote) {
        os << cells[i];
        continue;
      }
      os << '"';
      for (char c : cells[i]) {
        if (c == '"') os << '"';
        os << c;
      }
      os << '"';
    }
    os << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
}

void TextTable::write_text(std::ostream& os) const {
  std::vector<std::size_t> width(header.size(), 0);
  auto widen = [&width](const std::vector<std::string>& cells) {
    if (cells.size() > width.size()) width.resize(cells.size(), 0);
    for (std::size_t i = 0; i < cells.size(); ++i) width[i] = std::max(width[i], cells[i].size());
  };
  widen(header);
  for (const auto& r : rows) widen(r);
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << "  ";
      os << cells[i];
      if (i + 1 < cells.size()) os << std::string(width[i] - cells[i].size(), ' ');
    }
    os << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
}

}  // namespace bandprec
