#include "bandprec/penalty.hpp"

#include <cmath>
#include <string>

#include "bandprec/errors.hpp"

namespace bandprec {

void ScadParams::validate() const {
  std::vector<std::string> bad;
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) bad.push_back("lambda must be >= 0");
  if (!(a > 2.0) || !std::isfinite(a)) bad.push_back("a must be > 2");
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

BlockPartition::BlockPartition(Index p, Index stacked_blocks) : p_(p) {
  if (p < 2) throw std::invalid_argument("BlockPartition: p must be >= 2");
  s_ = std::clamp<Index>(stacked_blocks, 1, p - 1);
}

BlockPartition BlockPartition::stacked(Index p) {
  const auto tail = static_cast<Index>(std::ceil(2.0 * std::sqrt(static_cast<double>(p))));
  return BlockPartition(p, p - tail);
}

BlockPartition BlockPartition::unstacked(Index p) { return BlockPartition(p, p - 1); }

std::pair<Index, Index> BlockPartition::bands_of(Index b) const {
  if (b < 0 || b >= s_) {
    throw std::out_of_range("block index " + std::to_string(b));
  }
  if (b < s_ - 1) return {b + 1, b + 1};
  return {s_, p_ - 1};
}

Index BlockPartition::block_of_band(Index j) const {
  if (j < 1 || j >= p_) throw std::out_of_range("band index " + std::to_string(j));
  return std::min(j, s_) - 1;
}

Index BlockPartition::length(Index b) const {
  const auto [first, last] = bands_of(b);
  // sum_{j=first}^{last} (p - j)
  const Index count = last - first + 1;
  return count * p_ - (first + last) * count / 2;
}

double scad_derivative(double theta, const ScadParams& params) {
  if (theta < 0.0 || std::isnan(theta)) {
    throw DomainError("scad_derivative: theta must be >= 0");
  }
  const double lam = params.lambda;
  if (theta <= lam) return lam;
  const double mid = std::max(params.a * lam - theta, 0.0);
  return params.conventional_divisor ? mid / (params.a - 1.0) : mid;
}

double scad_penalty(double theta, const ScadParams& params) {
  if (theta < 0.0 || std::isnan(theta)) {
    throw DomainError("scad_penalty: theta must be >= 0");
  }
  const double lam = params.lambda;
  const double a = params.a;
  if (theta <= lam) return lam * theta;
  const double div = params.conventional_divisor ? a - 1.0 : 1.0;
  const double t = std::min(theta, a * lam);
  // lambda^2 + int_lambda^t (a lambda - u) du / div; constant beyond a lambda.
  return lam * lam + (a * lam * (t - lam) - 0.5 * (t * t - lam * lam)) / div;
}

double band_lambda(double lambda, const BlockPartition& part, Index b) {
  return lambda * std::sqrt(static_cast<double>(part.length(b)));
}

Vector block_norms(const BandedCholesky& t, const BlockPartition& part) {
  if (t.dim() != part.dim()) {
    throw std::invalid_argument("block_norms: partition dimension mismatch");
  }
  Vector out(part.block_count());
  for (Index b = 0; b < part.block_count(); ++b) {
    const auto [first, last] = part.bands_of(b);
    double sq = 0.0;
    for (Index j = first; j <= last; ++j) sq += t.band(j).squaredNorm();
    out[b] = std::sqrt(sq);
  }
  return out;
}

BlockWeights block_weights(const BandedCholesky& ref, const ScadParams& params,
                           const BlockPartition& part, Index n) {
  params.validate();
  if (!(params.lambda > 0.0)) {
    throw DomainError("block_weights: lambda must be > 0 (weights are undefined at 0)");
  }
  const Vector norms = block_norms(ref, part);
  BlockWeights out{Vector(part.block_count())};
  for (Index b = 0; b < part.block_count(); ++b) {
    ScadParams pb = params;
    pb.lambda = band_lambda(params.lambda, part, b);
    out.w[b] = static_cast<double>(n) * scad_derivative(norms[b], pb) / params.lambda;
  }
  return out;
}

double objective_ls(const DataMatrix& data, const BandedCholesky& t) {
  const Matrix r = residuals(data, t);
  if (r.cols() <= 1) return 0.0;
  return r.rightCols(r.cols() - 1).squaredNorm();
}

double block_penalty(const BandedCholesky& t, const ScadParams& params,
                     const BlockPartition& part, Index n) {
  params.validate();
  if (params.lambda == 0.0) return 0.0;
  const Vector norms = block_norms(t, part);
  double pen = 0.0;
  for (Index b = 0; b < part.block_count(); ++b) {
    ScadParams pb = params;
    pb.lambda = band_lambda(params.lambda, part, b);
    pen += scad_penalty(norms[b], pb);
  }
  return static_cast<double>(n) * pen;
}

double objective_penalized(const DataMatrix& data, const BandedCholesky& t,
                           const ScadParams& params, const BlockPartition& part) {
  return objective_ls(data, t) + block_penalty(t, params, part, data.n());
}

}  // namespace bandprec
