#include "seplrt/lear.hpp"

#include <cmath>

namespace seplrt {

namespace {

void check_inputs(const Matrix& dists, const DistanceScale& scale, const LearParams& params) {
  if (dists.rows() != dists.cols()) throw DimensionMismatch("lear_corr: distance matrix must be square");
  if (!dists.allFinite()) throw DomainError("lear_corr: NaN or infinite distance");
  if ((dists.array() < 0.0).any()) throw NegativeDistance("lear_corr: negative distance");
  for (Eigen::Index j = 0; j < dists.rows(); ++j) {
    if (dists(j, j) != 0.0) throw DomainError("lear_corr: diagonal distances must be zero");
    for (Eigen::Index k = j + 1; k < dists.cols(); ++k) {
      if (dists(j, k) != dists(k, j)) throw DomainError("lear_corr: distance matrix must be symmetric");
      if (!(dists(j, k) > 0.0)) throw DomainError("lear_corr: off-diagonal distances must be positive");
    }
  }
  if (!(params.rho >= 0.0 && params.rho < 1.0)) throw DomainError("lear_corr: rho must be in [0, 1)");
  if (!(params.delta >= 0.0)) throw DomainError("lear_corr: delta must be >= 0");
  if (!(scale.d_min > 0.0) || !(scale.d_max >= scale.d_min) || !std::isfinite(scale.d_max))
    throw DomainError("lear_corr: invalid distance scale");
}

inline double exponent(double d, const DistanceScale& scale, double delta) {
  const double range = scale.range();
  if (range == 0.0) return scale.d_min;  // degenerate scale: the scaled term is defined as 0
  return scale.d_min + delta * (d - scale.d_min) / range;
}

}  // namespace

Matrix lear_corr(const Matrix& dists, const DistanceScale& scale, const LearParams& params) {
  check_inputs(dists, scale, params);
  const Eigen::Index m = dists.rows();
  Matrix corr = Matrix::Identity(m, m);
  if (params.rho == 0.0) return corr;  // all off-diagonals vanish in the rho -> 0 limit
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index k = j + 1; k < m; ++k) {
      const double e = exponent(dists(j, k), scale, params.delta);
      corr(j, k) = corr(k, j) = std::pow(params.rho, e);
    }
  return corr;
}

std::pair<Matrix, Matrix> lear_corr_grad(const Matrix& dists, const DistanceScale& scale,
                                         const LearParams& params) {
  check_inputs(dists, scale, params);
  if (!(params.rho > 0.0)) throw DomainError("lear_corr_grad: requires rho > 0");
  const Eigen::Index m = dists.rows();
  Matrix d_rho = Matrix::Zero(m, m);
  Matrix d_delta = Matrix::Zero(m, m);
  const double range = scale.range();
  const double log_rho = std::log(params.rho);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index k = j + 1; k < m; ++k) {
      const double d = dists(j, k);
      const double e = exponent(d, scale, params.delta);
      const double p = std::pow(params.rho, e);
      d_rho(j, k) = d_rho(k, j) = e * std::pow(params.rho, e - 1.0);
      const double scaled = range == 0.0 ? 0.0 : (d - scale.d_min) / range;
      d_delta(j, k) = d_delta(k, j) = log_rho * p * scaled;
    }
  return {std::move(d_rho), std::move(d_delta)};
}

}  // namespace seplrt
