#pragma once

#include <string>
#include <vector>

#include "seplrt/data.hpp"
#include "seplrt/fit_null.hpp"
#include "seplrt/numerics.hpp"

namespace seplrt {

// Unstructured covariance over the maximal time-by-space grid,
// parameterized by the log-Cholesky vector: lower-triangular entries row
// by row, with diagonal entries stored as logs. Every theta encodes a
// positive definite matrix and every PD matrix has exactly one theta.
struct MaxGridCov {
  int t_max = 0;
  int s_max = 0;
  Vector theta;  // length D(D+1)/2 with D = t_max * s_max

  int dim() const { return t_max * s_max; }
  Matrix chol_lower() const;
  Matrix matrix() const;
  static MaxGridCov from_matrix(const Matrix& sigma, int t_max, int s_max);
};

struct AltFitResult {
  Vector beta;
  MaxGridCov cov;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
  std::vector<std::string> warnings;
  std::vector<double> trace;  // accepted log-likelihood sequence
};

// Rows/columns of the reconstructed D x D matrix at the subject's grid
// cells, ordered time-major like the subject's observations.
Matrix select_submatrix(const MaxGridCov& cov, const SubjectData& subject);

// GLS estimate with per-subject principal-submatrix weights.
Vector gls_beta_alt(const Dataset& dataset, const MaxGridCov& cov);

// sum_i [ -(t_i s_i / 2) ln(2 pi) - 0.5 ln|S_i| - 0.5 r_i' S_i^-1 r_i ].
double loglik_alt(const Dataset& dataset, const MaxGridCov& cov, const Vector& beta);

// Maximum likelihood fit of the common maximal-grid covariance: alternates
// the GLS beta update with safeguarded quasi-Newton ascent on theta
// (finite-difference Hessian for D(D+1)/2 <= 120, damped secant updates
// beyond). Non-convergence is reported through the result flag; it signals
// that a more parsimonious covariance model is indicated.
AltFitResult fit_alt(const Dataset& dataset, const FitOptions& options = {});

}  // namespace seplrt
