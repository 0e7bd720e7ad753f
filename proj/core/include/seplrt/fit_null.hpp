#pragma once

#include <string>
#include <vector>

#include "seplrt/data.hpp"
#include "seplrt/lear.hpp"
#include "seplrt/numerics.hpp"

namespace seplrt {

// The four LEAR correlation parameters (sigma^2 profiled out).
struct LearTau {
  LearParams tau_t;
  LearParams tau_s;
};

struct FitOptions {
  int max_iter = 100;
  double rel_tol = 1e-8;    // relative profile log-likelihood change
  double grad_tol = 1e-6;   // gradient norm on the transformed scale
  double fd_step = 1e-5;    // finite-difference step, transformed scale
  int max_halvings = 20;
  bool analytic_gradient = false;  // chain-rule gradient instead of central FD
};

struct NullFitResult {
  Vector beta;
  NullParams params;
  double loglik = 0.0;          // full log-likelihood at the optimum
  double profile_loglik = 0.0;  // equals loglik by the profiling identity
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
  std::vector<std::string> warnings;
  std::vector<double> trace;    // accepted profile log-likelihood sequence
};

// Cholesky factors of one subject's temporal and spatial correlations.
struct SubjectFactors {
  CholFactor gamma;
  CholFactor omega;
};

// Factors Gamma_i(tau), Omega_i(tau) for every subject, using the
// data-driven distance scales. Throws NotPositiveDefinite when tau is
// inadmissible for some subject.
std::vector<SubjectFactors> build_null_factors(const Dataset& dataset, const LearTau& tau);

// GLS estimate (sum_i X_i' (G_i^-1 (x) O_i^-1) X_i)^-1 sum_i X_i' (...) y_i.
// Kronecker inverses are applied through factor solves; the t_i s_i square
// inverse is never formed.
Vector gls_beta(const Dataset& dataset, const std::vector<SubjectFactors>& factors);
Vector gls_beta(const Dataset& dataset, const LearTau& tau);

// (1/n) sum_i r_i' (G_i^-1 (x) O_i^-1) r_i.
double sigma2_hat(const Dataset& dataset, const Vector& beta,
                  const std::vector<SubjectFactors>& factors);
double sigma2_hat(const Dataset& dataset, const Vector& beta, const LearTau& tau);

// Profile log-likelihood with sigma^2 replaced by its conditional maximizer;
// includes the -(n/2) ln(2 pi) constant so it equals full_loglik at
// sigma2_hat exactly.
double profile_loglik(const Dataset& dataset, const Vector& beta,
                      const std::vector<SubjectFactors>& factors);
double profile_loglik(const Dataset& dataset, const Vector& beta, const LearTau& tau);

double full_loglik(const Dataset& dataset, const Vector& beta, double sigma2,
                   const std::vector<SubjectFactors>& factors);
double full_loglik(const Dataset& dataset, const Vector& beta, double sigma2,
                   const LearTau& tau);

// Maximum likelihood fit of the separable LEAR model: alternates the GLS
// beta update with safeguarded Newton steps on (logit rho, log delta) per
// factor, maximizing the profile log-likelihood.
NullFitResult fit_null(const Dataset& dataset, const FitOptions& options = {});

}  // namespace seplrt
