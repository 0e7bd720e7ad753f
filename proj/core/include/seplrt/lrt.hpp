#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seplrt/data.hpp"
#include "seplrt/fit_alt.hpp"
#include "seplrt/fit_null.hpp"

namespace seplrt {

struct AdjustmentSet {
  bool unadjusted = true;
  bool k1 = true;
  bool k2 = true;
};

struct LrtResult {
  double stat = 0.0;  // -2 ln Lambda
  long nu = 0;
  double k1 = 0.0;
  double k2 = 0.0;
  double alpha = 0.05;
  std::optional<double> p_unadjusted;
  std::optional<double> p_k1;  // absent when not requested or k1 <= 0
  std::optional<double> p_k2;
  std::optional<bool> reject_unadjusted;
  std::optional<bool> reject_k1;
  std::optional<bool> reject_k2;
  std::vector<std::string> warnings;
};

// 2 (alt loglik - null loglik); requires both fits converged.
double lrt_statistic(const NullFitResult& null_fit, const AltFitResult& alt_fit);

// max_ts (max_ts + 1) / 2 - 5: effective covariance parameters under the
// alternative minus the five LEAR parameters.
long dof_lear(long max_ts);

// Degrees of freedom if both factor matrices were unstructured under the
// null: T(T+1)/2 - [t(t+1)/2 + s(s+1)/2 - 1] with T = t_max * s_max.
long dof_unstructured_factors(long t_max, long s_max);

// Mean-based critical value adjustment for the balanced unstructured-factor
// test (digamma moments of the Wishart log-determinant).
double k_mitchell(long n_subjects, long t, long s);

// The analog of k_mitchell for the LEAR separability statistic. Can be
// non-positive for extreme (N, max_ts); callers must check the sign before
// using it to scale the statistic.
double k1_adjust(long n_subjects, long max_ts);

// N / (N - max_ts); tends to 1 as N grows.
double k2_adjust(long n_subjects, long max_ts);

// Pure assembly of the test report from a statistic: degrees of freedom,
// requested adjustments, p-values p = chi2_sf(stat / k, nu) and rejection
// decisions at level alpha.
LrtResult assemble_lrt(double stat, long nu, long n_subjects, long max_ts, double alpha,
                       const AdjustmentSet& adjustments,
                       std::vector<std::string> warnings = {});

// Fits both models and assembles the separability test. Throws
// FitNotConverged when either fit fails to converge; no statistic is
// reported from partial iterates. Optionally hands back the fits.
LrtResult run_test(const Dataset& dataset, double alpha, const AdjustmentSet& adjustments,
                   const FitOptions& options = {}, NullFitResult* null_out = nullptr,
                   AltFitResult* alt_out = nullptr);

}  // namespace seplrt
