#include "seplrt/lrt.hpp"

#include <cmath>

namespace seplrt {

double lrt_statistic(const NullFitResult& null_fit, const AltFitResult& alt_fit) {
  if (!null_fit.converged)
    throw FitNotConverged("lrt_statistic: the null (separable LEAR) fit did not converge");
  if (!alt_fit.converged)
    throw FitNotConverged("lrt_statistic: the alternative (unstructured) fit did not converge");
  return 2.0 * (alt_fit.loglik - null_fit.loglik);
}

long dof_lear(long max_ts) {
  if (max_ts < 1) throw DomainError("dof_lear: max_ts must be >= 1");
  const long nu = max_ts * (max_ts + 1) / 2 - 5;
  if (nu < 1)
    throw NonPositiveDf("dof_lear: max_ts = " + std::to_string(max_ts) +
                        " gives nonpositive degrees of freedom " + std::to_string(nu));
  return nu;
}

long dof_unstructured_factors(long t_max, long s_max) {
  if (t_max < 1 || s_max < 1)
    throw DomainError("dof_unstructured_factors: grid dimensions must be >= 1");
  const long big = t_max * s_max;
  const long nu = big * (big + 1) / 2 - (t_max * (t_max + 1) / 2 + s_max * (s_max + 1) / 2 - 1);
  if (nu < 1)
    throw NonPositiveDf("dof_unstructured_factors: nonpositive degrees of freedom " +
                        std::to_string(nu));
  return nu;
}

namespace {

// -N ( m ln2 + sum_{j=1}^{m} psi((N-j)/2) - m lnN ), the Wishart
// log-determinant moment shared by both mean-based adjustments.
double wishart_moment_term(long n, long m) {
  const double nn = static_cast<double>(n);
  double psi_sum = 0.0;
  for (long j = 1; j <= m; ++j) psi_sum += digamma(0.5 * (nn - static_cast<double>(j)));
  return -nn * (static_cast<double>(m) * std::log(2.0) + psi_sum -
                static_cast<double>(m) * std::log(nn));
}

}  // namespace

double k_mitchell(long n_subjects, long t, long s) {
  if (t < 1 || s < 1) throw DomainError("k_mitchell: factor sizes must be >= 1");
  const long ts = t * s;
  if (n_subjects <= ts)
    throw DomainError("k_mitchell: requires N > t*s so every digamma argument is positive");
  const double denom = static_cast<double>(ts * (ts + 1)) / 2.0 -
                       static_cast<double>(t * (t + 1)) / 2.0 -
                       static_cast<double>(s * (s + 1)) / 2.0 + 1.0;
  if (denom == 0.0)
    throw DomainError("k_mitchell: zero denominator (degenerate factor dimensions)");
  const double nn = static_cast<double>(n_subjects);
  const double h0_params = static_cast<double>(t * (t + 1)) / 2.0 +
                           static_cast<double>(s * (s + 1)) / 2.0 +
                           static_cast<double>(ts) - 1.0;
  const double num = wishart_moment_term(n_subjects, ts) - nn / (nn - 1.0) * h0_params;
  return num / denom;
}

double k1_adjust(long n_subjects, long max_ts) {
  if (max_ts < 1) throw DomainError("k1_adjust: max_ts must be >= 1");
  if (n_subjects <= max_ts)
    throw DomainError("k1_adjust: requires N > max_ts so every digamma argument is positive");
  const double denom = static_cast<double>(max_ts * (max_ts + 1)) / 2.0 - 5.0;
  if (denom == 0.0) throw DomainError("k1_adjust: zero denominator");
  const double nn = static_cast<double>(n_subjects);
  const double num = wishart_moment_term(n_subjects, max_ts) -
                     nn / (nn - 1.0) * (static_cast<double>(max_ts) + 5.0);
  return num / denom;
}

double k2_adjust(long n_subjects, long max_ts) {
  if (max_ts < 1) throw DomainError("k2_adjust: max_ts must be >= 1");
  if (n_subjects <= max_ts) throw DomainError("k2_adjust: requires N > max_ts");
  return static_cast<double>(n_subjects) / static_cast<double>(n_subjects - max_ts);
}

LrtResult assemble_lrt(double stat, long nu, long n_subjects, long max_ts, double alpha,
                       const AdjustmentSet& adjustments, std::vector<std::string> warnings) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("assemble_lrt: alpha must be in (0, 1)");
  LrtResult res;
  res.stat = stat;
  res.nu = nu;
  res.alpha = alpha;
  res.warnings = std::move(warnings);
  if (stat < -1e-6)
    res.warnings.push_back("-2lnLambda = " + std::to_string(stat) +
                           " is negative beyond numerical tolerance; the alternative "
                           "optimum appears worse than the null");
  const double positive_stat = std::max(stat, 0.0);
  res.k1 = k1_adjust(n_subjects, max_ts);
  res.k2 = k2_adjust(n_subjects, max_ts);
  if (adjustments.unadjusted) {
    res.p_unadjusted = chi2_sf(positive_stat, nu);
    res.reject_unadjusted = *res.p_unadjusted < alpha;
  }
  if (adjustments.k1) {
    if (res.k1 > 0.0) {
      res.p_k1 = chi2_sf(positive_stat / res.k1, nu);
      res.reject_k1 = *res.p_k1 < alpha;
    } else {
      res.warnings.push_back("k1 adjustment is nonpositive (" + std::to_string(res.k1) +
                             ") for N=" + std::to_string(n_subjects) +
                             ", max_ts=" + std::to_string(max_ts) +
                             "); the k1-adjusted p-value is undefined");
    }
  }
  if (adjustments.k2) {
    res.p_k2 = chi2_sf(positive_stat / res.k2, nu);
    res.reject_k2 = *res.p_k2 < alpha;
  }
  return res;
}

LrtResult run_test(const Dataset& dataset, double alpha, const AdjustmentSet& adjustments,
                   const FitOptions& options, NullFitResult* null_out, AltFitResult* alt_out) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("run_test: alpha must be in (0, 1)");
  NullFitResult null_fit = fit_null(dataset, options);
  AltFitResult alt_fit = fit_alt(dataset, options);
  if (null_out) *null_out = null_fit;
  if (alt_out) *alt_out = alt_fit;
  if (!null_fit.converged || !alt_fit.converged)
    throw FitNotConverged(
        std::string("run_test: the ") +
        (!null_fit.converged ? "null (separable LEAR)" : "alternative (unstructured)") +
        " fit did not converge; the data may not support the model and a more "
        "parsimonious covariance model, like a Kronecker product structure, should be employed");

  const double stat = lrt_statistic(null_fit, alt_fit);
  std::vector<std::string> warnings = dataset.warnings;
  warnings.insert(warnings.end(), null_fit.warnings.begin(), null_fit.warnings.end());
  warnings.insert(warnings.end(), alt_fit.warnings.begin(), alt_fit.warnings.end());
  return assemble_lrt(stat, dof_lear(dataset.max_ts()), dataset.n_subjects(), dataset.max_ts(),
                      alpha, adjustments, std::move(warnings));
}

}  // namespace seplrt
