#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seplrt/data.hpp"
#include "seplrt/fit_null.hpp"
#include "seplrt/lrt.hpp"

namespace seplrt {

enum class Scenario { null_mean, two_group };

struct SimConfig {
  int n_subjects = 80;
  int t_max = 3;
  int s_max = 4;
  double rho_t = 0.8;
  double rho_s = 0.8;
  double delta_frac = 0.25;  // delta as a fraction of d_max - d_min, per factor
  double sigma2 = 1.0;
  Scenario scenario = Scenario::null_mean;
  std::vector<double> beta = {0.0};  // two_group: {intercept, group effect}
  int reps = 300;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  double time_spacing = 2.0;
  double space_spacing = 2.0;
  // Imbalance policy, each subject occupying a leading grid prefix:
  //   "scan_profile":   t_i from a right-skewed visit-count profile
  //                     (truncated geometric on {1..7}, median 3, capped at
  //                     t_max); s_i = s_max (default)
  //   "time_dropout":   t_i ~ U{1..t_max}, s_i = s_max (the unstructured
  //                     fit needs roughly N/t_max complete-grid subjects
  //                     for its maximum to exist)
  //   "uniform_prefix": t_i ~ U{1..t_max}, s_i ~ U{1..s_max}; at desk-scale
  //                     N the alternative likelihood is typically unbounded
  //                     under this policy and fits are expected to fail
  //   "balanced":       every subject observes the complete grid
  std::string imbalance = "scan_profile";
  FitOptions fit;
  int threads = 0;  // 0: SEPLRT_THREADS env var, else hardware concurrency
  bool keep_rep_log = true;
};

struct RepLog {
  int rep = 0;
  bool converged = false;
  std::string failure;  // error kind when not converged
  double stat = 0.0;
  bool reject_unadjusted = false;
  bool reject_k1 = false;
  bool reject_k2 = false;
};

struct SimResult {
  int converged_reps = 0;
  int failed_reps = 0;
  // rejection rates over converged replicates; absent when none converged
  std::optional<double> rate_unadjusted;
  std::optional<double> rate_k1;
  std::optional<double> rate_k2;
  std::optional<double> se_unadjusted;  // sqrt(p(1-p)/converged_reps)
  std::optional<double> se_k1;
  std::optional<double> se_k2;
  double runtime_seconds = 0.0;
  std::vector<RepLog> rep_log;
};

// Population distance scale of the maximal grid (not the realized sample),
// so the generating delta = delta_frac * (d_max - d_min) is identical
// across replicates.
DistanceScale population_scale(int grid_points, double spacing);

// Draws one subject: grid occupancy per the imbalance policy, covariance
// sigma2 * Gamma_i (x) Omega_i with LEAR factors at the population scale,
// mean per scenario. subject_index < ceil(N/2) is the reference group.
SubjectData gen_subject(const SimConfig& config, int subject_index, RngStream& rng);

// The full dataset of replicate `rep` (streams are keyed by (seed, rep)).
Dataset make_replicate(const SimConfig& config, int rep);

// Runs the Monte Carlo test-size study: per replicate, generates a dataset
// and runs the separability test with all three variants, tallying
// rejections over converged replicates. Deterministic given the seed,
// regardless of thread count or scheduling. Throws StudyAborted when the
// convergence rate falls below 10% after at least 50 replicates.
SimResult run_study(const SimConfig& config);

}  // namespace seplrt
