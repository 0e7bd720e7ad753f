#include "seplrt/simulate.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "seplrt/fit_alt.hpp"
#include "seplrt/lear.hpp"

namespace seplrt {

namespace {

void validate(const SimConfig& c) {
  if (c.n_subjects < 2) throw DomainError("simulate: need at least 2 subjects");
  if (c.t_max < 1 || c.s_max < 1) throw DomainError("simulate: grid dimensions must be >= 1");
  if (!(c.rho_t >= 0.0 && c.rho_t < 1.0) || !(c.rho_s >= 0.0 && c.rho_s < 1.0))
    throw DomainError("simulate: rho must be in [0, 1)");
  if (!(c.delta_frac >= 0.0)) throw DomainError("simulate: delta_frac must be >= 0");
  if (!(c.sigma2 > 0.0)) throw DomainError("simulate: sigma2 must be positive");
  if (c.reps < 1) throw DomainError("simulate: reps must be >= 1");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw DomainError("simulate: alpha must be in (0, 1)");
  if (!(c.time_spacing > 0.0) || !(c.space_spacing > 0.0))
    throw DomainError("simulate: spacings must be positive");
  if (c.imbalance != "uniform_prefix" && c.imbalance != "time_dropout" &&
      c.imbalance != "scan_profile" && c.imbalance != "balanced")
    throw DomainError("simulate: unknown imbalance policy '" + c.imbalance + "'");
  if (c.scenario == Scenario::two_group && c.beta.size() != 2)
    throw DomainError("simulate: two_group scenario needs beta = {intercept, group effect}");
  if (c.scenario == Scenario::null_mean && c.beta.size() != 1)
    throw DomainError("simulate: null_mean scenario needs a single (intercept) beta");
}

Matrix lattice_dist(int m, double spacing) {
  Matrix d = Matrix::Zero(m, m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) d(j, k) = std::abs(j - k) * spacing;
  return d;
}

}  // namespace

DistanceScale population_scale(int grid_points, double spacing) {
  if (grid_points < 2) return DistanceScale{1.0, 1.0};  // degenerate factor, scale unused
  return DistanceScale{spacing, (grid_points - 1) * spacing};
}

SubjectData gen_subject(const SimConfig& config, int subject_index, RngStream& rng) {
  validate(config);
  int t_i, s_i;
  if (config.imbalance == "balanced") {
    t_i = config.t_max;
    s_i = config.s_max;
  } else if (config.imbalance == "scan_profile") {
    // right-skewed visit-count profile typical of longitudinal imaging
    // studies (median 3 of a maximum 7 visits): t ~ truncated geometric on
    // {1..7} with ratio 0.75, capped at the configured maximum; the spatial
    // grid is fully observed. Keeps enough complete-grid subjects for the
    // unstructured fit to have a maximum at max(t)=3 while starving it at
    // max(t) in {5, 7}.
    const double ratio = 0.75;
    double weights[7], total = 0.0;
    for (int j = 0; j < 7; ++j) {
      weights[j] = std::pow(ratio, j);
      total += weights[j];
    }
    const double u = rng.uniform01() * total;
    double acc = 0.0;
    int draw = 7;
    for (int j = 0; j < 7; ++j) {
      acc += weights[j];
      if (u < acc) {
        draw = j + 1;
        break;
      }
    }
    t_i = std::min(draw, config.t_max);
    s_i = config.s_max;
  } else if (config.imbalance == "time_dropout") {
    // dropout in time only, the spatial grid fully observed. Keeps the
    // count of complete-grid subjects near N / t_max; the unstructured fit
    // needs that count above its matrix dimension for a maximizer to exist.
    t_i = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(config.t_max)));
    s_i = config.s_max;
  } else {
    t_i = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(config.t_max)));
    s_i = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(config.s_max)));
  }

  SubjectData sub;
  sub.id = "s" + std::to_string(subject_index + 1);
  sub.times = Vector(t_i);
  sub.time_grid_idx.resize(t_i);
  for (int j = 0; j < t_i; ++j) {
    sub.times(j) = j * config.time_spacing;
    sub.time_grid_idx[j] = j;
  }
  sub.locs = Matrix(s_i, 1);
  sub.loc_grid_idx.resize(s_i);
  for (int l = 0; l < s_i; ++l) {
    sub.locs(l, 0) = l * config.space_spacing;
    sub.loc_grid_idx[l] = l;
  }

  const DistanceScale st = population_scale(config.t_max, config.time_spacing);
  const DistanceScale ss = population_scale(config.s_max, config.space_spacing);
  const LearParams pt{config.rho_t, config.delta_frac * st.range()};
  const LearParams ps{config.rho_s, config.delta_frac * ss.range()};
  const Matrix gamma = lear_corr(lattice_dist(t_i, config.time_spacing), st, pt);
  const Matrix omega = lear_corr(lattice_dist(s_i, config.space_spacing), ss, ps);

  // chol(G (x) O) = chol(G) (x) chol(O)
  const Matrix l_kron =
      std::sqrt(config.sigma2) * kron(cholesky(gamma).lower(), cholesky(omega).lower());

  const bool second_group = config.scenario == Scenario::two_group &&
                            subject_index >= (config.n_subjects + 1) / 2;
  const int p = config.scenario == Scenario::two_group ? 2 : 1;
  sub.x = Matrix::Zero(t_i * s_i, p);
  sub.x.col(0).setOnes();
  if (config.scenario == Scenario::two_group && second_group) sub.x.col(1).setOnes();
  double mean_value = config.beta[0];
  if (config.scenario == Scenario::two_group && second_group) mean_value += config.beta[1];
  const Vector mean = Vector::Constant(t_i * s_i, mean_value);

  sub.y = mvn_sample(mean, CholFactor(l_kron), rng);
  return sub;
}

Dataset make_replicate(const SimConfig& config, int rep) {
  validate(config);
  RngStream rng(config.seed, static_cast<std::uint64_t>(rep));
  Dataset ds;
  ds.p = config.scenario == Scenario::two_group ? 2 : 1;
  ds.design_names = {"intercept"};
  if (config.scenario == Scenario::two_group) ds.design_names.push_back("group");
  ds.covariate_names = config.scenario == Scenario::two_group
                           ? std::vector<std::string>{"group"}
                           : std::vector<std::string>{};
  ds.coord_names = {"loc_x"};
  for (int i = 0; i < config.n_subjects; ++i) ds.subjects.push_back(gen_subject(config, i, rng));

  int t_obs = 0, s_obs = 0;
  for (const auto& sub : ds.subjects) {
    t_obs = std::max(t_obs, sub.t());
    s_obs = std::max(s_obs, sub.s());
  }
  ds.t_max = t_obs;
  ds.s_max = s_obs;
  ds.grid_times = Vector(t_obs);
  for (int j = 0; j < t_obs; ++j) ds.grid_times(j) = j * config.time_spacing;
  ds.grid_locs = Matrix(s_obs, 1);
  for (int l = 0; l < s_obs; ++l) {
    ds.grid_locs(l, 0) = l * config.space_spacing;
    ds.grid_loc_ids.push_back(l * config.space_spacing);
  }
  if (ds.n_subjects() <= ds.max_ts())
    ds.warnings.push_back("subject count N=" + std::to_string(ds.n_subjects()) +
                          " does not exceed max_i(t_i*s_i)=" + std::to_string(ds.max_ts()) +
                          "; the test assumes N > max_i(t_i*s_i)");
  return ds;
}

namespace {

int thread_count(const SimConfig& config) {
  if (config.threads > 0) return config.threads;
  if (const char* env = std::getenv("SEPLRT_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

SimResult run_study(const SimConfig& config) {
  validate(config);
  const auto start_time = std::chrono::steady_clock::now();

  std::vector<RepLog> logs(config.reps);
  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::atomic<int> conv{0};
  std::atomic<bool> abort_flag{false};

  auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= config.reps || abort_flag.load()) break;
      RepLog log;
      log.rep = r;
      try {
        const Dataset ds = make_replicate(config, r);
        const LrtResult t = run_test(ds, config.alpha, AdjustmentSet{}, config.fit);
        log.converged = true;
        log.stat = t.stat;
        log.reject_unadjusted = t.reject_unadjusted.value_or(false);
        log.reject_k1 = t.reject_k1.value_or(false);
        log.reject_k2 = t.reject_k2.value_or(false);
      } catch (const Error& e) {
        log.converged = false;
        log.failure = e.kind();
      }
      logs[r] = log;
      const int c = conv.fetch_add(log.converged ? 1 : 0) + (log.converged ? 1 : 0);
      const int d = done.fetch_add(1) + 1;
      if (d >= 50 && static_cast<double>(c) < 0.10 * static_cast<double>(d))
        abort_flag.store(true);
    }
  };

  const int nthreads = std::min(thread_count(config), config.reps);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (abort_flag.load()) {
    const int d = done.load();
    const int c = conv.load();
    throw StudyAborted("run_study: convergence rate " + std::to_string(c) + "/" +
                       std::to_string(d) +
                       " fell below 10% after at least 50 replicates; results at this "
                       "configuration would not be trustworthy and a more parsimonious "
                       "covariance model is indicated");
  }

  SimResult res;
  int n_rej_u = 0, n_rej_k1 = 0, n_rej_k2 = 0;
  for (const auto& log : logs) {
    if (log.converged) {
      ++res.converged_reps;
      n_rej_u += log.reject_unadjusted ? 1 : 0;
      n_rej_k1 += log.reject_k1 ? 1 : 0;
      n_rej_k2 += log.reject_k2 ? 1 : 0;
    } else {
      ++res.failed_reps;
    }
  }
  if (res.converged_reps > 0) {
    const double m = static_cast<double>(res.converged_reps);
    auto rate_se = [&](int count) {
      const double p = static_cast<double>(count) / m;
      return std::make_pair(p, std::sqrt(p * (1.0 - p) / m));
    };
    auto [ru, su] = rate_se(n_rej_u);
    auto [r1, s1] = rate_se(n_rej_k1);
    auto [r2, s2] = rate_se(n_rej_k2);
    res.rate_unadjusted = ru;
    res.se_unadjusted = su;
    res.rate_k1 = r1;
    res.se_k1 = s1;
    res.rate_k2 = r2;
    res.se_k2 = s2;
  }
  if (config.keep_rep_log) res.rep_log = std::move(logs);
  res.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  return res;
}

}  // namespace seplrt
