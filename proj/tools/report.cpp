#include "report.hpp"

#include "seplrt/version.hpp"

namespace seplrt::report {

namespace {

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json opt(const std::optional<bool>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json skeleton(const std::string& command) {
  json report;
  report["command"] = command;
  report["version"] = SEPLRT_VERSION;
  return report;
}

json input_digest(const Dataset& dataset, const std::string& path) {
  json digest;
  digest["path"] = path;
  digest["rows"] = dataset.n_obs();
  digest["n_subjects"] = dataset.n_subjects();
  digest["n_obs"] = dataset.n_obs();
  digest["p"] = dataset.p;
  digest["t_max"] = dataset.t_max;
  digest["s_max"] = dataset.s_max;
  digest["max_ts"] = dataset.max_ts();
  digest["design"] = dataset.design_names;
  return digest;
}

json fit_block(const NullFitResult& fit) {
  json block;
  block["beta"] = vector_to_json(fit.beta);
  block["rho_t"] = fit.params.tau_t.rho;
  block["delta_t"] = fit.params.tau_t.delta;
  block["rho_s"] = fit.params.tau_s.rho;
  block["delta_s"] = fit.params.tau_s.delta;
  block["sigma2"] = fit.params.sigma2;
  block["loglik"] = fit.loglik;
  block["profile_loglik"] = fit.profile_loglik;
  block["iterations"] = fit.iterations;
  block["converged"] = fit.converged;
  block["grad_norm"] = fit.grad_norm;
  return block;
}

json fit_block(const AltFitResult& fit) {
  json block;
  block["beta"] = vector_to_json(fit.beta);
  block["dim"] = fit.cov.dim();
  block["covariance"] = matrix_to_json(fit.cov.matrix());
  block["loglik"] = fit.loglik;
  block["iterations"] = fit.iterations;
  block["converged"] = fit.converged;
  block["grad_norm"] = fit.grad_norm;
  return block;
}

json test_block(const LrtResult& result) {
  json block;
  block["stat"] = result.stat;
  block["nu"] = result.nu;
  block["k1"] = result.k1;
  block["k2"] = result.k2;
  block["alpha"] = result.alpha;
  block["p_unadjusted"] = opt(result.p_unadjusted);
  block["p_k1"] = opt(result.p_k1);
  block["p_k2"] = opt(result.p_k2);
  block["reject_unadjusted"] = opt(result.reject_unadjusted);
  block["reject_k1"] = opt(result.reject_k1);
  block["reject_k2"] = opt(result.reject_k2);
  return block;
}

json simulation_block(const SimConfig& config, const SimResult& result, bool include_rep_log) {
  json cfg;
  cfg["n_subjects"] = config.n_subjects;
  cfg["t_max"] = config.t_max;
  cfg["s_max"] = config.s_max;
  cfg["rho_t"] = config.rho_t;
  cfg["rho_s"] = config.rho_s;
  cfg["delta_frac"] = config.delta_frac;
  cfg["sigma2"] = config.sigma2;
  cfg["scenario"] = config.scenario == Scenario::two_group ? "two_group" : "null";
  cfg["beta"] = config.beta;
  cfg["reps"] = config.reps;
  cfg["alpha"] = config.alpha;
  cfg["time_spacing"] = config.time_spacing;
  cfg["space_spacing"] = config.space_spacing;
  cfg["imbalance"] = config.imbalance;

  json block;
  block["config"] = cfg;
  block["converged_reps"] = result.converged_reps;
  block["failed_reps"] = result.failed_reps;
  block["rate_unadjusted"] = opt(result.rate_unadjusted);
  block["rate_k1"] = opt(result.rate_k1);
  block["rate_k2"] = opt(result.rate_k2);
  block["mc_se_unadjusted"] = opt(result.se_unadjusted);
  block["mc_se_k1"] = opt(result.se_k1);
  block["mc_se_k2"] = opt(result.se_k2);
  if (include_rep_log) {
    json log = json::array();
    for (const auto& rep : result.rep_log) {
      json entry;
      entry["rep"] = rep.rep;
      entry["converged"] = rep.converged;
      if (rep.converged) {
        entry["stat"] = rep.stat;
        entry["reject_unadjusted"] = rep.reject_unadjusted;
        entry["reject_k1"] = rep.reject_k1;
        entry["reject_k2"] = rep.reject_k2;
      } else {
        entry["failure"] = rep.failure;
      }
      log.push_back(entry);
    }
    block["rep_log"] = log;
  }
  return block;
}

json error_block(const std::string& kind, const std::string& message) {
  json err;
  err["error"] = kind;
  err["message"] = message;
  return err;
}

void finish(json& report, const std::vector<std::string>& warnings, double runtime_seconds) {
  report["warnings"] = warnings;
  report["runtime_seconds"] = runtime_seconds;
}

}  // namespace seplrt::report
