#include "seplrt/fit_null.hpp"

#include <cmath>
#include <map>
#include <optional>

#include "optim_detail.hpp"

namespace seplrt {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Applies (Gamma^-1 (x) Omega^-1) to a time-major vector through the
// reshape identity (A (x) B) vec(V) = vec(B V A'): the s x t column-major
// view of a time-major vector is exactly vec^-1.
Matrix kron_inv_apply(const SubjectFactors& f, const Eigen::Map<const Matrix>& v) {
  Matrix m1 = f.omega.solve(Matrix(v));          // Omega^-1 V, s x t
  Matrix m2 = f.gamma.solve(Matrix(m1.transpose()));  // Gamma^-1 V' Omega^-1, t x s
  return m2.transpose();                         // s x t
}

double quad_form(const SubjectFactors& f, const Vector& r, int t, int s) {
  Eigen::Map<const Matrix> v(r.data(), s, t);
  // r' (G^-1 (x) O^-1) r = || Lg^-1 (Lo^-1 V)' ||_F^2
  Matrix b = f.omega.lower().triangularView<Eigen::Lower>().solve(Matrix(v));
  Matrix c = f.gamma.lower().triangularView<Eigen::Lower>().solve(Matrix(b.transpose()));
  return c.squaredNorm();
}

double subject_logdet(const SubjectFactors& f, int t, int s) {
  return static_cast<double>(s) * f.gamma.log_det() + static_cast<double>(t) * f.omega.log_det();
}

struct Scales {
  DistanceScale temporal;
  DistanceScale spatial;
};

Scales data_scales(const Dataset& dataset) {
  return Scales{distance_scale(dataset, Factor::temporal),
                distance_scale(dataset, Factor::spatial)};
}

}  // namespace

std::vector<SubjectFactors> build_null_factors(const Dataset& dataset, const LearTau& tau) {
  if (dataset.subjects.empty()) throw EmptyDataset("build_null_factors: no subjects");
  // a factor with no pairwise distance anywhere degenerates to 1x1 blocks;
  // the scale is then irrelevant, any positive placeholder works
  DistanceScale st{1.0, 1.0}, ss{1.0, 1.0};
  try {
    st = distance_scale(dataset, Factor::temporal);
  } catch (const DegenerateFactor&) {}
  try {
    ss = distance_scale(dataset, Factor::spatial);
  } catch (const DegenerateFactor&) {}

  std::vector<SubjectFactors> out;
  out.reserve(dataset.subjects.size());
  for (const auto& sub : dataset.subjects) {
    Matrix gamma = lear_corr(time_dist(sub), st, tau.tau_t);
    Matrix omega = lear_corr(loc_dist(sub), ss, tau.tau_s);
    out.push_back(SubjectFactors{cholesky(gamma), cholesky(omega)});
  }
  return out;
}

Vector gls_beta(const Dataset& dataset, const std::vector<SubjectFactors>& factors) {
  if (factors.size() != dataset.subjects.size())
    throw DimensionMismatch("gls_beta: one factor pair per subject required");
  const int p = dataset.p;
  Matrix a = Matrix::Zero(p, p);
  Vector b = Vector::Zero(p);
  for (size_t i = 0; i < dataset.subjects.size(); ++i) {
    const auto& sub = dataset.subjects[i];
    const int t = sub.t(), s = sub.s();
    Matrix wx(sub.obs(), p);
    for (int c = 0; c < p; ++c) {
      Eigen::Map<const Matrix> v(sub.x.col(c).data(), s, t);
      Matrix w = kron_inv_apply(factors[i], v);
      wx.col(c) = Eigen::Map<const Vector>(w.data(), sub.obs());
    }
    a.noalias() += sub.x.transpose() * wx;
    b.noalias() += wx.transpose() * sub.y;
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw SingularNormalEquations("gls_beta: weighted cross-product is singular");
  return llt.solve(b);
}

namespace {

double quad_sum(const Dataset& dataset, const Vector& beta,
                const std::vector<SubjectFactors>& factors) {
  double q = 0.0;
  for (size_t i = 0; i < dataset.subjects.size(); ++i) {
    const auto& sub = dataset.subjects[i];
    const Vector r = residuals(sub, beta);
    q += quad_form(factors[i], r, sub.t(), sub.s());
  }
  return q;
}

double logdet_sum(const Dataset& dataset, const std::vector<SubjectFactors>& factors) {
  double ld = 0.0;
  for (size_t i = 0; i < dataset.subjects.size(); ++i)
    ld += subject_logdet(factors[i], dataset.subjects[i].t(), dataset.subjects[i].s());
  return ld;
}

}  // namespace

double sigma2_hat(const Dataset& dataset, const Vector& beta,
                  const std::vector<SubjectFactors>& factors) {
  return quad_sum(dataset, beta, factors) / static_cast<double>(dataset.n_obs());
}

double profile_loglik(const Dataset& dataset, const Vector& beta,
                      const std::vector<SubjectFactors>& factors) {
  const double n = static_cast<double>(dataset.n_obs());
  const double q = quad_sum(dataset, beta, factors);
  if (!(q > 0.0))
    throw DegenerateResiduals("profile_loglik: residual quadratic form is not positive");
  return -0.5 * n * kLog2Pi - 0.5 * logdet_sum(dataset, factors) - 0.5 * n * std::log(q / n) -
         0.5 * n;
}

double full_loglik(const Dataset& dataset, const Vector& beta, double sigma2,
                   const std::vector<SubjectFactors>& factors) {
  if (!(sigma2 > 0.0)) throw DomainError("full_loglik: sigma2 must be positive");
  const double n = static_cast<double>(dataset.n_obs());
  const double q = quad_sum(dataset, beta, factors);
  double ld = 0.0;
  for (size_t i = 0; i < dataset.subjects.size(); ++i)
    ld += dataset.subjects[i].obs() * std::log(sigma2) +
          subject_logdet(factors[i], dataset.subjects[i].t(), dataset.subjects[i].s());
  return -0.5 * n * kLog2Pi - 0.5 * ld - 0.5 * q / sigma2;
}

Vector gls_beta(const Dataset& dataset, const LearTau& tau) {
  return gls_beta(dataset, build_null_factors(dataset, tau));
}
double sigma2_hat(const Dataset& dataset, const Vector& beta, const LearTau& tau) {
  return sigma2_hat(dataset, beta, build_null_factors(dataset, tau));
}
double profile_loglik(const Dataset& dataset, const Vector& beta, const LearTau& tau) {
  return profile_loglik(dataset, beta, build_null_factors(dataset, tau));
}
double full_loglik(const Dataset& dataset, const Vector& beta, double sigma2,
                   const LearTau& tau) {
  return full_loglik(dataset, beta, sigma2, build_null_factors(dataset, tau));
}

// ---------------------------------------------------------------------------
// fit_null internals: subjects sharing a (times, locations) pattern share the
// same factor matrices, so correlations are built and factored once per
// pattern and per parameter point.

namespace {

struct Pattern {
  Matrix dist;
  int size = 0;                    // matrix dimension
  std::vector<int> members;        // subject indices
};

struct PatternedFactors {
  std::vector<std::optional<CholFactor>> tchol, schol;
  bool ok = false;
};

class NullContext {
public:
  NullContext(const Dataset& dataset, Scales scales)
      : data_(dataset), scales_(scales), n_(static_cast<double>(dataset.n_obs())) {
    group(true);
    group(false);
    tpat_of_.resize(dataset.subjects.size());
    spat_of_.resize(dataset.subjects.size());
    for (size_t g = 0; g < tpats_.size(); ++g)
      for (int i : tpats_[g].members) tpat_of_[i] = static_cast<int>(g);
    for (size_t g = 0; g < spats_.size(); ++g)
      for (int i : spats_[g].members) spat_of_[i] = static_cast<int>(g);
  }

  // Builds per-pattern factors at tau; false when some pattern is not PD.
  bool factorize(const LearTau& tau, PatternedFactors& out) const {
    out.tchol.assign(tpats_.size(), std::nullopt);
    out.schol.assign(spats_.size(), std::nullopt);
    out.ok = false;
    try {
      for (size_t g = 0; g < tpats_.size(); ++g)
        out.tchol[g].emplace(cholesky(lear_corr(tpats_[g].dist, scales_.temporal, tau.tau_t)));
      for (size_t g = 0; g < spats_.size(); ++g)
        out.schol[g].emplace(cholesky(lear_corr(spats_[g].dist, scales_.spatial, tau.tau_s)));
    } catch (const NotPositiveDefinite&) {
      return false;
    }
    out.ok = true;
    return true;
  }

  Vector gls(const PatternedFactors& f) const {
    const int p = data_.p;
    Matrix a = Matrix::Zero(p, p);
    Vector b = Vector::Zero(p);
    for (size_t i = 0; i < data_.subjects.size(); ++i) {
      const auto& sub = data_.subjects[i];
      const SubjectFactors fac{*f.tchol[tpat_of_[i]], *f.schol[spat_of_[i]]};
      Matrix wx(sub.obs(), p);
      for (int c = 0; c < p; ++c) {
        Eigen::Map<const Matrix> v(sub.x.col(c).data(), sub.s(), sub.t());
        Matrix w = kron_inv_apply(fac, v);
        wx.col(c) = Eigen::Map<const Vector>(w.data(), sub.obs());
      }
      a.noalias() += sub.x.transpose() * wx;
      b.noalias() += wx.transpose() * sub.y;
    }
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success)
      throw SingularNormalEquations("fit_null: weighted cross-product is singular");
    return llt.solve(b);
  }

  void set_residuals(const Vector& beta) {
    resid_.resize(data_.subjects.size());
    for (size_t i = 0; i < data_.subjects.size(); ++i)
      resid_[i] = residuals(data_.subjects[i], beta);
  }

  // Profile log-likelihood at the cached residuals; NaN when inadmissible.
  double lp(const PatternedFactors& f) const {
    double q = 0.0, ld = 0.0;
    for (size_t i = 0; i < data_.subjects.size(); ++i) {
      const auto& sub = data_.subjects[i];
      const SubjectFactors fac{*f.tchol[tpat_of_[i]], *f.schol[spat_of_[i]]};
      q += quad_form(fac, resid_[i], sub.t(), sub.s());
      ld += subject_logdet(fac, sub.t(), sub.s());
    }
    if (!(q > 0.0))
      throw DegenerateResiduals("fit_null: residual quadratic form is not positive");
    return -0.5 * n_ * kLog2Pi - 0.5 * ld - 0.5 * n_ * std::log(q / n_) - 0.5 * n_;
  }

  double lp_at(const LearTau& tau) const {
    PatternedFactors f;
    if (!factorize(tau, f)) return std::numeric_limits<double>::quiet_NaN();
    return lp(f);
  }

  // Analytic gradient of lp in tau = (rho_t, delta_t, rho_s, delta_s) at the
  // cached residuals, natural scale. Uses
  //   d/dG [r' (G^-1 (x) O^-1) r] = -K_g,  K_g = G^-1 (V' O^-1 V) G^-1
  // and its spatial counterpart, with V the s x t reshape of r.
  Vector lp_grad_natural(const LearTau& tau, const PatternedFactors& f) const {
    std::vector<Matrix> tk(tpats_.size()), sk(spats_.size());
    for (size_t g = 0; g < tpats_.size(); ++g) tk[g] = Matrix::Zero(tpats_[g].size, tpats_[g].size);
    for (size_t g = 0; g < spats_.size(); ++g) sk[g] = Matrix::Zero(spats_[g].size, spats_[g].size);

    double q_total = 0.0;
    for (size_t i = 0; i < data_.subjects.size(); ++i) {
      const auto& sub = data_.subjects[i];
      const int t = sub.t(), s = sub.s();
      const CholFactor& cg = *f.tchol[tpat_of_[i]];
      const CholFactor& co = *f.schol[spat_of_[i]];
      Eigen::Map<const Matrix> v(resid_[i].data(), s, t);
      Matrix oinv_v = co.solve(Matrix(v));                        // s x t
      Matrix ginv_vt = cg.solve(Matrix(v.transpose()));           // t x s
      Matrix inner_t = v.transpose() * oinv_v;                    // t x t, symmetric
      q_total += cg.solve(inner_t).trace();
      tk[tpat_of_[i]] += cg.solve(Matrix(cg.solve(inner_t).transpose()));
      Matrix inner_s = v * ginv_vt;                               // s x s, symmetric
      sk[spat_of_[i]] += co.solve(Matrix(co.solve(inner_s).transpose()));
    }

    Vector grad = Vector::Zero(4);
    // temporal factor
    for (size_t g = 0; g < tpats_.size(); ++g) {
      if (tpats_[g].size < 2) continue;
      auto [d_rho, d_delta] = lear_corr_grad(tpats_[g].dist, scales_.temporal, tau.tau_t);
      const CholFactor& cg = *f.tchol[g];
      Matrix ginv = cg.solve(Matrix(Matrix::Identity(tpats_[g].size, tpats_[g].size)));
      // sum over members of s_i * tr(G^-1 dG) for the log-det part
      double s_weight = 0.0;
      for (int i : tpats_[g].members) s_weight += data_.subjects[i].s();
      const double tr_rho = (ginv.array() * d_rho.array()).sum();
      const double tr_delta = (ginv.array() * d_delta.array()).sum();
      const double kq_rho = (tk[g].array() * d_rho.array()).sum();
      const double kq_delta = (tk[g].array() * d_delta.array()).sum();
      grad(0) += -0.5 * s_weight * tr_rho + 0.5 * n_ / q_total * kq_rho;
      grad(1) += -0.5 * s_weight * tr_delta + 0.5 * n_ / q_total * kq_delta;
    }
    // spatial factor
    for (size_t g = 0; g < spats_.size(); ++g) {
      if (spats_[g].size < 2) continue;
      auto [d_rho, d_delta] = lear_corr_grad(spats_[g].dist, scales_.spatial, tau.tau_s);
      const CholFactor& co = *f.schol[g];
      Matrix oinv = co.solve(Matrix(Matrix::Identity(spats_[g].size, spats_[g].size)));
      double t_weight = 0.0;
      for (int i : spats_[g].members) t_weight += data_.subjects[i].t();
      const double tr_rho = (oinv.array() * d_rho.array()).sum();
      const double tr_delta = (oinv.array() * d_delta.array()).sum();
      const double kq_rho = (sk[g].array() * d_rho.array()).sum();
      const double kq_delta = (sk[g].array() * d_delta.array()).sum();
      grad(2) += -0.5 * t_weight * tr_rho + 0.5 * n_ / q_total * kq_rho;
      grad(3) += -0.5 * t_weight * tr_delta + 0.5 * n_ / q_total * kq_delta;
    }
    return grad;
  }

  const Scales& scales() const { return scales_; }
  const Dataset& data() const { return data_; }

private:
  void group(bool temporal) {
    auto& pats = temporal ? tpats_ : spats_;
    std::map<std::vector<double>, int> seen;
    for (size_t i = 0; i < data_.subjects.size(); ++i) {
      const auto& sub = data_.subjects[i];
      std::vector<double> key;
      if (temporal) {
        key.assign(sub.times.data(), sub.times.data() + sub.times.size());
      } else {
        key.assign(sub.locs.data(), sub.locs.data() + sub.locs.size());
        key.push_back(static_cast<double>(sub.s()));
      }
      auto it = seen.find(key);
      if (it == seen.end()) {
        Pattern p;
        p.dist = temporal ? time_dist(sub) : loc_dist(sub);
        p.size = static_cast<int>(p.dist.rows());
        p.members = {static_cast<int>(i)};
        seen[key] = static_cast<int>(pats.size());
        pats.push_back(std::move(p));
      } else {
        pats[it->second].members.push_back(static_cast<int>(i));
      }
    }
  }

  const Dataset& data_;
  Scales scales_;
  double n_;
  std::vector<Pattern> tpats_, spats_;
  std::vector<int> tpat_of_, spat_of_;
  std::vector<Vector> resid_;
};

// transformed scale: theta = (logit rho_t, log delta_t, logit rho_s, log delta_s)
double logit(double p) { return std::log(p / (1.0 - p)); }
double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

LearTau untransform(const Vector& theta) {
  LearTau tau;
  tau.tau_t.rho = sigmoid(theta(0));
  tau.tau_t.delta = std::exp(theta(1));
  tau.tau_s.rho = sigmoid(theta(2));
  tau.tau_s.delta = std::exp(theta(3));
  return tau;
}

Vector transform(const LearTau& tau) {
  Vector theta(4);
  theta(0) = logit(tau.tau_t.rho);
  theta(1) = std::log(tau.tau_t.delta);
  theta(2) = logit(tau.tau_s.rho);
  theta(3) = std::log(tau.tau_s.delta);
  return theta;
}

void clamp_theta(Vector& theta) {
  for (Eigen::Index j = 0; j < theta.size(); ++j)
    theta(j) = std::clamp(theta(j), -40.0, 40.0);
}

// Starting rho: pooled lag-one product-moment correlation of OLS residuals
// along one factor, clamped to [0.05, 0.95].
double start_rho(const Dataset& dataset, const std::vector<Vector>& resid, bool temporal) {
  double cross = 0.0, ss = 0.0;
  long n_pairs = 0, n_obs = 0;
  for (size_t i = 0; i < dataset.subjects.size(); ++i) {
    const auto& sub = dataset.subjects[i];
    const Vector& r = resid[i];
    const int t = sub.t(), s = sub.s();
    ss += r.squaredNorm();
    n_obs += r.size();
    if (temporal) {
      for (int j = 0; j + 1 < t; ++j)
        for (int l = 0; l < s; ++l) {
          cross += r(j * s + l) * r((j + 1) * s + l);
          ++n_pairs;
        }
    } else {
      for (int j = 0; j < t; ++j)
        for (int l = 0; l + 1 < s; ++l) {
          cross += r(j * s + l) * r(j * s + l + 1);
          ++n_pairs;
        }
    }
  }
  if (n_pairs == 0 || ss <= 0.0) return 0.5;
  const double rho = (cross / static_cast<double>(n_pairs)) / (ss / static_cast<double>(n_obs));
  return std::clamp(rho, 0.05, 0.95);
}

}  // namespace

NullFitResult fit_null(const Dataset& dataset, const FitOptions& options) {
  if (dataset.subjects.empty()) throw EmptyDataset("fit_null: dataset has no subjects");

  Scales scales;
  try {
    scales.temporal = distance_scale(dataset, Factor::temporal);
  } catch (const DegenerateFactor&) {
    throw AllStartsInadmissible(
        "fit_null: temporal factor is inestimable (every subject has a single time point), "
        "so no LEAR temporal correlation can be identified");
  }
  try {
    scales.spatial = distance_scale(dataset, Factor::spatial);
  } catch (const DegenerateFactor&) {
    throw AllStartsInadmissible(
        "fit_null: spatial factor is inestimable (every subject has a single location), "
        "so no LEAR spatial correlation can be identified");
  }

  NullContext ctx(dataset, scales);

  // OLS residuals drive the starting values
  std::vector<Vector> ols_resid(dataset.subjects.size());
  {
    LearTau id{};  // rho = 0 gives identity correlations
    Vector beta0 = gls_beta(dataset, build_null_factors(dataset, id));
    for (size_t i = 0; i < dataset.subjects.size(); ++i)
      ols_resid[i] = residuals(dataset.subjects[i], beta0);
  }
  const double rho0_t = start_rho(dataset, ols_resid, true);
  const double rho0_s = start_rho(dataset, ols_resid, false);
  const double range_t = scales.temporal.range();
  const double range_s = scales.spatial.range();
  auto delta_start = [](double range, double frac) {
    return range > 0.0 ? std::max(frac * range, 1e-8) : 1.0;
  };
  std::vector<LearTau> starts = {
      {{rho0_t, delta_start(range_t, 0.5)}, {rho0_s, delta_start(range_s, 0.5)}},
      {{rho0_t, delta_start(range_t, 1.0)}, {rho0_s, delta_start(range_s, 1.0)}},   // AR(1)-style
      {{rho0_t, delta_start(range_t, 0.01)}, {rho0_s, delta_start(range_s, 0.01)}}, // near compound symmetry
  };

  std::optional<NullFitResult> best;
  bool any_admissible = false;

  for (const auto& start : starts) {
    Vector theta = transform(start);
    clamp_theta(theta);

    PatternedFactors facs;
    if (!ctx.factorize(untransform(theta), facs)) continue;
    any_admissible = true;

    NullFitResult res;
    Vector beta = ctx.gls(facs);
    ctx.set_residuals(beta);
    double lp = ctx.lp(facs);
    res.trace.push_back(lp);

    auto objective = [&](const Vector& th) -> double {
      Vector t2 = th;
      clamp_theta(t2);
      try {
        return ctx.lp_at(untransform(t2));
      } catch (const DegenerateResiduals&) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    };
    auto gradient = [&](const Vector& th) -> Vector {
      if (options.analytic_gradient) {
        Vector t2 = th;
        clamp_theta(t2);
        PatternedFactors f2;
        LearTau tau = untransform(t2);
        if (!ctx.factorize(tau, f2)) return detail::fd_gradient(objective, th, options.fd_step, objective(th));
        Vector gn = ctx.lp_grad_natural(tau, f2);
        // chain rule onto the transformed scale
        Vector g(4);
        g(0) = gn(0) * tau.tau_t.rho * (1.0 - tau.tau_t.rho);
        g(1) = gn(1) * tau.tau_t.delta;
        g(2) = gn(2) * tau.tau_s.rho * (1.0 - tau.tau_s.rho);
        g(3) = gn(3) * tau.tau_s.delta;
        return g;
      }
      return detail::fd_gradient(objective, th, options.fd_step, objective(th));
    };

    double rel_change = std::numeric_limits<double>::infinity();
    bool converged = false;
    int it = 0;
    Vector g = gradient(theta);
    while (it < options.max_iter) {
      ++it;
      res.grad_norm = g.norm();
      if (res.grad_norm < options.grad_tol && rel_change < options.rel_tol) {
        converged = true;
        --it;
        break;
      }
      Matrix hess = detail::fd_hessian(gradient, theta, options.fd_step, g);
      Vector dir = detail::ascent_direction(hess, g);
      detail::cap_inf_norm(dir, 5.0);
      auto step = detail::backtrack(objective, theta, dir, lp, options.max_halvings);
      if (!step) {
        Vector steep = g;
        detail::cap_inf_norm(steep, 0.5);
        step = detail::backtrack(objective, theta, steep, lp, options.max_halvings);
      }
      if (!step) break;  // no direction improves: FD noise floor reached
      theta = step->theta;
      clamp_theta(theta);
      // alternation: refresh beta at the new tau, then re-evaluate
      PatternedFactors f2;
      ctx.factorize(untransform(theta), f2);
      beta = ctx.gls(f2);
      ctx.set_residuals(beta);
      const double lp_new = ctx.lp(f2);
      rel_change = std::abs(lp_new - lp) / (1.0 + std::abs(lp));
      lp = lp_new;
      res.trace.push_back(lp);
      g = gradient(theta);
      res.grad_norm = g.norm();
      if (res.grad_norm < options.grad_tol && rel_change < options.rel_tol) {
        converged = true;
        break;
      }
    }

    const LearTau tau = untransform(theta);
    res.beta = beta;
    res.params.tau_t = tau.tau_t;
    res.params.tau_s = tau.tau_s;
    PatternedFactors f_final;
    ctx.factorize(tau, f_final);
    ctx.set_residuals(beta);
    res.profile_loglik = ctx.lp(f_final);
    const auto factors = build_null_factors(dataset, tau);
    res.params.sigma2 = sigma2_hat(dataset, beta, factors);
    if (!(res.params.sigma2 > 0.0))
      throw DegenerateResiduals("fit_null: sigma2 estimate is not positive");
    res.loglik = full_loglik(dataset, beta, res.params.sigma2, factors);
    res.iterations = it;
    res.converged = converged;

    const double b = 1e-3;
    auto near_boundary = [&](const LearParams& p) {
      return p.rho < b || p.rho > 1.0 - b || p.delta < b;
    };
    if (near_boundary(res.params.tau_t) || near_boundary(res.params.tau_s))
      res.warnings.push_back(
          "estimated covariance parameters lie within 1e-3 of the parameter-space boundary; "
          "the chi-square reference for -2lnLambda becomes a mixture of chi-square "
          "distributions in that case and reported p-values may be inaccurate");

    const bool better =
        !best || (res.converged && !best->converged) ||
        (res.converged == best->converged && res.profile_loglik > best->profile_loglik);
    if (better) best = std::move(res);
  }

  if (!any_admissible)
    throw AllStartsInadmissible(
        "fit_null: every starting value produced a non-positive-definite LEAR correlation");
  return *best;
}

}  // namespace seplrt
