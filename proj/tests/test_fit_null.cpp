#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "grid_oracle.hpp"
#include "oracles.hpp"
#include "seplrt/fit_null.hpp"
#include "seplrt/simulate.hpp"
#include "testdata.hpp"

using namespace seplrt;

namespace {

std::vector<SubjectFactors> identity_factors(const Dataset& ds) {
  std::vector<SubjectFactors> f;
  for (const auto& sub : ds.subjects)
    f.push_back(SubjectFactors{CholFactor(Matrix::Identity(sub.t(), sub.t())),
                               CholFactor(Matrix::Identity(sub.s(), sub.s()))});
  return f;
}

Matrix assemble_weight(const SubjectFactors& f) {
  const int t = static_cast<int>(f.gamma.dim());
  const int s = static_cast<int>(f.omega.dim());
  const Matrix gamma = f.gamma.lower() * f.gamma.lower().transpose();
  const Matrix omega = f.omega.lower() * f.omega.lower().transpose();
  return kron(gamma, omega).inverse();  // dense route, test-only
}

}  // namespace

TEST_CASE("gls_beta: identity weights give the grand mean") {
  const Dataset ds = testdata::balanced_lear(20, 3, 2, 0.8, 0.8, 0.25, 1.0, 101, 2.5);
  const Vector beta = gls_beta(ds, identity_factors(ds));
  double total = 0.0;
  long n = 0;
  for (const auto& sub : ds.subjects) {
    total += sub.y.sum();
    n += sub.obs();
  }
  CHECK(beta(0) == doctest::Approx(total / n).epsilon(1e-12));
}

TEST_CASE("gls_beta: dense-assembly oracle and scale invariance") {
  const Dataset ds = testdata::balanced_lear(2, 2, 2, 0.7, 0.5, 0.3, 1.3, 103, 1.0);
  const LearTau tau{{0.6, 0.8}, {0.4, 0.5}};
  const auto factors = build_null_factors(ds, tau);
  const Vector beta = gls_beta(ds, factors);

  // hand-assembled GLS with explicit Kronecker inverses
  Matrix a = Matrix::Zero(ds.p, ds.p);
  Vector b = Vector::Zero(ds.p);
  for (size_t i = 0; i < ds.subjects.size(); ++i) {
    const Matrix w = assemble_weight(factors[i]);
    a += ds.subjects[i].x.transpose() * w * ds.subjects[i].x;
    b += ds.subjects[i].x.transpose() * w * ds.subjects[i].y;
  }
  const Vector expected = a.inverse() * b;
  CHECK((beta - expected).cwiseAbs().maxCoeff() < 1e-10);

  // common PD weight, saturated design: GLS equals the per-cell mean
  Dataset sat = ds;
  for (auto& sub : sat.subjects) sub.x = Matrix::Identity(4, 4);
  sat.p = 4;
  sat.design_names = {"c0", "c1", "c2", "c3"};
  const Vector cell = gls_beta(sat, build_null_factors(sat, tau));
  const Vector mean_vec = 0.5 * (sat.subjects[0].y + sat.subjects[1].y);
  CHECK((cell - mean_vec).cwiseAbs().maxCoeff() < 1e-10);

  // scaling the weights leaves beta unchanged
  std::vector<SubjectFactors> scaled;
  for (const auto& f : factors)
    scaled.push_back(SubjectFactors{CholFactor(std::sqrt(7.0) * f.gamma.lower()),
                                    CholFactor(f.omega.lower())});
  const Vector beta2 = gls_beta(ds, scaled);
  CHECK((beta - beta2).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("sigma2_hat: identity reduction, zero residuals, dense oracle") {
  const Dataset ds = testdata::balanced_lear(5, 2, 3, 0.6, 0.6, 0.25, 2.0, 107, 0.5);
  Vector beta(1);
  beta << 0.25;
  const auto id = identity_factors(ds);
  double ssq = 0.0;
  for (const auto& sub : ds.subjects) ssq += residuals(sub, beta).squaredNorm();
  CHECK(sigma2_hat(ds, beta, id) == doctest::Approx(ssq / ds.n_obs()).epsilon(1e-12));

  // interpolating fit: all-zero residuals give zero
  Dataset flat = ds;
  for (auto& sub : flat.subjects) sub.y = Vector::Constant(sub.obs(), 0.25);
  CHECK(sigma2_hat(flat, beta, identity_factors(flat)) == 0.0);
  CHECK_THROWS_AS(profile_loglik(flat, beta, identity_factors(flat)), DegenerateResiduals);

  const LearTau tau{{0.55, 0.4}, {0.35, 1.1}};
  const auto factors = build_null_factors(ds, tau);
  double expected = 0.0;
  for (size_t i = 0; i < ds.subjects.size(); ++i) {
    const Vector r = residuals(ds.subjects[i], beta);
    expected += r.dot(assemble_weight(factors[i]) * r);
  }
  expected /= ds.n_obs();
  CHECK(sigma2_hat(ds, beta, factors) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("log-likelihoods: density oracle, profiling identity, permutation") {
  const Dataset ds = testdata::balanced_lear(4, 3, 2, 0.75, 0.55, 0.3, 1.7, 109, -1.0);
  RngStream rng(211, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const LearTau tau{{0.05 + 0.9 * rng.uniform01(), 0.05 + 2.0 * rng.uniform01()},
                      {0.05 + 0.9 * rng.uniform01(), 0.05 + 2.0 * rng.uniform01()}};
    Vector beta(1);
    beta << 2.0 * rng.normal();
    const double sigma2 = 0.3 + 2.0 * rng.uniform01();
    const auto factors = build_null_factors(ds, tau);

    // generic MVN sum with assembled covariance
    double expected = 0.0;
    for (size_t i = 0; i < ds.subjects.size(); ++i) {
      const auto& sub = ds.subjects[i];
      const Matrix gamma = factors[i].gamma.lower() * factors[i].gamma.lower().transpose();
      const Matrix omega = factors[i].omega.lower() * factors[i].omega.lower().transpose();
      const Matrix cov = sigma2 * kron(gamma, omega);
      expected += oracles::mvn_logpdf(sub.y, sub.x * beta, cov);
    }
    const double full = full_loglik(ds, beta, sigma2, factors);
    CHECK(std::abs(full - expected) < 1e-10 * std::max(1.0, std::abs(expected)));

    // profiling identity at arbitrary (beta, tau), not only optima
    const double s2 = sigma2_hat(ds, beta, factors);
    const double lp = profile_loglik(ds, beta, factors);
    const double full_at_hat = full_loglik(ds, beta, s2, factors);
    CHECK(std::abs(lp - full_at_hat) < 1e-10);
  }

  // invariance under subject reordering
  const LearTau tau{{0.6, 0.7}, {0.5, 0.9}};
  Vector beta(1);
  beta << 0.3;
  Dataset perm = ds;
  std::swap(perm.subjects[0], perm.subjects[3]);
  std::swap(perm.subjects[1], perm.subjects[2]);
  CHECK(full_loglik(ds, beta, 1.1, build_null_factors(ds, tau)) ==
        doctest::Approx(full_loglik(perm, beta, 1.1, build_null_factors(perm, tau)))
            .epsilon(1e-12));

  // single observation: full-likelihood route
  Dataset one;
  one.p = 1;
  one.design_names = {"intercept"};
  SubjectData s1;
  s1.id = "a";
  s1.y = Vector::Constant(1, 1.0);
  s1.x = Matrix::Zero(1, 1);
  s1.times = Vector::Constant(1, 0.0);
  s1.time_grid_idx = {0};
  s1.locs = Matrix::Zero(1, 1);
  s1.loc_grid_idx = {0};
  one.subjects.push_back(s1);
  one.t_max = one.s_max = 1;
  Vector b0 = Vector::Zero(1);
  const double ll1 = full_loglik(one, b0, 1.0, identity_factors(one));
  CHECK(ll1 == doctest::Approx(-0.5 * std::log(2.0 * M_PI) - 0.5).epsilon(1e-12));
}

TEST_CASE("fit_null: consistency at large N") {
  // t=3, s=2 lattice, rho = (0.8, 0.8), delta = range/4, sigma2 = 1
  const Dataset ds = testdata::balanced_lear(5000, 3, 2, 0.8, 0.8, 0.25, 1.0, 42, 0.0);
  FitOptions opts;
  opts.grad_tol = 1e-4;  // FD noise floor scales with |loglik| ~ 4e4
  const NullFitResult fit = fit_null(ds, opts);
  CHECK(fit.converged);
  CHECK(std::abs(fit.params.tau_t.rho - 0.8) < 0.05);
  CHECK(std::abs(fit.params.tau_s.rho - 0.8) < 0.05);
  // temporal scale is (2, 4), so the generating delta is range/4 = 0.5;
  // the two-point spatial lattice has d_min == d_max, which pins the spatial
  // exponent at d_min and leaves delta_s without effect
  CHECK(std::abs(fit.params.tau_t.delta - 0.5) < 0.05);
  CHECK(std::abs(fit.params.sigma2 - 1.0) < 0.05);

  // monotone ascent of the accepted profile log-likelihood sequence
  for (size_t i = 1; i < fit.trace.size(); ++i)
    CHECK(fit.trace[i] >= fit.trace[i - 1] - 1e-8 * (1.0 + std::abs(fit.trace[i - 1])));

  // profiling identity at the optimum
  CHECK(std::abs(fit.profile_loglik - fit.loglik) < 1e-9 * (1.0 + std::abs(fit.loglik)));
}

TEST_CASE("fit_null: grid-search oracle on a tiny patterned instance") {
  const Dataset ds = testdata::tiny_patterned(500);
  FitOptions opts;
  const NullFitResult fit = fit_null(ds, opts);
  CHECK(fit.converged);

  // coarse grid here; the acceptance suite runs the 0.01-resolution search
  const auto grid = oracles::grid_search_2x2(ds, 0.02, 2.0, 0.02);
  CHECK(fit.profile_loglik >= grid.best_lp - 1e-6);
  CHECK(std::abs(fit.profile_loglik - grid.best_lp) <=
        std::max(grid.neighbor_drop, 1e-6));
}

TEST_CASE("fit_null: analytic gradient option agrees with finite differences") {
  const Dataset ds = testdata::balanced_lear(60, 3, 2, 0.7, 0.6, 0.25, 1.5, 55, 0.0);
  FitOptions fd_opts;
  FitOptions an_opts;
  an_opts.analytic_gradient = true;
  const NullFitResult f1 = fit_null(ds, fd_opts);
  const NullFitResult f2 = fit_null(ds, an_opts);
  CHECK(f1.converged);
  CHECK(f2.converged);
  CHECK(std::abs(f1.profile_loglik - f2.profile_loglik) < 1e-6);
  CHECK(std::abs(f1.params.tau_t.rho - f2.params.tau_t.rho) < 1e-3);
  CHECK(std::abs(f1.params.tau_s.rho - f2.params.tau_s.rho) < 1e-3);
}

TEST_CASE("fit_null: external FD gradient at the optimum is small") {
  const Dataset ds = testdata::balanced_lear(80, 2, 2, 0.6, 0.6, 0.25, 1.0, 77, 0.0);
  const FitOptions opts;
  const NullFitResult fit = fit_null(ds, opts);
  CHECK(fit.converged);
  CHECK(fit.grad_norm < opts.grad_tol);

  // recompute the gradient outside the optimizer, through the public op
  auto logit = [](double p) { return std::log(p / (1.0 - p)); };
  Vector theta(4);
  theta << logit(fit.params.tau_t.rho), std::log(fit.params.tau_t.delta),
      logit(fit.params.tau_s.rho), std::log(fit.params.tau_s.delta);
  auto lp_of = [&](const Vector& th) {
    LearTau tau{{1.0 / (1.0 + std::exp(-th(0))), std::exp(th(1))},
                {1.0 / (1.0 + std::exp(-th(2))), std::exp(th(3))}};
    return profile_loglik(ds, fit.beta, tau);
  };
  Vector g(4);
  const double h = opts.fd_step;
  for (int j = 0; j < 4; ++j) {
    Vector up = theta, dn = theta;
    up(j) += h;
    dn(j) -= h;
    g(j) = (lp_of(up) - lp_of(dn)) / (2.0 * h);
  }
  CHECK(std::abs(g.norm() - fit.grad_norm) < 1e-6);
}

TEST_CASE("fit_null: inestimable temporal factor") {
  // every subject has a single time point
  const Dataset ds = testdata::balanced_lear(10, 1, 3, 0.5, 0.5, 0.25, 1.0, 88, 0.0);
  CHECK_THROWS_AS(fit_null(ds), AllStartsInadmissible);
  CHECK_THROWS_WITH_AS(fit_null(ds), doctest::Contains("temporal"), AllStartsInadmissible);
}

TEST_CASE("fit_null: boundary warning near rho = 0") {
  // independent observations: the rho estimates drift to the boundary
  const Dataset ds = testdata::balanced_lear(400, 2, 2, 0.0, 0.0, 0.25, 1.0, 91, 0.0);
  const NullFitResult fit = fit_null(ds);
  bool has_boundary_warning = false;
  for (const auto& w : fit.warnings)
    if (w.find("boundary") != std::string::npos) has_boundary_warning = true;
  if (fit.converged && (fit.params.tau_t.rho < 1e-3 || fit.params.tau_s.rho < 1e-3 ||
                        fit.params.tau_t.delta < 1e-3))
    CHECK(has_boundary_warning);
  // natural-scale constraints hold by construction
  CHECK(fit.params.tau_t.rho >= 0.0);
  CHECK(fit.params.tau_t.rho < 1.0);
  CHECK(fit.params.tau_s.delta >= 0.0);
}

TEST_CASE("fit_null: likelihood invariant to subject permutation") {
  Dataset ds = testdata::balanced_lear(30, 2, 2, 0.6, 0.5, 0.3, 1.0, 93, 0.0);
  const NullFitResult f1 = fit_null(ds);
  Dataset perm = ds;
  for (int i = 0; i < 10; ++i) std::swap(perm.subjects[i], perm.subjects[29 - i]);
  const NullFitResult f2 = fit_null(perm);
  CHECK(std::abs(f1.loglik - f2.loglik) < 1e-7 * (1.0 + std::abs(f1.loglik)));
}
