#include "seplrt/fit_alt.hpp"

#include <cmath>
#include <map>
#include <optional>

#include "optim_detail.hpp"

namespace seplrt {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

inline Eigen::Index tri_size(int d) { return static_cast<Eigen::Index>(d) * (d + 1) / 2; }

}  // namespace

Matrix MaxGridCov::chol_lower() const {
  const int d = dim();
  if (theta.size() != tri_size(d))
    throw DimensionMismatch("MaxGridCov: theta length does not match grid dimension");
  Matrix l = Matrix::Zero(d, d);
  Eigen::Index k = 0;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c <= r; ++c, ++k) l(r, c) = (c == r) ? std::exp(theta(k)) : theta(k);
  return l;
}

Matrix MaxGridCov::matrix() const {
  Matrix l = chol_lower();
  return l * l.transpose();
}

MaxGridCov MaxGridCov::from_matrix(const Matrix& sigma, int t_max, int s_max) {
  if (sigma.rows() != static_cast<Eigen::Index>(t_max) * s_max)
    throw DimensionMismatch("MaxGridCov::from_matrix: matrix does not match grid dimension");
  const Matrix l = cholesky(sigma).lower();
  MaxGridCov cov;
  cov.t_max = t_max;
  cov.s_max = s_max;
  cov.theta = Vector(tri_size(cov.dim()));
  Eigen::Index k = 0;
  for (int r = 0; r < cov.dim(); ++r)
    for (int c = 0; c <= r; ++c, ++k) cov.theta(k) = (c == r) ? std::log(l(r, c)) : l(r, c);
  return cov;
}

namespace {

std::vector<int> selection_indices(const SubjectData& subject, int t_max, int s_max) {
  std::vector<int> idx;
  idx.reserve(subject.obs());
  for (int j = 0; j < subject.t(); ++j) {
    const int tg = subject.time_grid_idx[j];
    if (tg < 0 || tg >= t_max)
      throw DimensionMismatch("select_submatrix: time grid index out of range");
    for (int l = 0; l < subject.s(); ++l) {
      const int lg = subject.loc_grid_idx[l];
      if (lg < 0 || lg >= s_max)
        throw DimensionMismatch("select_submatrix: location grid index out of range");
      idx.push_back(tg * s_max + lg);
    }
  }
  return idx;
}

Matrix select(const Matrix& sigma, const std::vector<int>& idx) {
  const int d = static_cast<int>(idx.size());
  Matrix out(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) out(a, b) = sigma(idx[a], idx[b]);
  return out;
}

}  // namespace

Matrix select_submatrix(const MaxGridCov& cov, const SubjectData& subject) {
  return select(cov.matrix(), selection_indices(subject, cov.t_max, cov.s_max));
}

Vector gls_beta_alt(const Dataset& dataset, const MaxGridCov& cov) {
  const Matrix sigma = cov.matrix();
  const int p = dataset.p;
  Matrix a = Matrix::Zero(p, p);
  Vector b = Vector::Zero(p);
  for (const auto& sub : dataset.subjects) {
    const auto idx = selection_indices(sub, cov.t_max, cov.s_max);
    const CholFactor f = cholesky(select(sigma, idx));
    const Matrix wx = f.solve(sub.x);
    a.noalias() += sub.x.transpose() * wx;
    b.noalias() += wx.transpose() * sub.y;
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw SingularNormalEquations("gls_beta_alt: weighted cross-product is singular");
  return llt.solve(b);
}

double loglik_alt(const Dataset& dataset, const MaxGridCov& cov, const Vector& beta) {
  const Matrix sigma = cov.matrix();
  double ll = 0.0;
  for (const auto& sub : dataset.subjects) {
    const auto idx = selection_indices(sub, cov.t_max, cov.s_max);
    const CholFactor f = cholesky(select(sigma, idx));
    const Vector r = residuals(sub, beta);
    const Vector half = f.lower().triangularView<Eigen::Lower>().solve(r);
    ll += -0.5 * sub.obs() * kLog2Pi - 0.5 * f.log_det() - 0.5 * half.squaredNorm();
  }
  return ll;
}

// ---------------------------------------------------------------------------

namespace {

// Subjects with identical grid selections share one factored submatrix;
// their residuals are stacked so each likelihood evaluation does one
// Cholesky and one triangular solve per pattern.
struct SelPattern {
  std::vector<int> idx;
  std::vector<int> members;
  Matrix resid;  // d x m, one column per member
};

class AltContext {
public:
  AltContext(const Dataset& dataset, int t_max, int s_max)
      : data_(dataset), t_max_(t_max), s_max_(s_max) {
    std::map<std::vector<int>, int> seen;
    for (size_t i = 0; i < dataset.subjects.size(); ++i) {
      auto idx = selection_indices(dataset.subjects[i], t_max, s_max);
      auto it = seen.find(idx);
      if (it == seen.end()) {
        seen[idx] = static_cast<int>(pats_.size());
        pats_.push_back(SelPattern{idx, {static_cast<int>(i)}, {}});
      } else {
        pats_[it->second].members.push_back(static_cast<int>(i));
      }
    }
    const int d = t_max * s_max;
    std::vector<int> cell_count(d, 0);
    for (const auto& p : pats_)
      for (int c : p.idx) cell_count[c] += static_cast<int>(p.members.size());
    for (int c = 0; c < d; ++c)
      if (cell_count[c] == 0)
        throw UnidentifiedCell(c / s_max, c % s_max,
                               "fit_alt: maximal-grid cell (time " + std::to_string(c / s_max) +
                                   ", location " + std::to_string(c % s_max) +
                                   ") is never observed; its covariance parameters are inestimable");
    n_ = static_cast<double>(dataset.n_obs());
  }

  void set_residuals(const Vector& beta) {
    for (auto& p : pats_) {
      p.resid = Matrix(p.idx.size(), p.members.size());
      for (size_t m = 0; m < p.members.size(); ++m)
        p.resid.col(m) = residuals(data_.subjects[p.members[m]], beta);
    }
  }

  // Log-likelihood at cached residuals; NaN for numerically inadmissible
  // theta (diagonal under/overflow).
  double loglik(const Vector& theta) const {
    const int d = t_max_ * s_max_;
    Matrix l = Matrix::Zero(d, d);
    Eigen::Index k = 0;
    for (int r = 0; r < d; ++r)
      for (int c = 0; c <= r; ++c, ++k) {
        const double v = (c == r) ? std::exp(theta(k)) : theta(k);
        if (!std::isfinite(v) || (c == r && v < 1e-154))
          return std::numeric_limits<double>::quiet_NaN();
        l(r, c) = v;
      }
    Matrix sigma(d, d);
    sigma.setZero();
    sigma.selfadjointView<Eigen::Lower>().rankUpdate(l);
    sigma = sigma.selfadjointView<Eigen::Lower>();

    double ll = -0.5 * n_ * kLog2Pi;
    for (const auto& p : pats_) {
      Matrix sub = select(sigma, p.idx);
      Eigen::LLT<Matrix> llt(sub);
      if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
      const Matrix half = llt.matrixL().solve(p.resid);
      const double ld = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
      ll += -0.5 * ld * static_cast<double>(p.members.size()) - 0.5 * half.squaredNorm();
    }
    return ll;
  }

  Vector gls(const Vector& theta) const {
    MaxGridCov cov{t_max_, s_max_, theta};
    return gls_beta_alt(data_, cov);
  }

  const Dataset& data() const { return data_; }

private:
  const Dataset& data_;
  int t_max_, s_max_;
  double n_ = 0.0;
  std::vector<SelPattern> pats_;
};

// Pooled available-case second moments of the OLS residuals, ridge-inflated
// until positive definite.
Matrix available_case_start(const Dataset& dataset, int t_max, int s_max) {
  LearTau id{};
  const Vector beta0 = gls_beta(dataset, build_null_factors(dataset, id));
  const int d = t_max * s_max;
  Matrix acc = Matrix::Zero(d, d);
  Matrix cnt = Matrix::Zero(d, d);
  for (const auto& sub : dataset.subjects) {
    const auto idx = selection_indices(sub, t_max, s_max);
    const Vector r = residuals(sub, beta0);
    for (size_t a = 0; a < idx.size(); ++a)
      for (size_t b = 0; b < idx.size(); ++b) {
        acc(idx[a], idx[b]) += r(a) * r(b);
        cnt(idx[a], idx[b]) += 1.0;
      }
  }
  Matrix s = Matrix::Zero(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (cnt(a, b) > 0.0) s(a, b) = acc(a, b) / cnt(a, b);

  const double diag_scale = std::max(s.diagonal().mean(), 1e-30);
  double eps = std::max(1e-6 * diag_scale, 1e-10);
  for (int attempt = 0; attempt < 200; ++attempt) {
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() == Eigen::Success) {
      // demand a conditioning floor, not bare positive definiteness: a
      // near-singular start puts the log-Cholesky iterate in a curvature
      // canyon the optimizer cannot leave
      const double min_pivot = Matrix(llt.matrixL()).diagonal().minCoeff();
      if (min_pivot * min_pivot >= 1e-3 * diag_scale) return s;
    }
    s += eps * Matrix::Identity(d, d);
    eps *= 2.0;
  }
  throw NotPositiveDefinite("fit_alt: could not inflate the starting covariance to PD");
}

// Damped BFGS curvature approximation (of the negated objective) for
// parameter counts where a finite-difference Hessian pass is infeasible.
class DampedBfgs {
public:
  explicit DampedBfgs(Eigen::Index p) : b_(Matrix::Identity(p, p)) {}

  Vector direction(const Vector& grad) const {
    Eigen::LLT<Matrix> llt(b_);
    if (llt.info() != Eigen::Success) return grad;
    return llt.solve(grad);
  }

  void update(const Vector& step, const Vector& grad_old, const Vector& grad_new) {
    const Vector y = -(grad_new - grad_old);  // gradient change of -loglik
    const Vector bs = b_ * step;
    const double sbs = step.dot(bs);
    double sy = step.dot(y);
    Vector yh = y;
    if (sbs <= 0.0) return;
    if (sy < 0.2 * sbs) {
      const double phi = 0.8 * sbs / (sbs - sy);
      yh = phi * y + (1.0 - phi) * bs;
      sy = step.dot(yh);
    }
    if (sy <= 1e-14 * step.norm() * yh.norm()) return;
    b_ -= (bs * bs.transpose()) / sbs;
    b_ += (yh * yh.transpose()) / sy;
  }

  void reset() { b_.setIdentity(); }

private:
  Matrix b_;
};

}  // namespace

AltFitResult fit_alt(const Dataset& dataset, const FitOptions& options) {
  if (dataset.subjects.empty()) throw EmptyDataset("fit_alt: dataset has no subjects");
  const int t_max = dataset.t_max;
  const int s_max = dataset.s_max;
  const int d = t_max * s_max;
  const Eigen::Index p_cov = tri_size(d);

  AltContext ctx(dataset, t_max, s_max);
  MaxGridCov cov = MaxGridCov::from_matrix(available_case_start(dataset, t_max, s_max), t_max, s_max);
  Vector theta = cov.theta;

  AltFitResult res;
  Vector beta = ctx.gls(theta);
  ctx.set_residuals(beta);
  double ll = ctx.loglik(theta);
  if (!std::isfinite(ll)) throw NotPositiveDefinite("fit_alt: starting point is inadmissible");
  res.trace.push_back(ll);

  auto objective = [&](const Vector& th) -> double { return ctx.loglik(th); };
  auto gradient = [&](const Vector& th) -> Vector {
    return detail::fd_gradient(objective, th, options.fd_step, objective(th));
  };

  const bool use_newton = p_cov <= 120;
  DampedBfgs bfgs(p_cov);

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
    Vector dir;
    if (use_newton) {
      const double h_hess = std::max(options.fd_step, 1e-4);
      Matrix hess = detail::fd_hessian(gradient, theta, h_hess, g);
      dir = detail::clipped_ascent_direction(hess, g);
    } else {
      dir = bfgs.direction(g);
      if (dir.dot(g) <= 0.0) {
        bfgs.reset();
        dir = g;
      }
    }
    detail::cap_inf_norm(dir, 10.0);
    auto step = detail::backtrack(objective, theta, dir, ll, options.max_halvings);
    if (!step) {
      Vector steep = g;
      detail::cap_inf_norm(steep, 0.25);
      step = detail::backtrack(objective, theta, steep, ll, options.max_halvings);
    }
    if (!step) break;  // FD noise floor: no direction improves
    const Vector moved = step->theta - theta;
    theta = step->theta;
    beta = ctx.gls(theta);
    ctx.set_residuals(beta);
    const double ll_new = ctx.loglik(theta);
    rel_change = std::abs(ll_new - ll) / (1.0 + std::abs(ll));
    ll = ll_new;
    res.trace.push_back(ll);
    Vector g_new = gradient(theta);
    if (!use_newton) bfgs.update(moved, g, g_new);
    g = std::move(g_new);
    res.grad_norm = g.norm();
    if (res.grad_norm < options.grad_tol && rel_change < options.rel_tol) {
      converged = true;
      break;
    }
  }

  res.beta = beta;
  res.cov = MaxGridCov{t_max, s_max, theta};
  res.loglik = loglik_alt(dataset, res.cov, beta);
  res.iterations = it;
  res.converged = converged;
  if (!converged)
    res.warnings.push_back(
        "alternative (unstructured) fit did not converge in " + std::to_string(it) +
        " iterations; the sample may not support " + std::to_string(p_cov) +
        " covariance parameters and a more parsimonious covariance model is indicated");
  return res;
}

}  // namespace seplrt
