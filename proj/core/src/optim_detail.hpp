#pragma once

// Internal finite-difference and safeguarded-step helpers shared by the two
// model fitters. Objective functors return NaN at inadmissible points.

#include <cmath>
#include <functional>
#include <optional>

#include <Eigen/Eigenvalues>

#include "seplrt/numerics.hpp"

namespace seplrt::detail {

using Objective = std::function<double(const Vector&)>;

inline bool usable(double v) { return std::isfinite(v); }

// Central differences, falling back to a one-sided difference when a probe
// point is inadmissible.
inline Vector fd_gradient(const Objective& f, const Vector& theta, double h, double f0) {
  Vector g(theta.size());
  Vector probe = theta;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    probe(j) = theta(j) + h;
    const double up = f(probe);
    probe(j) = theta(j) - h;
    const double dn = f(probe);
    probe(j) = theta(j);
    if (usable(up) && usable(dn)) {
      g(j) = (up - dn) / (2.0 * h);
    } else if (usable(up)) {
      g(j) = (up - f0) / h;
    } else if (usable(dn)) {
      g(j) = (f0 - dn) / h;
    } else {
      g(j) = 0.0;
    }
  }
  return g;
}

// Forward difference of a gradient function, symmetrized.
inline Matrix fd_hessian(const std::function<Vector(const Vector&)>& grad, const Vector& theta,
                         double h, const Vector& g0) {
  const Eigen::Index p = theta.size();
  Matrix hess(p, p);
  Vector probe = theta;
  for (Eigen::Index j = 0; j < p; ++j) {
    probe(j) = theta(j) + h;
    hess.col(j) = (grad(probe) - g0) / h;
    probe(j) = theta(j);
  }
  return 0.5 * (hess + hess.transpose());
}

// Ascent direction with eigenvalue clipping: directions of near-zero or
// wrong-sign curvature are given a floor tied to the largest curvature, so
// one bad direction cannot drown the well-conditioned subspace.
inline Vector clipped_ascent_direction(const Matrix& hess, const Vector& g) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(-hess);
  if (es.info() != Eigen::Success) return g;
  const Vector& ev = es.eigenvalues();
  const double floor = std::max(1e-8, 1e-8 * ev.cwiseAbs().maxCoeff());
  Vector inv(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) inv(i) = 1.0 / std::max(ev(i), floor);
  return es.eigenvectors() * (inv.asDiagonal() * (es.eigenvectors().transpose() * g));
}

// Ascent direction from a (possibly indefinite) Hessian: shift -H until it
// factors, then solve (-H + shift I) d = g.
inline Vector ascent_direction(const Matrix& hess, const Vector& g) {
  Matrix a = -hess;
  double shift = 0.0;
  const double base = std::max(1e-8, 1e-10 * a.diagonal().cwiseAbs().maxCoeff());
  for (int attempt = 0; attempt < 60; ++attempt) {
    Eigen::LLT<Matrix> llt(a + shift * Matrix::Identity(a.rows(), a.cols()));
    if (llt.info() == Eigen::Success) return llt.solve(g);
    shift = shift == 0.0 ? base : shift * 4.0;
  }
  // pathological curvature: fall back to steepest ascent
  return g;
}

inline void cap_inf_norm(Vector& v, double cap) {
  const double m = v.cwiseAbs().maxCoeff();
  if (m > cap) v *= cap / m;
}

struct StepResult {
  Vector theta;
  double value;
  bool moved;
};

// Backtracking step search: halve until the objective does not decrease.
inline std::optional<StepResult> backtrack(const Objective& f, const Vector& theta,
                                           const Vector& direction, double f0, int max_halvings) {
  Vector step = direction;
  for (int k = 0; k <= max_halvings; ++k) {
    Vector cand = theta + step;
    const double v = f(cand);
    if (usable(v) && v >= f0 - 1e-11 * (1.0 + std::abs(f0)))
      return StepResult{std::move(cand), v, (v > f0)};
    step *= 0.5;
  }
  return std::nullopt;
}

}  // namespace seplrt::detail
