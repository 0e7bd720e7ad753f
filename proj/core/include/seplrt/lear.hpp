#pragma once

#include <utility>

#include "seplrt/data.hpp"
#include "seplrt/numerics.hpp"

namespace seplrt {

// Linear exponent autoregressive correlation parameters for one factor.
// rho is the correlation at one distance unit, delta the decay speed.
// delta = d_max - d_min reproduces continuous-time AR(1); delta = 0
// reproduces compound symmetry at rho^{d_min}.
struct LearParams {
  double rho = 0.0;    // in [0, 1)
  double delta = 0.0;  // >= 0
};

// The five covariance parameters of the separable null model.
struct NullParams {
  LearParams tau_t;  // temporal / factor 1
  LearParams tau_s;  // spatial / factor 2
  double sigma2 = 1.0;
};

// Correlation matrix with entries rho^{e(d)} where
//   e(d) = d_min + delta * (d - d_min) / (d_max - d_min),
// and e(d) = d_min when d_max == d_min. rho = 0 returns the identity.
Matrix lear_corr(const Matrix& dists, const DistanceScale& scale, const LearParams& params);

// Entrywise derivatives of lear_corr with respect to (rho, delta); requires
// rho > 0. Diagonals are zero.
std::pair<Matrix, Matrix> lear_corr_grad(const Matrix& dists, const DistanceScale& scale,
                                         const LearParams& params);

}  // namespace seplrt
