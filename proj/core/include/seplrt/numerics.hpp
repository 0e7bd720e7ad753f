#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "seplrt/errors.hpp"

namespace seplrt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
// Construction from a raw lower factor is allowed (e.g. the Kronecker factor
// of two factored matrices); the diagonal must be strictly positive.
class CholFactor {
public:
  explicit CholFactor(Matrix lower);

  const Matrix& lower() const noexcept { return l_; }
  Eigen::Index dim() const noexcept { return l_.rows(); }

  // log|A| of the factored matrix A = L L', i.e. 2 * sum(log L_jj).
  double log_det() const;

  // Solves A x = b through the two triangular systems.
  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;

private:
  Matrix l_;
};

// Factors a symmetric PD matrix; throws NotPositiveDefinite when a pivot
// is non-positive. Symmetry is checked to 1e-10 relative tolerance.
CholFactor cholesky(const Matrix& a);

double log_det_pd(const CholFactor& f);
Vector solve_pd(const CholFactor& f, const Vector& b);
Matrix solve_pd(const CholFactor& f, const Matrix& b);

// Kronecker product: block (j,k) of the result is a(j,k) * b.
Matrix kron(const Matrix& a, const Matrix& b);

// log|gamma (x) omega| = s*log|gamma| + t*log|omega|, evaluated through the
// factor log-determinants so the product determinant never under/overflows.
double kron_logdet(const Matrix& gamma, const Matrix& omega);

// Digamma function for x > 0: upward recurrence into the asymptotic region,
// then the Bernoulli-coefficient expansion. Absolute accuracy ~1e-12.
double digamma(double x);

// Upper tail P(chi^2_nu >= x) via the regularized incomplete gamma,
// series/continued-fraction split at the distribution mean.
double chi2_sf(double x, long nu);

// Deterministic random stream: identical (seed, stream_id) reproduces the
// identical sample sequence on any platform. Normal variates use the polar
// method on 53-bit uniforms; distribution code avoids std::*_distribution,
// whose output is implementation-defined.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

  std::uint64_t next_u64();
  double uniform01();                         // [0, 1), 53-bit resolution
  double normal();                            // N(0, 1)
  std::uint64_t uniform_int(std::uint64_t n); // {0, ..., n-1}, unbiased

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// mean + L z with z iid standard normal.
Vector mvn_sample(const Vector& mean, const CholFactor& cov_factor, RngStream& rng);

}  // namespace seplrt
