#include "seplrt/numerics.hpp"

#include <cmath>
#include <limits>

namespace seplrt {

namespace {

void check_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) throw DomainError(std::string(what) + ": non-finite entries");
}

}  // namespace

CholFactor::CholFactor(Matrix lower) : l_(std::move(lower)) {
  if (l_.rows() != l_.cols()) throw DimensionMismatch("CholFactor: factor must be square");
  for (Eigen::Index j = 0; j < l_.rows(); ++j) {
    if (!(l_(j, j) > 0.0))
      throw NotPositiveDefinite("CholFactor: non-positive diagonal at index " + std::to_string(j));
  }
}

double CholFactor::log_det() const {
  return 2.0 * l_.diagonal().array().log().sum();
}

Vector CholFactor::solve(const Vector& b) const {
  if (b.size() != l_.rows())
    throw DimensionMismatch("solve_pd: rhs length " + std::to_string(b.size()) +
                            " != dim " + std::to_string(l_.rows()));
  Vector x = l_.triangularView<Eigen::Lower>().solve(b);
  l_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
  return x;
}

Matrix CholFactor::solve(const Matrix& b) const {
  if (b.rows() != l_.rows())
    throw DimensionMismatch("solve_pd: rhs rows " + std::to_string(b.rows()) +
                            " != dim " + std::to_string(l_.rows()));
  Matrix x = l_.triangularView<Eigen::Lower>().solve(b);
  l_.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
  return x;
}

CholFactor cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("cholesky: matrix must be square");
  check_finite(a, "cholesky");
  const double scale = a.cwiseAbs().maxCoeff();
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, scale))
    throw DomainError("cholesky: matrix is not symmetric within tolerance");

  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("cholesky: non-positive pivot encountered");
  return CholFactor(llt.matrixL());
}

double log_det_pd(const CholFactor& f) { return f.log_det(); }

Vector solve_pd(const CholFactor& f, const Vector& b) { return f.solve(b); }
Matrix solve_pd(const CholFactor& f, const Matrix& b) { return f.solve(b); }

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.rows(); ++j)
    for (Eigen::Index k = 0; k < a.cols(); ++k)
      out.block(j * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(j, k) * b;
  return out;
}

double kron_logdet(const Matrix& gamma, const Matrix& omega) {
  const double ld_g = cholesky(gamma).log_det();
  const double ld_o = cholesky(omega).log_det();
  return static_cast<double>(omega.rows()) * ld_g + static_cast<double>(gamma.rows()) * ld_o;
}

double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma: requires x > 0");
  double acc = 0.0;
  // shift into the asymptotic region
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // psi(x) ~ ln x - 1/(2x) - sum B_2n / (2n x^{2n})
  double series = inv2 * (1.0 / 12.0 +
                  inv2 * (-1.0 / 120.0 +
                  inv2 * (1.0 / 252.0 +
                  inv2 * (-1.0 / 240.0 +
                  inv2 * (1.0 / 132.0 +
                  inv2 * (-691.0 / 32760.0 +
                  inv2 * (1.0 / 12.0)))))));
  return acc + std::log(x) - 0.5 * inv - series;
}

namespace {

// Regularized lower incomplete gamma P(a, z) by series, for z < a + 1.
double gamma_p_series(double a, double z) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= z / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  const double lg = -z + a * std::log(z) - std::lgamma(a);
  return sum * std::exp(lg);
}

// Regularized upper incomplete gamma Q(a, z) by Lentz continued fraction,
// for z >= a + 1.
double gamma_q_cf(double a, double z) {
  const double tiny = 1e-300;
  double b = z + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  const double lg = -z + a * std::log(z) - std::lgamma(a);
  return h * std::exp(lg);
}

}  // namespace

double chi2_sf(double x, long nu) {
  if (nu < 1) throw DomainError("chi2_sf: degrees of freedom must be >= 1");
  if (!(x >= 0.0)) throw DomainError("chi2_sf: statistic must be >= 0");
  if (x == 0.0) return 1.0;
  const double a = 0.5 * static_cast<double>(nu);
  const double z = 0.5 * x;
  if (z < a + 1.0) return 1.0 - gamma_p_series(a, z);
  return gamma_q_cf(a, z);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id & 0xffffffffu),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  engine_.seed(seq);
}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  have_spare_ = true;
  return u * m;
}

std::uint64_t RngStream::uniform_int(std::uint64_t n) {
  if (n == 0) throw DomainError("uniform_int: n must be positive");
  const std::uint64_t limit = n * (std::numeric_limits<std::uint64_t>::max() / n);
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

Vector mvn_sample(const Vector& mean, const CholFactor& cov_factor, RngStream& rng) {
  if (mean.size() != cov_factor.dim())
    throw DimensionMismatch("mvn_sample: mean length != factor dimension");
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean + cov_factor.lower().triangularView<Eigen::Lower>() * z;
}

}  // namespace seplrt
