#include "qsd/noise.hpp"

#include <cmath>

#include "qsd/errors.hpp"

namespace qsd {

HermitianMatrix toeplitz_gaussian_noise(int n, double sigma, Rng& rng) {
  if (n < 1) throw InvalidInput("toeplitz_gaussian_noise: n must be >= 1");
  if (!(sigma >= 0.0)) throw InvalidInput("toeplitz_gaussian_noise: sigma must be >= 0");
  std::normal_distribution<double> nd(0.0, 1.0);
  CVector r(n);
  r(0) = sigma * nd(rng);
  const double half = sigma / std::sqrt(2.0);
  for (int k = 1; k < n; ++k) {
    const double re = half * nd(rng);
    const double im = half * nd(rng);
    r(k) = cplx(re, im);
  }
  return HermitianMatrix::toeplitz(r);
}

HermitianMatrix dense_gaussian_hermitian(int n, double sigma, Rng& rng) {
  if (n < 1) throw InvalidInput("dense_gaussian_hermitian: n must be >= 1");
  std::normal_distribution<double> nd(0.0, 1.0);
  RMatrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = nd(rng);
  return HermitianMatrix(RMatrix(sigma * (g + g.transpose()) / 2));
}

namespace {

double bernoulli_mean(double x, int m, double B, Rng& rng) {
  const double p = (1.0 + x / B) / 2.0;
  if (p <= 0.0) return -B;
  if (p >= 1.0) return B;
  std::binomial_distribution<long long> bin(m, p);
  const long long plus = bin(rng);
  return B * (2.0 * static_cast<double>(plus) - m) / m;
}

}  // namespace

CVector monte_carlo_estimate(const CVector& first_row, int m, double B, Rng& rng) {
  if (m < 1) throw InvalidInput("monte_carlo_estimate: m must be >= 1");
  if (!(B > 0.0)) throw InvalidInput("monte_carlo_estimate: B must be > 0");
  CVector out(first_row.size());
  for (Eigen::Index i = 0; i < first_row.size(); ++i) {
    const double re = first_row(i).real();
    const double im = first_row(i).imag();
    if (std::abs(re) > B || std::abs(im) > B) {
      throw BoundViolation("monte_carlo_estimate: entry exceeds B");
    }
    const double er = bernoulli_mean(re, m, B, rng);
    const double ei = bernoulli_mean(im, m, B, rng);
    out(i) = cplx(er, ei);
  }
  return out;
}

NoiseLevel spectral_noise_level(const HermitianMatrix& delta_H, const HermitianMatrix& delta_S) {
  NoiseLevel lv;
  lv.eta_H = spectral_norm(delta_H);
  lv.eta_S = spectral_norm(delta_S);
  lv.eta = std::hypot(lv.eta_H, lv.eta_S);
  return lv;
}

double concentration_bound(double B, int n, long long m, double C) {
  if (n < 1 || m < 1) throw InvalidInput("concentration_bound: need n, m >= 1");
  const double nn = n;
  return C * B * std::sqrt(nn * std::log(std::max(nn, 2.0)) / static_cast<double>(m));
}

}  // namespace qsd
