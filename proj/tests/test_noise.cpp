#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qsd/errors.hpp"
#include "qsd/noise.hpp"
#include "qsd/qsd_sim.hpp"

using namespace qsd;

namespace {

bool exactly_toeplitz(const HermitianMatrix& m) {
  const Eigen::Index n = m.dim();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) {
      if (m(j, k) != std::conj(m(k, j))) return false;
      if (k >= j && m(j, k) != m(0, k - j)) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("zero sigma gives zero noise") {
  Rng rng(1);
  CHECK(toeplitz_gaussian_noise(6, 0.0, rng).mat().cwiseAbs().maxCoeff() == 0.0);
  CHECK(dense_gaussian_hermitian(6, 0.0, rng).mat().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Toeplitz noise is exactly Hermitian-Toeplitz") {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const HermitianMatrix d = toeplitz_gaussian_noise(1 + t % 9, 1e-3, rng);
    CHECK(exactly_toeplitz(d));
    CHECK(d(0, 0).imag() == 0.0);
  }
}

TEST_CASE("Toeplitz noise second moments per lag") {
  Rng rng(3);
  const int n = 20, draws = 10000;
  const double sigma = 1e-6;
  std::vector<double> acc(n, 0.0);
  for (int d = 0; d < draws; ++d) {
    const HermitianMatrix m = toeplitz_gaussian_noise(n, sigma, rng);
    for (int k = 0; k < n; ++k) acc[static_cast<std::size_t>(k)] += std::norm(m(0, k));
  }
  for (int k = 0; k < n; ++k) {
    const double ratio = acc[static_cast<std::size_t>(k)] / draws / (sigma * sigma);
    CHECK(ratio >= 0.9);
    CHECK(ratio <= 1.1);
  }
}

TEST_CASE("dense noise is real symmetric with norm near sigma sqrt(n)") {
  Rng rng(4);
  std::vector<double> norms;
  for (int t = 0; t < 200; ++t) {
    const HermitianMatrix d = dense_gaussian_hermitian(5, 1e-12, rng);
    CHECK(d.mat().imag().cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.mat() == d.mat().transpose());
    norms.push_back(spectral_norm(d));
  }
  std::sort(norms.begin(), norms.end());
  const double med = norms[norms.size() / 2];
  CHECK(med > 0.3e-12 * std::sqrt(5.0));
  CHECK(med < 3e-12 * std::sqrt(5.0));
}

TEST_CASE("noise draws are deterministic for a fixed seed") {
  Rng a(99), b(99);
  CHECK(toeplitz_gaussian_noise(7, 1.0, a).mat() == toeplitz_gaussian_noise(7, 1.0, b).mat());
  CVector row = CVector::Constant(4, cplx(0.3, -0.2));
  CHECK(monte_carlo_estimate(row, 100, 1.0, a) == monte_carlo_estimate(row, 100, 1.0, b));
}

TEST_CASE("property: spectral norm of Toeplitz noise scales linearly in sigma") {
  auto median_norm = [](double sigma) {
    Rng rng(5);
    std::vector<double> v;
    for (int t = 0; t < 1000; ++t) v.push_back(spectral_norm(toeplitz_gaussian_noise(12, sigma, rng)));
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  const double ratio = median_norm(1e-4) / median_norm(1e-6);
  CHECK(ratio > 90.0);
  CHECK(ratio < 110.0);
}

TEST_CASE("Monte Carlo estimate converges for large m") {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const CVector e = monte_carlo_estimate(CVector::Constant(1, cplx(0.5, 0.0)), 1000000, 1.0, rng);
    if (std::abs(e(0).real() - 0.5) < 0.01) ++hits;
  }
  CHECK(hits >= 99);
}

TEST_CASE("Monte Carlo estimate is exact at the bound") {
  Rng rng(6);
  CVector row(3);
  row << cplx(1.0, -1.0), cplx(-1.0, 1.0), cplx(1.0, 1.0);
  const CVector e = monte_carlo_estimate(row, 17, 1.0, rng);
  CHECK(e == row);
}

TEST_CASE("Monte Carlo estimate of zero is unbiased with 1/sqrt(m) spread") {
  Rng rng(7);
  const int m = 100, trials = 1000;
  double sum = 0.0, sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    const double x = monte_carlo_estimate(CVector::Zero(1), m, 1.0, rng)(0).real();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / trials;
  CHECK(std::abs(mean) <= 3.0 / std::sqrt(static_cast<double>(m) * trials));
  const double sd = std::sqrt(sq / trials - mean * mean);
  CHECK(sd <= 1.1 / std::sqrt(static_cast<double>(m)));
}

TEST_CASE("Monte Carlo perturbation of a Toeplitz pair stays Hermitian-Toeplitz") {
  Rng rng(8);
  CVector row(5);
  row << 1.0, cplx(0.3, 0.1), cplx(-0.2, 0.4), cplx(0.0, -0.5), cplx(0.25, 0.25);
  const HermitianMatrix s = HermitianMatrix::toeplitz(row);
  const HermitianMatrix st = HermitianMatrix::toeplitz(monte_carlo_estimate(row, 1000, 1.0, rng));
  CHECK(exactly_toeplitz(st - s));
}

TEST_CASE("Monte Carlo errors") {
  Rng rng(9);
  CHECK_THROWS_AS(monte_carlo_estimate(CVector::Constant(1, cplx(1.5, 0.0)), 10, 1.0, rng), BoundViolation);
  CHECK_THROWS_AS(monte_carlo_estimate(CVector::Zero(1), 0, 1.0, rng), InvalidInput);
}

TEST_CASE("spectral noise level") {
  const NoiseLevel z = spectral_noise_level(HermitianMatrix::zero(3), HermitianMatrix::zero(3));
  CHECK(z.eta_H == 0.0);
  CHECK(z.eta_S == 0.0);
  CHECK(z.eta == 0.0);
  const HermitianMatrix d = HermitianMatrix::diagonal(RVector{{-0.4, 0.1}});
  const NoiseLevel a = spectral_noise_level(d, HermitianMatrix::zero(2));
  CHECK(a.eta_H == doctest::Approx(0.4));
  CHECK(a.eta == doctest::Approx(0.4));
  Rng rng(10);
  const HermitianMatrix dh = toeplitz_gaussian_noise(6, 1.0, rng), ds = toeplitz_gaussian_noise(6, 1.0, rng);
  const NoiseLevel b = spectral_noise_level(dh, ds);
  CHECK(b.eta == doctest::Approx(std::sqrt(std::pow(spectral_norm(dh), 2) + std::pow(spectral_norm(ds), 2))));
}

TEST_CASE("concentration bound arithmetic") {
  CHECK(concentration_bound(1.0, 20, 1000000) == doctest::Approx(2.0 * std::sqrt(20.0 * std::log(20.0) / 1e6)));
  CHECK(concentration_bound(1.0, 20, 1000000) == doctest::Approx(1.55e-2).epsilon(0.01));
  CHECK(concentration_bound(1.0, 20, 400) / concentration_bound(1.0, 20, 800) == doctest::Approx(std::sqrt(2.0)));
  CHECK(concentration_bound(1.0, 20, 1000000000000000LL) < 1e-6);
  CHECK(concentration_bound(1.0, 1, 100) == doctest::Approx(2.0 * std::sqrt(std::log(2.0) / 100)));
}
