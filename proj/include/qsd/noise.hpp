#pragma once

#include <cstdint>
#include <random>

#include "qsd/linalg.hpp"

namespace qsd {

using Rng = std::mt19937_64;

enum class NoiseModel { toeplitz_gaussian, dense_gaussian, monte_carlo };

struct NoiseSpec {
  NoiseModel model = NoiseModel::toeplitz_gaussian;
  double sigma = 0.0;
  int m = 1;
  double B = 1.0;
  std::uint64_t seed = 0;
};

struct NoiseLevel {
  double eta_H = 0.0;
  double eta_S = 0.0;
  double eta = 0.0;
};

// Lag 0 is real N(0, sigma^2); other lags are complex with independent
// N(0, sigma^2/2) parts. The rest of the matrix is imputed.
HermitianMatrix toeplitz_gaussian_noise(int n, double sigma, Rng& rng);

// sigma * (G + G^T)/2 with G real standard normal.
HermitianMatrix dense_gaussian_hermitian(int n, double sigma, Rng& rng);

// Replaces the real and imaginary part of each entry by the mean of m
// +-B Bernoulli draws with the same mean.
CVector monte_carlo_estimate(const CVector& first_row, int m, double B, Rng& rng);

NoiseLevel spectral_noise_level(const HermitianMatrix& delta_H, const HermitianMatrix& delta_S);

// C * B * sqrt(n ln(max(n,2)) / m); an estimate, not a certified bound.
double concentration_bound(double B, int n, long long m, double C = 2.0);

}  // namespace qsd
