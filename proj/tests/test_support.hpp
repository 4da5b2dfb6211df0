#pragma once

// Shared generators and reference values for the test binaries. Reference
// values were computed independently at 50 significant digits and frozen.

#include "edrsim/qcore.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace edrsim::testing {

// √(2 − √2): ideal ε = η at θ = π/8.
inline constexpr double kEpsPi8 = 0.76536686473017954;
inline constexpr double kHeisenbergPi8 = 0.58578643762690495;
inline constexpr double kOzawaPi8 = 2.11652016708726404;
inline constexpr double kBranciardPi8 = 1.08239220029239397;
// √(2 − √3): ideal η at θ = π/6.
inline constexpr double kEtaPi6 = 0.51763809020504152;
// sin 2θ_w at cos 2θ_w = 0.104.
inline constexpr double kPostWpC = 0.99457729714688340;
// 0.104 · √3/2.
inline constexpr double kXCorrelatorPi6 = 0.09006664199358162;
inline constexpr double kSqrt075 = 0.86602540378443865;

inline constexpr double kPi = std::numbers::pi;

inline StateVector y_plus() {
  Vector v(2);
  v << 1.0 / std::sqrt(2.0), Complex(0, 1.0 / std::sqrt(2.0));
  return StateVector(v);
}

/// Fixed-seed stream; each test gets its own so ordering does not matter.
inline std::mt19937_64 rng_for(std::uint64_t salt) { return std::mt19937_64(0x5eed0000ULL + salt); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random Hermitian operator with entries in [-1, 1] + i[-1, 1].
inline LinearOperator random_hermitian(std::mt19937_64& rng, Eigen::Index dim) {
  Matrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = Complex(uniform(rng, -1, 1), uniform(rng, -1, 1));
  return LinearOperator::hermitian((m + m.adjoint()) / 2.0);
}

/// Mixed state from a random mixture of `rank` random pure states.
inline DensityMatrix random_density(std::mt19937_64& rng, Eigen::Index dim, int rank) {
  Matrix rho = Matrix::Zero(dim, dim);
  double total = 0.0;
  for (int r = 0; r < rank; ++r) {
    const double w = uniform(rng, 0.1, 1.0);
    const Vector v = random_state(rng, dim).amplitudes();
    rho += w * v * v.adjoint();
    total += w;
  }
  rho /= total;
  return DensityMatrix((rho + rho.adjoint()) / 2.0);
}

}  // namespace edrsim::testing
