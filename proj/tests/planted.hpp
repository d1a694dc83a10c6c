#pragma once

// Planted sparse factorizations for solver tests.

#include "oracles.hpp"

#include <random>

namespace planted {

using deepdisagg::Index;
using deepdisagg::Matrix;

// Non-negative codes with roughly `density` nonzeros per entry, at least one
// per column.
inline Matrix sparse_codes(Index k, Index s, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 104729 + 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix z = Matrix::Zero(k, s);
  for (Index c = 0; c < s; ++c) {
    for (Index r = 0; r < k; ++r)
      if (u(rng) < density) z(r, c) = 0.5 + u(rng);
    if (z.col(c).isZero(0.0)) z(static_cast<Index>(u(rng) * static_cast<double>(k)) % k, c) = 1.0;
  }
  return z;
}

inline Matrix abs_unit(Index m, Index k, std::uint64_t seed) {
  return oracle::unit_columns(oracle::random_matrix(m, k, seed).cwiseAbs());
}

inline double relative_residual(const Matrix& X, const Matrix& approx) {
  return (X - approx).norm() / X.norm();
}

}  // namespace planted
