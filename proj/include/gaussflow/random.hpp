#pragma once

// Seeded samplers for planes and tangent directions used by scans and tests.

#include <cstdint>
#include <random>
#include <span>

#include "gaussflow/grassmann.hpp"

namespace gaussflow {

using Rng = std::mt19937_64;

inline Matrix gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  }
  return out;
}

inline Matrix random_orthogonal(Rng& rng, Eigen::Index size) {
  Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(rng, size, size));
  Matrix q = qr.householderQ() * Matrix::Identity(size, size);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < size; ++k) {
    if (r(k, k) < 0.0) q.col(k) *= -1.0;
  }
  return q;
}

inline Plane random_plane(Rng& rng, int n, int m) {
  return orthonormalize(gaussian_matrix(rng, n + m, n));
}

inline Plane coordinate_plane(int n, int m) {
  return orthonormalize(Matrix::Identity(n + m, n));
}

inline TangentMatrix random_unit_tangent(Rng& rng, const Plane& p) {
  return TangentMatrix(p, gaussian_matrix(rng, p.n(), p.m())).normalized();
}

/// A graph plane over `q` whose graph map has the given singular values
/// (at most min(n, m) of them) and random singular vectors.
inline Plane plane_with_singular_values(Rng& rng, const Plane& q, std::span<const double> lambdas) {
  const int n = q.n(), m = q.m();
  Matrix diag = Matrix::Zero(n, m);
  for (std::size_t k = 0; k < lambdas.size() && static_cast<int>(k) < std::min(n, m); ++k) {
    diag(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = lambdas[k];
  }
  return graph_plane(q, random_orthogonal(rng, n) * diag * random_orthogonal(rng, m).transpose());
}

}  // namespace gaussflow
