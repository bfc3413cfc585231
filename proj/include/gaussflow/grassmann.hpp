#pragma once

// Points, tangent vectors and geodesics of the Grassmannian G(n, m) of
// n-planes in R^{n+m}, with the homogeneous metric ds^2 = sum A_{i alpha}^2.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "gaussflow/error.hpp"

namespace gaussflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace tolerance {
inline constexpr double kRank = 1e-10;
inline constexpr double kOrthonormal = 1e-12;
inline constexpr double kSpanEqual = 1e-10;
inline constexpr double kChartExit = 1e8;
}  // namespace tolerance

inline Vector singular_values_of(const Matrix& a) {
  if (a.size() == 0) return Vector(0);
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues();
}

/// An oriented n-dimensional subspace of R^{n+m}, stored as an orthonormal
/// frame. The complement frame is fixed once at construction (last m left
/// singular vectors of the frame) so tangent-matrix columns have a stable
/// meaning. Immutable.
class Plane {
 public:
  int n() const { return static_cast<int>(frame_.cols()); }
  int m() const { return static_cast<int>(complement_.cols()); }
  int ambient() const { return static_cast<int>(frame_.rows()); }

  const Matrix& frame() const { return frame_; }
  const Matrix& complement() const { return complement_; }

  Matrix projector() const { return frame_ * frame_.transpose(); }

 private:
  Plane(Matrix frame, Matrix complement)
      : frame_(std::move(frame)), complement_(std::move(complement)) {}

  friend Plane orthonormalize(const Matrix& raw_columns);

  Matrix frame_;
  Matrix complement_;
};

/// Orientation-preserving orthonormalization (Gram-Schmidt, two passes).
/// Exact zero patterns in the input survive, which keeps block-structured
/// frames (e.g. products of curves) exactly block-structured.
inline Plane orthonormalize(const Matrix& raw_columns) {
  const Eigen::Index ambient = raw_columns.rows();
  const Eigen::Index n = raw_columns.cols();
  if (n < 1 || ambient <= n) {
    throw Error(ErrorKind::kDimensionMismatch,
                "need 1 <= n < n+m, got " + std::to_string(n) + " columns in R^" +
                    std::to_string(ambient));
  }
  const Vector sv = singular_values_of(raw_columns);
  if (sv(sv.size() - 1) <= tolerance::kRank) {
    throw Error(ErrorKind::kRankDeficient,
                "smallest singular value " + std::to_string(sv(sv.size() - 1)));
  }

  Matrix q = raw_columns;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < j; ++k) {
        const double c = q.col(k).dot(q.col(j));
        if (c != 0.0) q.col(j) -= c * q.col(k);
      }
    }
    q.col(j) /= q.col(j).norm();
  }

  Eigen::JacobiSVD<Matrix> svd(q, Eigen::ComputeFullU);
  Matrix complement = svd.matrixU().rightCols(ambient - n);
  return Plane(std::move(q), std::move(complement));
}

/// Principal angles between two planes, ascending. Small angles come from
/// the sine route and large ones from the cosine route so both ends stay
/// accurate.
inline Vector principal_angles(const Plane& p1, const Plane& p2) {
  if (p1.n() != p2.n() || p1.m() != p2.m()) {
    throw Error(ErrorKind::kDimensionMismatch, "principal angles need equal (n, m)");
  }
  const Matrix c = p1.frame().transpose() * p2.frame();
  const Vector cosines = singular_values_of(c);
  const Vector sines = singular_values_of(p2.frame() - p1.frame() * c);
  const Eigen::Index n = p1.n();
  Vector angles(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double cos_k = std::min(cosines(k), 1.0);
    const double sin_k = std::min(sines(n - 1 - k), 1.0);
    angles(k) = sin_k < std::numbers::sqrt2 / 2.0 ? std::asin(sin_k) : std::acos(cos_k);
  }
  return angles;
}

/// Geodesic distance induced by the homogeneous metric.
inline double distance(const Plane& p1, const Plane& p2) {
  return principal_angles(p1, p2).norm();
}

inline bool same_span(const Plane& p1, const Plane& p2,
                      double tol = tolerance::kSpanEqual) {
  if (p1.n() != p2.n() || p1.m() != p2.m()) return false;
  return principal_angles(p1, p2).maxCoeff() < tol;
}

inline bool operator==(const Plane& p1, const Plane& p2) { return same_span(p1, p2); }

/// A tangent vector at `base`, as an element of Hom(P, P^perp): row i is
/// the image of frame column i, expressed in the base's complement frame.
class TangentMatrix {
 public:
  TangentMatrix(Plane base, Matrix entries) : base_(std::move(base)), entries_(std::move(entries)) {
    if (entries_.rows() != base_.n() || entries_.cols() != base_.m()) {
      throw Error(ErrorKind::kDimensionMismatch, "tangent matrix must be n x m");
    }
  }

  const Plane& base() const { return base_; }
  const Matrix& entries() const { return entries_; }
  double norm() const { return entries_.norm(); }

  TangentMatrix normalized() const { return TangentMatrix(base_, entries_ / norm()); }

  /// Column i is the ambient velocity of frame vector e_i.
  Matrix ambient_velocities() const { return base_.complement() * entries_.transpose(); }

 private:
  Plane base_;
  Matrix entries_;
};

/// Graph coordinate of a plane moving along a geodesic, over the start plane.
struct GeodesicState {
  Matrix z;
  Matrix z_dot;
  double s = 0.0;
};

/// Second derivative prescribed by the geodesic equation
/// Z'' = 2 Z' Z^T (I + Z Z^T)^{-1} Z'.
inline Matrix geodesic_acceleration(const Matrix& z, const Matrix& z_dot) {
  const Eigen::Index n = z.rows();
  const Matrix gram = Matrix::Identity(n, n) + z * z.transpose();
  const Matrix solved = gram.llt().solve(z_dot);
  return 2.0 * z_dot * z.transpose() * solved;
}

/// Integrates the graph-chart geodesic equation from Z(0) = 0, Z'(0) =
/// `initial_velocity` with classical RK4 and step |h| <= min(1e-3, |s|/100).
inline GeodesicState integrate_graph_geodesic(const Matrix& initial_velocity, double s) {
  GeodesicState state{Matrix::Zero(initial_velocity.rows(), initial_velocity.cols()),
                      initial_velocity, 0.0};
  if (s == 0.0) return state;
  if (!std::isfinite(s)) throw Error(ErrorKind::kGraphChartExit, "non-finite arc length");

  const double max_step = std::min(1e-3, std::abs(s) / 100.0);
  const auto steps = static_cast<long>(std::ceil(std::abs(s) / max_step - 1e-9));
  const double h = s / static_cast<double>(steps);

  Matrix& z = state.z;
  Matrix& v = state.z_dot;
  for (long k = 0; k < steps; ++k) {
    const Matrix a1 = geodesic_acceleration(z, v);
    const Matrix z2 = z + 0.5 * h * v, v2 = v + 0.5 * h * a1;
    const Matrix a2 = geodesic_acceleration(z2, v2);
    const Matrix z3 = z + 0.5 * h * v2, v3 = v + 0.5 * h * a2;
    const Matrix a3 = geodesic_acceleration(z3, v3);
    const Matrix z4 = z + h * v3, v4 = v + h * a3;
    const Matrix a4 = geodesic_acceleration(z4, v4);
    z += (h / 6.0) * (v + 2.0 * v2 + 2.0 * v3 + v4);
    v += (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    const double size = z.norm();
    if (!std::isfinite(size) || size > tolerance::kChartExit) {
      throw Error(ErrorKind::kGraphChartExit,
                  "graph coordinate left the chart at s = " + std::to_string((k + 1) * h));
    }
  }
  state.s = s;
  return state;
}

/// The plane spanned by {e_i + z_{i alpha} e_{n+alpha}} over `base`.
inline Plane plane_from_graph_coordinate(const Plane& base, const Matrix& z) {
  if (z.rows() != base.n() || z.cols() != base.m()) {
    throw Error(ErrorKind::kDimensionMismatch, "graph coordinate must be n x m");
  }
  return orthonormalize(base.frame() + base.complement() * z.transpose());
}

inline Plane geodesic(const TangentMatrix& direction, double s) {
  return plane_from_graph_coordinate(direction.base(),
                                     integrate_graph_geodesic(direction.entries(), s).z);
}

/// Same as above, but `p` must span the same subspace as the tangent's base;
/// the base's frames fix the coordinates.
inline Plane geodesic(const Plane& p, const TangentMatrix& direction, double s) {
  if (!same_span(p, direction.base())) {
    throw Error(ErrorKind::kDimensionMismatch, "tangent is not attached to this plane");
  }
  return geodesic(direction, s);
}

/// Z(s) = U tan(s Theta) V^T for initial velocity U Theta V^T.
inline Matrix closed_form_graph_coordinate(const Matrix& initial_velocity, double s) {
  Eigen::JacobiSVD<Matrix> svd(initial_velocity, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& theta = svd.singularValues();
  const double theta_max = theta.size() > 0 ? theta(0) : 0.0;
  if (std::abs(s) * theta_max >= std::numbers::pi / 2.0 - 1e-6) {
    throw Error(ErrorKind::kGraphChartExit, "closed form geodesic reaches a vertical plane");
  }
  const Vector tangents = (s * theta).array().tan().matrix();
  return svd.matrixU() * tangents.asDiagonal() * svd.matrixV().transpose();
}

inline Plane geodesic_closed_form(const TangentMatrix& direction, double s) {
  return plane_from_graph_coordinate(direction.base(),
                                     closed_form_graph_coordinate(direction.entries(), s));
}

/// Graph coordinate L (n x m) of `p` over `q`, so p = span{a_i + L_{i alpha} a_{n+alpha}}.
inline Matrix graph_coordinate(const Plane& p, const Plane& q) {
  if (p.n() != q.n() || p.m() != q.m()) {
    throw Error(ErrorKind::kDimensionMismatch, "graph coordinate needs equal (n, m)");
  }
  const Matrix along = q.frame().transpose() * p.frame();
  const Vector sv = singular_values_of(along);
  if (sv(sv.size() - 1) <= tolerance::kRank) {
    throw Error(ErrorKind::kNotAGraph, "projection onto the base plane is singular");
  }
  const Matrix across = q.complement().transpose() * p.frame();
  // across * along^{-1}, transposed into the n x m convention.
  return along.transpose().partialPivLu().solve(across.transpose());
}

inline bool is_graph_over(const Plane& p, const Plane& q) {
  const Vector sv = singular_values_of(q.frame().transpose() * p.frame());
  return sv(sv.size() - 1) > tolerance::kRank;
}

inline Plane graph_plane(const Plane& q, const Matrix& graph_map) {
  return plane_from_graph_coordinate(q, graph_map);
}

/// Singular values of the graph map of `p` over `q`, descending, padded with
/// zeros to length n.
inline std::vector<double> singular_values(const Plane& p, const Plane& q) {
  const Vector sv = singular_values_of(graph_coordinate(p, q));
  std::vector<double> out(static_cast<std::size_t>(p.n()), 0.0);
  for (Eigen::Index k = 0; k < sv.size(); ++k) out[static_cast<std::size_t>(k)] = sv(k);
  return out;
}

/// Lexicographic k-subsets of {0, ..., count-1}.
inline std::vector<std::vector<int>> combinations(int count, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > count) return out;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == count - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

/// Plucker coordinates of the wedge of the given columns (maximal minors,
/// lexicographic row subsets).
inline Vector exterior_product(const Matrix& columns) {
  const auto subsets = combinations(static_cast<int>(columns.rows()),
                                    static_cast<int>(columns.cols()));
  Vector out(static_cast<Eigen::Index>(subsets.size()));
  Matrix minor(columns.cols(), columns.cols());
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    for (Eigen::Index r = 0; r < columns.cols(); ++r) {
      minor.row(r) = columns.row(subsets[s][static_cast<std::size_t>(r)]);
    }
    out(static_cast<Eigen::Index>(s)) = minor.determinant();
  }
  return out;
}

inline Vector plane_to_nvector(const Plane& p) { return exterior_product(p.frame()); }

}  // namespace gaussflow
