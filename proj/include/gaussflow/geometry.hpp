#pragma once

// Discrete extrinsic geometry of a sampled immersion: induced metric,
// second fundamental form, mean curvature vector, normal derivative of H and
// the Gauss plane at every grid point. All derivatives are fourth-order
// central differences on the periodic grid.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <type_traits>
#include <vector>

#include "gaussflow/grassmann.hpp"
#include "gaussflow/immersion.hpp"

namespace gaussflow {

namespace stencil {
// Offsets -2..2.
inline constexpr std::array<double, 5> kFirst{1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0,
                                              -1.0 / 12.0};
inline constexpr std::array<double, 5> kSecond{-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0,
                                               16.0 / 12.0, -1.0 / 12.0};
}  // namespace stencil

/// First and second parameter derivatives of F at one grid point.
struct Jet {
  AmbientFrame tangents;                // ambient x n
  std::array<AmbientVector, 3> second;  // F_xx, F_xy, F_yy (only F_xx when n = 1)

  const AmbientVector& hessian(int a, int b) const {
    return second[static_cast<std::size_t>(a + b)];
  }
};

inline Jet immersion_jet(const ImmersionGrid& grid, int i, int j) {
  const int n = grid.n();
  Jet jet;
  jet.tangents.resize(grid.ambient(), n);
  const double hx = grid.spacing(0);
  AmbientVector dx = AmbientVector::Zero(grid.ambient());
  AmbientVector dxx = AmbientVector::Zero(grid.ambient());
  for (int o = -2; o <= 2; ++o) {
    const AmbientVector p = grid.point(i + o, j);
    dx += stencil::kFirst[static_cast<std::size_t>(o + 2)] * p;
    dxx += stencil::kSecond[static_cast<std::size_t>(o + 2)] * p;
  }
  jet.tangents.col(0) = dx / hx;
  jet.second[0] = dxx / (hx * hx);
  if (n == 2) {
    const double hy = grid.spacing(1);
    AmbientVector dy = AmbientVector::Zero(grid.ambient());
    AmbientVector dyy = AmbientVector::Zero(grid.ambient());
    AmbientVector dxy = AmbientVector::Zero(grid.ambient());
    for (int o = -2; o <= 2; ++o) {
      const AmbientVector p = grid.point(i, j + o);
      dy += stencil::kFirst[static_cast<std::size_t>(o + 2)] * p;
      dyy += stencil::kSecond[static_cast<std::size_t>(o + 2)] * p;
    }
    for (int a = -2; a <= 2; ++a) {
      const double wa = stencil::kFirst[static_cast<std::size_t>(a + 2)];
      if (wa == 0.0) continue;
      for (int b = -2; b <= 2; ++b) {
        const double wb = stencil::kFirst[static_cast<std::size_t>(b + 2)];
        if (wb == 0.0) continue;
        dxy += (wa * wb) * grid.point(i + a, j + b);
      }
    }
    jet.tangents.col(1) = dy / hy;
    jet.second[1] = dxy / (hx * hy);
    jet.second[2] = dyy / (hy * hy);
  }
  return jet;
}

/// Gram-Schmidt on the tangent columns; same orientation as the input.
inline AmbientFrame orthonormal_tangents(const AmbientFrame& tangents) {
  AmbientFrame e = tangents;
  for (Eigen::Index j = 0; j < e.cols(); ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < j; ++k) {
        const double c = e.col(k).dot(e.col(j));
        if (c != 0.0) e.col(j) -= c * e.col(k);
      }
    }
    e.col(j) /= e.col(j).norm();
  }
  return e;
}

inline AmbientVector normal_part(const AmbientFrame& orthonormal, const AmbientVector& v) {
  return v - orthonormal * (orthonormal.transpose() * v);
}

inline constexpr double kDegenerateGram = 1e-10;

inline SmallSquare metric_of(const Jet& jet) { return jet.tangents.transpose() * jet.tangents; }

inline void require_immersed(const SmallSquare& metric) {
  const double det = metric.determinant();
  if (!(det > kDegenerateGram)) {
    throw Error(ErrorKind::kDegenerateMetric, "Gram determinant " + std::to_string(det));
  }
}

/// H = g^{ij} A_ij with A_ij the normal part of the second derivatives.
inline AmbientVector mean_curvature_at(const Jet& jet, const SmallSquare& inverse_metric,
                                       const AmbientFrame& orthonormal) {
  const int n = static_cast<int>(jet.tangents.cols());
  AmbientVector h = AmbientVector::Zero(jet.tangents.rows());
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) h += inverse_metric(a, b) * jet.hessian(a, b);
  }
  return normal_part(orthonormal, h);
}

/// Mean curvature vectors only (ambient x points); the inner loop of the
/// flow stepper.
inline Matrix mean_curvature_field(const ImmersionGrid& grid) {
  Matrix out(grid.ambient(), grid.point_count());
  const int n1 = grid.resolution(0);
  const int n2 = grid.n() == 2 ? grid.resolution(1) : 1;
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      const Jet jet = immersion_jet(grid, i, j);
      const SmallSquare g = metric_of(jet);
      require_immersed(g);
      out.col(grid.index(i, j)) =
          mean_curvature_at(jet, g.inverse(), orthonormal_tangents(jet.tangents));
    }
  }
  return out;
}

/// Total area (length for curves): sum of sqrt(det g) times the cell volume.
inline double total_area(const ImmersionGrid& grid) {
  const int n1 = grid.resolution(0);
  const int n2 = grid.n() == 2 ? grid.resolution(1) : 1;
  double sum = 0.0;
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      const Jet jet = immersion_jet(grid, i, j);
      sum += std::sqrt(metric_of(jet).determinant());
    }
  }
  return sum * grid.cell_volume();
}

struct PointGeometry {
  Matrix tangents;        // dF/dx^k as columns
  Matrix metric;          // g_ij
  Matrix inverse_metric;  // g^ij
  double volume_density;  // sqrt(det g)
  std::vector<Vector> second_fundamental_form;  // A_ij at index i * n + j
  Vector mean_curvature;
  Matrix normal_derivative_h;  // column k: normal part of dH/dx^k
  Plane gauss_plane;

  const Vector& second_form(int a, int b) const {
    return second_fundamental_form[static_cast<std::size_t>(a * tangents.cols() + b)];
  }
};

class GeometryField {
 public:
  GeometryField(const ImmersionGrid& grid, std::vector<PointGeometry> points)
      : n_(grid.n()), m_(grid.m()), resolution_(grid.resolution()), points_(std::move(points)) {
    for (int k = 0; k < n_; ++k) spacing_.push_back(grid.spacing(k));
  }

  int n() const { return n_; }
  int m() const { return m_; }
  int resolution(int axis) const { return resolution_[static_cast<std::size_t>(axis)]; }
  const std::vector<int>& resolution() const { return resolution_; }
  double spacing(int axis) const { return spacing_[static_cast<std::size_t>(axis)]; }
  std::size_t size() const { return points_.size(); }
  const PointGeometry& operator[](std::size_t k) const { return points_[k]; }
  const PointGeometry& at(int i, int j = 0) const {
    return points_[static_cast<std::size_t>(index(i, j))];
  }
  const std::vector<PointGeometry>& points() const { return points_; }

  Eigen::Index index(int i, int j = 0) const {
    const auto wrap = [](int v, int r) { return ((v % r) + r) % r; };
    return wrap(i, resolution(0)) +
           (n_ == 2 ? static_cast<Eigen::Index>(wrap(j, resolution(1))) * resolution(0) : 0);
  }

  bool same_layout(const GeometryField& other) const {
    return n_ == other.n_ && m_ == other.m_ && resolution_ == other.resolution_;
  }

 private:
  int n_;
  int m_;
  std::vector<int> resolution_;
  std::vector<double> spacing_;
  std::vector<PointGeometry> points_;
};

/// Fourth-order central derivative along `axis` of a periodic per-point
/// field stored column-wise.
template <class Field, class Layout>
auto periodic_derivative(const Field& field, const Layout& layout, int axis, int i, int j,
                         double h) {
  using Column = std::remove_cvref_t<decltype(field.col(0).eval())>;
  Column out = Column::Zero(field.rows());
  for (int o = -2; o <= 2; ++o) {
    const double w = stencil::kFirst[static_cast<std::size_t>(o + 2)];
    if (w == 0.0) continue;
    out += w * field.col(axis == 0 ? layout.index(i + o, j) : layout.index(i, j + o));
  }
  return (out / h).eval();
}

inline GeometryField compute_geometry(const ImmersionGrid& grid) {
  const int n = grid.n();
  const int n1 = grid.resolution(0);
  const int n2 = n == 2 ? grid.resolution(1) : 1;
  std::vector<PointGeometry> points;
  points.reserve(static_cast<std::size_t>(grid.point_count()));
  Matrix h_field(grid.ambient(), grid.point_count());

  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      const Jet jet = immersion_jet(grid, i, j);
      const SmallSquare g = metric_of(jet);
      require_immersed(g);
      const SmallSquare g_inv = g.inverse();
      const AmbientFrame e = orthonormal_tangents(jet.tangents);
      std::vector<Vector> second_form;
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) second_form.emplace_back(normal_part(e, jet.hessian(a, b)));
      }
      const AmbientVector h = mean_curvature_at(jet, g_inv, e);
      h_field.col(grid.index(i, j)) = h;
      points.push_back(PointGeometry{Matrix(jet.tangents), Matrix(g), Matrix(g_inv),
                                     std::sqrt(g.determinant()), std::move(second_form),
                                     Vector(h), Matrix(), orthonormalize(Matrix(jet.tangents))});
    }
  }

  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      PointGeometry& pg = points[static_cast<std::size_t>(grid.index(i, j))];
      const AmbientFrame e = pg.gauss_plane.frame();
      pg.normal_derivative_h.resize(grid.ambient(), n);
      for (int k = 0; k < n; ++k) {
        const AmbientVector dh = periodic_derivative(h_field, grid, k, i, j, grid.spacing(k));
        pg.normal_derivative_h.col(k) = normal_part(e, dh);
      }
    }
  }
  return GeometryField(grid, std::move(points));
}

/// (1/sqrt g) d_i (sqrt g g^{ij} d_j u) on the periodic grid.
inline Vector laplace_beltrami(const Vector& field, const GeometryField& geometry) {
  const auto count = static_cast<Eigen::Index>(geometry.size());
  if (field.size() != count) {
    throw Error(ErrorKind::kGridMismatch, "field and geometry sizes differ");
  }
  const int n = geometry.n();
  const int n1 = geometry.resolution(0);
  const int n2 = n == 2 ? geometry.resolution(1) : 1;
  const Eigen::Map<const Matrix> u(field.data(), 1, count);

  Matrix flux(n, count);
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      const PointGeometry& pg = geometry.at(i, j);
      Vector grad(n);
      for (int k = 0; k < n; ++k) {
        grad(k) = periodic_derivative(u, geometry, k, i, j, geometry.spacing(k))(0);
      }
      flux.col(geometry.index(i, j)) = pg.volume_density * (pg.inverse_metric * grad);
    }
  }
  Vector out(count);
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      double div = 0.0;
      for (int k = 0; k < n; ++k) {
        div += periodic_derivative(flux.row(k), geometry, k, i, j, geometry.spacing(k))(0);
      }
      out(geometry.index(i, j)) = div / geometry.at(i, j).volume_density;
    }
  }
  return out;
}

}  // namespace gaussflow
