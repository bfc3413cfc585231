#pragma once

// Coordinates on G(2,2) from self-dual and anti-self-dual 2-forms on R^4:
//   alpha_1 = (e12 + e34)/sqrt2   beta_1 = (e12 - e34)/sqrt2
//   alpha_2 = (e13 + e42)/sqrt2   beta_2 = (e13 - e42)/sqrt2
//   alpha_3 = (e14 + e23)/sqrt2   beta_3 = (e14 - e23)/sqrt2
// With the (x1, y1, x2, y2) identification of C^2, sqrt2 * alpha_1 is the
// standard Kaehler form dx1^dy1 + dx2^dy2.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>

#include "gaussflow/grassmann.hpp"

namespace gaussflow {

struct TwoPlaneCoords {
  Eigen::Vector3d alpha;
  Eigen::Vector3d beta;
};

/// The six forms as coefficient vectors over the lexicographic basis
/// (e12, e13, e14, e23, e24, e34) of the wedge square of R^4.
/// Rows 0..2 are alpha_1..3, rows 3..5 are beta_1..3.
inline Eigen::Matrix<double, 6, 6> selfdual_basis() {
  const double c = 1.0 / std::numbers::sqrt2;
  Eigen::Matrix<double, 6, 6> forms;
  //        e12  e13  e14  e23  e24  e34
  forms << c,   0,   0,   0,   0,   c,
           0,   c,   0,   0,  -c,   0,
           0,   0,   c,   c,   0,   0,
           c,   0,   0,   0,   0,  -c,
           0,   c,   0,   0,   c,   0,
           0,   0,   c,  -c,   0,   0;
  return forms;
}

inline void require_two_two(const Plane& p) {
  if (p.n() != 2 || p.m() != 2) {
    throw Error(ErrorKind::kDimensionMismatch, "self-dual coordinates need G(2,2)");
  }
}

inline void require_form_index(int i) {
  if (i < 1 || i > 3) throw Error(ErrorKind::kDimensionMismatch, "form index must be 1, 2 or 3");
}

inline TwoPlaneCoords sd_coordinates(const Plane& p) {
  require_two_two(p);
  const Eigen::Matrix<double, 6, 1> bivector = plane_to_nvector(p);
  const Eigen::Matrix<double, 6, 1> values = selfdual_basis() * bivector;
  return {values.head<3>(), values.tail<3>()};
}

/// alpha_i(P) > 1e-12; depends on the orientation of P's frame.
inline bool is_symplectic(const Plane& p, int i) {
  require_form_index(i);
  return sd_coordinates(p).alpha(i - 1) > 1e-12;
}

/// |alpha_i(P)|: zero exactly on the great circle {alpha_i = 0}.
inline double lagrangian_defect(const Plane& p, int i) {
  require_form_index(i);
  return std::abs(sd_coordinates(p).alpha(i - 1));
}

}  // namespace gaussflow
