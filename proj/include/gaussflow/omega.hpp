#pragma once

// The function Omega of a simple unit n-form on G(n, m), the second
// derivative of ln Omega along geodesics, the area-decreasing region Xi with
// its singular-value and bilinear-form characterizations, and the boundary
// second-variation quantities used to show Xi is convex.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gaussflow/grassmann.hpp"

namespace gaussflow {

/// A simple unit n-form, represented by its dual n-plane.
struct OmegaForm {
  Plane base;
};

/// Omega(P) = |det(Q^T P)|. Graph planes give 1 / sqrt(prod(1 + lambda_i^2)),
/// planes that are not graphs give 0.
inline double omega_value(const OmegaForm& form, const Plane& p) {
  if (form.base.n() != p.n() || form.base.m() != p.m()) {
    throw Error(ErrorKind::kDimensionMismatch, "omega_value needs equal (n, m)");
  }
  return std::abs((form.base.frame().transpose() * p.frame()).determinant());
}

/// Orthonormal frames of P, P^perp, Q and Q^perp in which the graph map of P
/// over Q is diagonal:
///   e_i       = (a_i + lambda_i a_{n+i}) / sqrt(1 + lambda_i^2)
///   e_{n+a}   = (a_{n+a} - lambda_a a_a) / sqrt(1 + lambda_a^2)
/// with lambda_k = 0 past min(n, m).
struct AdaptedFrame {
  std::vector<double> lambdas;  // length n, descending
  Matrix tangent;               // e_1 .. e_n
  Matrix normal;                // e_{n+1} .. e_{n+m}
  Matrix base_tangent;          // a_1 .. a_n
  Matrix base_normal;           // a_{n+1} .. a_{n+m}

  double lambda(int k) const {
    return k < static_cast<int>(lambdas.size()) ? lambdas[static_cast<std::size_t>(k)] : 0.0;
  }
};

inline AdaptedFrame svd_adapted_frame(const Plane& p, const Plane& q) {
  const Matrix graph = graph_coordinate(p, q);  // n x m, throws NotAGraph
  const int n = p.n(), m = p.m(), r = std::min(n, m);
  Eigen::JacobiSVD<Matrix> svd(graph, Eigen::ComputeFullU | Eigen::ComputeFullV);

  AdaptedFrame f;
  f.lambdas.assign(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < r; ++k) f.lambdas[static_cast<std::size_t>(k)] = svd.singularValues()(k);
  // graph = U diag V^T maps a'_i = Q U_i to lambda_i Q^perp V_i.
  f.base_tangent = q.frame() * svd.matrixU();
  f.base_normal = q.complement() * svd.matrixV();

  f.tangent.resize(p.ambient(), n);
  for (int i = 0; i < n; ++i) {
    const double l = f.lambda(i);
    Vector e = f.base_tangent.col(i);
    if (i < m) e += l * f.base_normal.col(i);
    f.tangent.col(i) = e / std::sqrt(1.0 + l * l);
  }
  f.normal.resize(p.ambient(), m);
  for (int a = 0; a < m; ++a) {
    const double l = a < n ? f.lambda(a) : 0.0;
    Vector e = f.base_normal.col(a);
    if (a < n) e -= l * f.base_tangent.col(a);
    f.normal.col(a) = e / std::sqrt(1.0 + l * l);
  }
  return f;
}

/// Re-expresses a tangent in the adapted frames: mu = R1^T A R2.
inline Matrix adapted_coordinates(const TangentMatrix& direction, const AdaptedFrame& frame) {
  const Matrix r1 = direction.base().frame().transpose() * frame.tangent;
  const Matrix r2 = direction.base().complement().transpose() * frame.normal;
  return r1.transpose() * direction.entries() * r2;
}

/// (ln p)''(0) in adapted coordinates:
///   -sum mu_{i,n+a}^2 - 2 sum_{i<j} mu_{i,n+j} mu_{j,n+i} l_i l_j - sum_i (mu_{i,n+i} l_i)^2
inline double ln_omega_hessian_formula(std::span<const double> lambdas, const Matrix& mu) {
  const Eigen::Index r = std::min(mu.rows(), mu.cols());
  double value = -mu.squaredNorm();
  for (Eigen::Index i = 0; i < r; ++i) {
    const double li = lambdas[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < r; ++j) {
      value -= 2.0 * mu(i, j) * mu(j, i) * li * lambdas[static_cast<std::size_t>(j)];
    }
    const double d = mu(i, i) * li;
    value -= d * d;
  }
  return value;
}

/// Second derivative of ln Omega at s = 0 along the geodesic from the
/// tangent's base plane with the tangent's direction.
inline double ln_omega_second_derivative(const OmegaForm& form, const TangentMatrix& direction) {
  const AdaptedFrame frame = svd_adapted_frame(direction.base(), form.base);
  return ln_omega_hessian_formula(frame.lambdas, adapted_coordinates(direction, frame));
}

inline double ln_omega_second_derivative(const OmegaForm& form, const Plane& p,
                                         const TangentMatrix& direction) {
  if (!same_span(p, direction.base())) {
    throw Error(ErrorKind::kDimensionMismatch, "tangent is not attached to this plane");
  }
  return ln_omega_second_derivative(form, direction);
}

// ---------------------------------------------------------------------------
// Xi membership

struct XiVerdict {
  bool is_member = false;
  std::vector<double> lambdas;
  std::optional<double> worst_pair_product;
  std::optional<double> sigma_min_eigenvalue;
};

inline constexpr double kXiTolerance = 1e-10;

/// Graph over Q with |lambda_i lambda_j| <= 1 for all i != j.
inline XiVerdict xi_membership_lambda(const Plane& p, const Plane& q) {
  XiVerdict verdict;
  if (!is_graph_over(p, q)) return verdict;
  verdict.lambdas = singular_values(p, q);
  double worst = 0.0;
  for (std::size_t i = 0; i < verdict.lambdas.size(); ++i) {
    for (std::size_t j = i + 1; j < verdict.lambdas.size(); ++j) {
      worst = std::max(worst, std::abs(verdict.lambdas[i] * verdict.lambdas[j]));
    }
  }
  verdict.worst_pair_product = worst;
  verdict.is_member = worst <= 1.0 + kXiTolerance;
  return verdict;
}

/// S restricted to P and the induced derivation on the wedge square of P,
/// both in one orthonormal frame of P (pairs i < j in lexicographic order).
struct SigmaOperator {
  Matrix s_matrix;
  Matrix sigma_on_wedge;
};

/// S(X, Y) = <pi_1 X, pi_1 Y> - <pi_2 X, pi_2 Y> for the splitting Q + Q^perp.
inline Matrix split_form(const Plane& q) {
  return q.frame() * q.frame().transpose() - q.complement() * q.complement().transpose();
}

inline Matrix wedge_derivation(const Matrix& s) {
  const auto pairs = combinations(static_cast<int>(s.rows()), 2);
  const auto size = static_cast<Eigen::Index>(pairs.size());
  const auto delta = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  Matrix out(size, size);
  for (Eigen::Index row = 0; row < size; ++row) {
    const int i = pairs[static_cast<std::size_t>(row)][0];
    const int j = pairs[static_cast<std::size_t>(row)][1];
    for (Eigen::Index col = 0; col < size; ++col) {
      const int k = pairs[static_cast<std::size_t>(col)][0];
      const int l = pairs[static_cast<std::size_t>(col)][1];
      out(row, col) = s(i, k) * delta(j, l) + s(j, l) * delta(i, k) - s(i, l) * delta(j, k) -
                      s(j, k) * delta(i, l);
    }
  }
  return out;
}

/// `frame` is any orthonormal frame of P (ambient x n).
inline SigmaOperator sigma_operator(const Matrix& frame, const Plane& q) {
  if (frame.rows() != q.ambient() || frame.cols() != q.n()) {
    throw Error(ErrorKind::kDimensionMismatch, "sigma_operator needs equal (n, m)");
  }
  SigmaOperator op;
  op.s_matrix = frame.transpose() * split_form(q) * frame;
  op.s_matrix = 0.5 * (op.s_matrix + op.s_matrix.transpose()).eval();
  op.sigma_on_wedge = wedge_derivation(op.s_matrix);
  return op;
}

inline SigmaOperator sigma_operator(const Plane& p, const Plane& q) {
  if (p.n() != q.n() || p.m() != q.m()) {
    throw Error(ErrorKind::kDimensionMismatch, "sigma_operator needs equal (n, m)");
  }
  return sigma_operator(p.frame(), q);
}

inline Vector symmetric_eigenvalues(const Matrix& a) {
  if (a.size() == 0) return Vector(0);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

/// 2 (1 - l_i^2 l_j^2) / ((1 + l_i^2)(1 + l_j^2)) for i < j, ascending.
inline std::vector<double> wedge_eigenvalues_from_lambdas(std::span<const double> lambdas) {
  std::vector<double> out;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    for (std::size_t j = i + 1; j < lambdas.size(); ++j) {
      const double a = lambdas[i] * lambdas[i], b = lambdas[j] * lambdas[j];
      out.push_back(2.0 * (1.0 - a * b) / ((1.0 + a) * (1.0 + b)));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Graph over Q with sigma nonnegative on the wedge square of P.
inline XiVerdict xi_membership_sigma(const Plane& p, const Plane& q,
                                     double tolerance = kXiTolerance) {
  XiVerdict verdict;
  const bool graph = is_graph_over(p, q);
  if (p.n() >= 2) {
    verdict.sigma_min_eigenvalue = symmetric_eigenvalues(sigma_operator(p, q).sigma_on_wedge)(0);
    verdict.is_member = graph && *verdict.sigma_min_eigenvalue >= -tolerance;
  } else {
    verdict.is_member = graph;
  }
  return verdict;
}

// ---------------------------------------------------------------------------
// Boundary second variation

struct BoundaryVariation {
  double f_prime = 0.0;
  double f_double_prime = 0.0;
  double f_value = 0.0;          // f(0), the vanishing sigma eigenvalue
  std::pair<int, int> pair{0, 1};  // omega = e_p ^ e_q in the adapted frame
  Matrix mu;                      // direction in adapted coordinates
};

inline constexpr double kBoundaryTolerance = 1e-8;

/// Everything the boundary computation needs, shared with the direct
/// evaluation of f(s) below.
struct BoundarySetup {
  AdaptedFrame frame;
  Matrix split;  // ambient S
  std::pair<int, int> pair;
  double sigma0 = 0.0;
};

inline BoundarySetup boundary_setup(const Plane& p, const Plane& q) {
  if (p.n() < 2) throw Error(ErrorKind::kNotBoundaryPoint, "n = 1 has no wedge square");
  BoundarySetup setup{svd_adapted_frame(p, q), split_form(q), {0, 1}, 0.0};
  const Matrix s0 = setup.frame.tangent.transpose() * setup.split * setup.frame.tangent;
  const Vector eig = symmetric_eigenvalues(wedge_derivation(s0));
  if (std::abs(eig(0)) > kBoundaryTolerance) {
    throw Error(ErrorKind::kNotBoundaryPoint,
                "smallest sigma eigenvalue " + std::to_string(eig(0)) + " is not zero");
  }
  // The adapted frame diagonalizes sigma; pick the pair carrying the zero.
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.n(); ++i) {
    for (int j = i + 1; j < p.n(); ++j) {
      const double d = s0(i, i) + s0(j, j);
      if (std::abs(d) < best) {
        best = std::abs(d);
        setup.pair = {i, j};
        setup.sigma0 = d;
      }
    }
  }
  return setup;
}

/// Analytic f'(0), f''(0) for f(s) = <sigma(P_s) omega_s, omega_s>, where
/// omega_s keeps its coefficient stationary to first order and
/// 2 (omega^{pq})''(0) = -g''_pp - g''_qq.
inline BoundaryVariation boundary_second_variation(const Plane& p, const Plane& q,
                                                   const TangentMatrix& direction) {
  if (!same_span(p, direction.base())) {
    throw Error(ErrorKind::kDimensionMismatch, "tangent is not attached to this plane");
  }
  const BoundarySetup setup = boundary_setup(p, q);
  const AdaptedFrame& f = setup.frame;
  const Matrix mu = adapted_coordinates(direction, f);

  const Matrix s0 = f.tangent.transpose() * setup.split * f.tangent;
  const Matrix s_normal_tangent = f.normal.transpose() * setup.split * f.tangent;  // S(e_{n+a}, e_j)
  const Matrix s_normal = f.normal.transpose() * setup.split * f.normal;

  const Matrix mixed = mu * s_normal_tangent;
  const Matrix s1 = mixed + mixed.transpose();
  const Matrix s2 = 2.0 * mu * s_normal * mu.transpose();
  const Matrix g2 = 2.0 * mu * mu.transpose();

  const auto [i, j] = setup.pair;
  const double sigma1 = s1(i, i) + s1(j, j);
  const double sigma2 = s2(i, i) + s2(j, j) + s0(i, i) * g2(j, j) + s0(j, j) * g2(i, i) -
                        s0(i, j) * g2(j, i) - s0(j, i) * g2(i, j);
  const double w2 = -0.5 * (g2(i, i) + g2(j, j));

  BoundaryVariation out;
  out.pair = setup.pair;
  out.mu = mu;
  out.f_value = setup.sigma0;
  out.f_prime = sigma1;
  out.f_double_prime = sigma2 + 2.0 * w2 * setup.sigma0;
  return out;
}

/// f(s) evaluated directly from the basis e_i + z_{i a}(s) e_{n+a} of the
/// integrated geodesic, with the same extension of omega.
inline double boundary_extension_value(const BoundarySetup& setup, const Matrix& mu, double s) {
  const AdaptedFrame& f = setup.frame;
  const Matrix z = integrate_graph_geodesic(mu, s).z;
  const Matrix basis = f.tangent + f.normal * z.transpose();
  const Matrix sm = basis.transpose() * setup.split * basis;
  const Matrix g = basis.transpose() * basis;
  const auto [i, j] = setup.pair;
  const double sigma = sm(i, i) * g(j, j) + sm(j, j) * g(i, i) - sm(i, j) * g(j, i) -
                       sm(j, i) * g(i, j);
  const double g2_sum = 2.0 * (mu.row(i).squaredNorm() + mu.row(j).squaredNorm());
  const double w = 1.0 - 0.25 * g2_sum * s * s;
  return w * w * sigma;
}

// ---------------------------------------------------------------------------
// Local convexity of Xi

/// Newton shooting for the initial velocity M with closed-form geodesic
/// reaching `to` at s = 1 (graph coordinate residual below `tol`).
inline TangentMatrix shoot_log_map(const Plane& from, const Plane& to, Matrix guess,
                                   int max_iterations = 100, double tol = 1e-8) {
  const Matrix target = graph_coordinate(to, from);
  const Eigen::Index n = guess.rows(), m = guess.cols(), dim = n * m;
  const auto residual = [&](const Matrix& velocity) {
    const Matrix diff = closed_form_graph_coordinate(velocity, 1.0) - target;
    return Vector(Eigen::Map<const Vector>(diff.data(), dim));
  };
  for (int iter = 0; iter < max_iterations; ++iter) {
    Vector r;
    try {
      r = residual(guess);
    } catch (const Error&) {
      guess *= 0.5;
      continue;
    }
    if (r.norm() < tol) return TangentMatrix(from, guess);
    Matrix jacobian(dim, dim);
    constexpr double kStep = 1e-7;
    for (Eigen::Index k = 0; k < dim; ++k) {
      Matrix bumped = guess;
      bumped.data()[k] += kStep;
      jacobian.col(k) = (residual(bumped) - r) / kStep;
    }
    const Vector update = jacobian.colPivHouseholderQr().solve(-r);
    guess += Eigen::Map<const Matrix>(update.data(), n, m);
  }
  throw Error(ErrorKind::kNoGeodesicFound, "shooting did not converge");
}

/// Initial velocity of the minimizing geodesic from `from` to `to` at s = 1:
/// U atan(Sigma) V^T for graph coordinate U Sigma V^T.
inline TangentMatrix log_map(const Plane& from, const Plane& to) {
  Matrix graph;
  try {
    graph = graph_coordinate(to, from);
  } catch (const Error&) {
    throw Error(ErrorKind::kNoGeodesicFound, "target is not a graph over the start plane");
  }
  Eigen::JacobiSVD<Matrix> svd(graph, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector angles = svd.singularValues().array().atan().matrix();
  Matrix velocity = svd.matrixU() * angles.asDiagonal() * svd.matrixV().transpose();
  TangentMatrix candidate(from, velocity);
  if (same_span(geodesic_closed_form(candidate, 1.0), to, 1e-8)) return candidate;
  return shoot_log_map(from, to, std::move(velocity));
}

/// True iff `samples` interior points of the geodesic from p1 to p2 all lie
/// in Xi (sigma eigenvalue tolerance 1e-8). Local statement only: inputs
/// are expected within distance 0.5 of each other.
inline bool convexity_probe(const Plane& p1, const Plane& p2, const Plane& q, int samples) {
  if (same_span(p1, p2)) return xi_membership_sigma(p1, q, kBoundaryTolerance).is_member;
  const TangentMatrix direction = log_map(p1, p2);
  for (int k = 1; k <= samples; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(samples + 1);
    if (!xi_membership_sigma(geodesic_closed_form(direction, s), q, kBoundaryTolerance).is_member) {
      return false;
    }
  }
  return true;
}

}  // namespace gaussflow
