#pragma once

// Probes that compare a discrete mean curvature flow against the evolution
// laws of its Gauss map: the harmonic map heat flow, the volume element law,
// the heat-equation inequality for -ln Omega composed with the Gauss map
// (and the exact identity behind it), the Lagrangian condition, and the
// monotonicity of min Omega.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "gaussflow/flow.hpp"
#include "gaussflow/omega.hpp"

namespace gaussflow {

/// Unit n-vector of the tangent plane at every grid point, oriented by the
/// coordinate order.
inline std::vector<Vector> gauss_field(const FlowState& state) {
  std::vector<Vector> out;
  out.reserve(state.geometry().size());
  for (const PointGeometry& pg : state.geometry().points()) {
    out.push_back(plane_to_nvector(pg.gauss_plane));
  }
  return out;
}

inline Vector aligned_with(const Vector& v, const Vector& reference) {
  return v.dot(reference) < 0.0 ? Vector(-v) : v;
}

/// Change of basis from coordinate tangents to the orthonormal frame:
/// e_k = sum_a C(a, k) dF/dx^a.
inline Matrix orthonormal_from_coordinates(const PointGeometry& pg) {
  const Matrix r = pg.gauss_plane.frame().transpose() * pg.tangents;  // upper triangular
  return r.inverse();
}

/// sum_i e_1 ^ .. ^ (normal derivative of H along e_i) ^ .. ^ e_n.
inline Vector tension_nvector(const PointGeometry& pg) {
  const Matrix& e = pg.gauss_plane.frame();
  const Matrix grad_h = pg.normal_derivative_h * orthonormal_from_coordinates(pg);
  Vector out = Vector::Zero(exterior_product(e).size());
  for (Eigen::Index i = 0; i < e.cols(); ++i) {
    Matrix replaced = e;
    replaced.col(i) = grad_h.col(i);
    out += exterior_product(replaced);
  }
  return out;
}

/// Half the time spacing of three consecutive, equally spaced states.
inline double central_half_span(const FlowState& prev, const FlowState& cur,
                                const FlowState& next) {
  if (!prev.surface().same_layout(cur.surface()) || !cur.surface().same_layout(next.surface())) {
    throw Error(ErrorKind::kGridMismatch, "states live on different grids");
  }
  const double back = cur.time() - prev.time();
  const double ahead = next.time() - cur.time();
  if (!(back > 0.0) || std::abs(back - ahead) > 1e-9 * std::max(back, ahead)) {
    throw Error(ErrorKind::kGridMismatch, "states are not equally spaced in time");
  }
  return 0.5 * (next.time() - prev.time());
}

/// |d gamma / dt - tension| per point, with the time derivative taken by a
/// central difference of sign-aligned n-vectors.
inline std::vector<double> theorem_a_residual(const FlowState& prev, const FlowState& cur,
                                              const FlowState& next) {
  const double dt = central_half_span(prev, cur, next);
  const GeometryField& g = cur.geometry();
  const GeometryField& gp = prev.geometry();
  const GeometryField& gn = next.geometry();
  std::vector<double> out(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vector gamma = plane_to_nvector(g[k].gauss_plane);
    const Vector before = aligned_with(plane_to_nvector(gp[k].gauss_plane), gamma);
    const Vector after = aligned_with(plane_to_nvector(gn[k].gauss_plane), gamma);
    out[k] = ((after - before) / (2.0 * dt) - tension_nvector(g[k])).norm();
  }
  return out;
}

/// |d/dt sqrt(det g) + |H|^2 sqrt(det g)| per point.
inline std::vector<double> volume_law_residual(const FlowState& prev, const FlowState& cur,
                                               const FlowState& next) {
  const double dt = central_half_span(prev, cur, next);
  const GeometryField& g = cur.geometry();
  std::vector<double> out(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double rate =
        (next.geometry()[k].volume_density - prev.geometry()[k].volume_density) / (2.0 * dt);
    out[k] = std::abs(rate + g[k].mean_curvature.squaredNorm() * g[k].volume_density);
  }
  return out;
}

inline constexpr double kGraphicalOmegaFloor = 0.05;

/// -ln Omega of the Gauss plane at every point.
inline Vector neg_ln_omega_field(const FlowState& state, const OmegaForm& form) {
  const GeometryField& g = state.geometry();
  Vector out(static_cast<Eigen::Index>(g.size()));
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double omega = omega_value(form, g[k].gauss_plane);
    if (!(omega > kGraphicalOmegaFloor)) {
      throw Error(ErrorKind::kOutOfChart,
                  "Omega = " + std::to_string(omega) + " at t = " + std::to_string(state.time()));
    }
    out(static_cast<Eigen::Index>(k)) = -std::log(omega);
  }
  return out;
}

/// (d/dt - Laplacian) of -ln Omega composed with the Gauss map, per point.
inline std::vector<double> corollary_a_check(const FlowState& prev, const FlowState& cur,
                                             const FlowState& next, const OmegaForm& form) {
  const double dt = central_half_span(prev, cur, next);
  const Vector rho = neg_ln_omega_field(cur, form);
  const Vector rate = (neg_ln_omega_field(next, form) - neg_ln_omega_field(prev, form)) / (2.0 * dt);
  const Vector heat = rate - laplace_beltrami(rho, cur.geometry());
  return std::vector<double>(heat.data(), heat.data() + heat.size());
}

/// d gamma(e_k) as a tangent at the Gauss plane: row i, column a holds
/// <A(e_k, e_i), nu_a> with nu the plane's complement frame.
inline TangentMatrix gauss_differential(const PointGeometry& pg, int k) {
  const Matrix c = orthonormal_from_coordinates(pg);
  const auto n = static_cast<int>(pg.tangents.cols());
  Matrix entries(n, pg.gauss_plane.m());
  for (int i = 0; i < n; ++i) {
    Vector a = Vector::Zero(pg.tangents.rows());
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) a += c(p, k) * c(q, i) * pg.second_form(p, q);
    }
    entries.row(i) = (pg.gauss_plane.complement().transpose() * a).transpose();
  }
  return TangentMatrix(pg.gauss_plane, std::move(entries));
}

/// (d/dt - Laplacian) rho + sum_k Hess rho(d gamma(e_k), d gamma(e_k)) for
/// rho = -ln Omega; vanishes for the continuous flow.
inline std::vector<double> identity22_residual(const FlowState& prev, const FlowState& cur,
                                               const FlowState& next, const OmegaForm& form) {
  std::vector<double> out = corollary_a_check(prev, cur, next, form);
  const GeometryField& g = cur.geometry();
  for (std::size_t p = 0; p < g.size(); ++p) {
    for (int k = 0; k < g.n(); ++k) {
      out[p] -= ln_omega_second_derivative(form, gauss_differential(g[p], k));
    }
  }
  return out;
}

/// Max over orthonormal tangent pairs of |omega_std(u, v)|, with the ambient
/// read as C^n in (x1, y1, .., xn, yn) order. Needs m = n.
inline std::vector<double> lagrangian_defect_field(const FlowState& state) {
  const ImmersionGrid& grid = state.surface();
  if (grid.m() != grid.n()) {
    throw Error(ErrorKind::kDimensionMismatch, "the Lagrangian monitor needs m = n");
  }
  const GeometryField& g = state.geometry();
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Matrix& e = g[p].gauss_plane.frame();
    for (Eigen::Index i = 0; i < e.cols(); ++i) {
      for (Eigen::Index j = i + 1; j < e.cols(); ++j) {
        double w = 0.0;
        for (Eigen::Index c = 0; c + 1 < e.rows(); c += 2) {
          w += e(c, i) * e(c + 1, j) - e(c + 1, i) * e(c, j);
        }
        out[p] = std::max(out[p], std::abs(w));
      }
    }
  }
  return out;
}

inline double lagrangian_monitor(const FlowState& state) {
  const std::vector<double> field = lagrangian_defect_field(state);
  return *std::max_element(field.begin(), field.end());
}

inline double min_omega(const FlowState& state, const OmegaForm& form) {
  double out = std::numeric_limits<double>::infinity();
  for (const PointGeometry& pg : state.geometry().points()) {
    out = std::min(out, omega_value(form, pg.gauss_plane));
  }
  return out;
}

inline std::vector<double> min_omega_monitor(std::span<const FlowState> states,
                                             const OmegaForm& form) {
  std::vector<double> out;
  out.reserve(states.size());
  for (const FlowState& s : states) out.push_back(min_omega(s, form));
  return out;
}

/// Largest single-step decrease of a series (0 when nondecreasing).
inline double largest_drop(std::span<const double> series) {
  double drop = 0.0;
  for (std::size_t k = 1; k < series.size(); ++k) drop = std::max(drop, series[k - 1] - series[k]);
  return drop;
}

inline double max_of(std::span<const double> values) {
  double out = -std::numeric_limits<double>::infinity();
  for (double v : values) out = std::max(out, v);
  return out;
}

inline double max_abs_of(std::span<const double> values) {
  double out = 0.0;
  for (double v : values) out = std::max(out, std::abs(v));
  return out;
}

// ---------------------------------------------------------------------------
// Flow runs

struct ProbeSet {
  bool thm_a = false;
  bool volume_law = false;
  bool cor_a = false;
  bool identity22 = false;
  bool lagrangian = false;
  bool min_omega = false;
};

/// Probes that are disabled, or need a previous state (the t = 0 row), are
/// reported as 0.
struct DiagnosticsRecord {
  double time = 0.0;
  double total_area = 0.0;
  double min_omega = 0.0;
  double max_thm_a_residual = 0.0;
  double max_volume_law_residual = 0.0;
  double max_cor_a_value = 0.0;
  double max_identity22_residual = 0.0;
  double max_lagrangian_defect = 0.0;
  double mean_radius = 0.0;
};

struct FlowRunConfig {
  double dt = 1e-5;
  double t_end = 0.0;
  double cfl_factor = kDefaultCflFactor;
  long record_every = 1;
  ProbeSet probes;
  std::optional<OmegaForm> omega;  // needed by cor_a, identity22, min_omega
  double halt_volume_density = 1e-4;
};

struct FlowRunResult {
  std::vector<DiagnosticsRecord> records;
  bool halted_early = false;
  long steps_taken = 0;
};

inline DiagnosticsRecord static_record(const FlowState& state, const FlowRunConfig& config) {
  DiagnosticsRecord r;
  r.time = state.time();
  r.total_area = total_area(state.surface());
  r.mean_radius = mean_radius(state.surface());
  if (config.probes.min_omega) r.min_omega = min_omega(state, *config.omega);
  if (config.probes.lagrangian) r.max_lagrangian_defect = lagrangian_monitor(state);
  return r;
}

inline DiagnosticsRecord full_record(const FlowState& prev, const FlowState& cur,
                                     const FlowState& next, const FlowRunConfig& config) {
  DiagnosticsRecord r = static_record(cur, config);
  const ProbeSet& p = config.probes;
  if (p.thm_a) r.max_thm_a_residual = max_of(theorem_a_residual(prev, cur, next));
  if (p.volume_law) r.max_volume_law_residual = max_of(volume_law_residual(prev, cur, next));
  if (p.cor_a) r.max_cor_a_value = max_of(corollary_a_check(prev, cur, next, *config.omega));
  if (p.identity22) {
    r.max_identity22_residual = max_abs_of(identity22_residual(prev, cur, next, *config.omega));
  }
  return r;
}

/// Integrates to t_end (or until sqrt(det g) drops below the halt
/// threshold), recording every `record_every` steps and at the end.
inline FlowRunResult run_flow(const FlowState& initial, const FlowRunConfig& config,
                              const std::function<void(const DiagnosticsRecord&)>& on_record = {}) {
  const ProbeSet& p = config.probes;
  if ((p.cor_a || p.identity22 || p.min_omega) && !config.omega) {
    throw Error(ErrorKind::kConfigError, "Omega probes need a form");
  }
  check_cfl(initial.surface(), config.dt, config.cfl_factor);
  FlowRunResult result;
  const auto emit = [&](DiagnosticsRecord r) {
    if (on_record) on_record(r);
    result.records.push_back(r);
  };
  emit(static_record(initial, config));

  const auto steps = static_cast<long>(std::ceil(config.t_end / config.dt - 1e-9));
  const long every = std::max(1L, config.record_every);
  if (steps <= 0) return result;

  FlowState prev = initial;
  FlowState cur = step(initial, config.dt, config.cfl_factor);
  for (long k = 1; k <= steps; ++k) {
    result.steps_taken = k;
    const bool halt = min_volume_density(cur.surface()) < config.halt_volume_density;
    const bool record = halt || k % every == 0 || k == steps;
    FlowState next = step(cur, config.dt, config.cfl_factor);
    if (record) emit(full_record(prev, cur, next, config));
    if (halt) {
      result.halted_early = k < steps;
      break;
    }
    prev = std::move(cur);
    cur = std::move(next);
  }
  return result;
}

}  // namespace gaussflow
