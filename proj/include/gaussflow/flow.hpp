#pragma once

// Parametric mean curvature flow dF/dt = H with classical RK4 in time.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>

#include "gaussflow/geometry.hpp"
#include "gaussflow/immersion.hpp"

namespace gaussflow {

/// A surface at one time. Geometry is derived on first use and shared by
/// copies; once computed it never changes.
class FlowState {
 public:
  FlowState(double time, ImmersionGrid surface)
      : time_(time), surface_(std::move(surface)), cache_(std::make_shared<Cache>()) {}

  double time() const { return time_; }
  const ImmersionGrid& surface() const { return surface_; }

  const GeometryField& geometry() const {
    std::call_once(cache_->once, [this] {
      cache_->geometry = std::make_unique<GeometryField>(compute_geometry(surface_));
    });
    return *cache_->geometry;
  }

 private:
  struct Cache {
    std::once_flag once;
    std::unique_ptr<GeometryField> geometry;
  };

  double time_;
  ImmersionGrid surface_;
  std::shared_ptr<Cache> cache_;
};

inline constexpr double kDefaultCflFactor = 0.2;

/// Largest step the CFL guard admits: cfl_factor * h_min^2.
inline double max_stable_dt(const ImmersionGrid& grid, double cfl_factor = kDefaultCflFactor) {
  const double h = grid.min_spacing();
  return cfl_factor * h * h;
}

inline void check_cfl(const ImmersionGrid& grid, double dt, double cfl_factor) {
  if (!(dt > 0.0) || dt > max_stable_dt(grid, cfl_factor)) {
    throw Error(ErrorKind::kCflViolation,
                "dt = " + std::to_string(dt) + " outside (0, " +
                    std::to_string(max_stable_dt(grid, cfl_factor)) + "]");
  }
}

inline FlowState step(const FlowState& state, double dt, double cfl_factor = kDefaultCflFactor) {
  const ImmersionGrid& grid = state.surface();
  check_cfl(grid, dt, cfl_factor);
  const Matrix& f0 = grid.positions();
  const Matrix k1 = mean_curvature_field(grid);
  const Matrix k2 = mean_curvature_field(grid.with_positions(f0 + 0.5 * dt * k1));
  const Matrix k3 = mean_curvature_field(grid.with_positions(f0 + 0.5 * dt * k2));
  const Matrix k4 = mean_curvature_field(grid.with_positions(f0 + dt * k3));
  return FlowState(state.time() + dt,
                   grid.with_positions(f0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)));
}

inline double min_volume_density(const ImmersionGrid& grid) {
  const int n1 = grid.resolution(0);
  const int n2 = grid.n() == 2 ? grid.resolution(1) : 1;
  double out = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      out = std::min(out, std::sqrt(metric_of(immersion_jet(grid, i, j)).determinant()));
    }
  }
  return out;
}

/// Mean distance of the grid points from their centroid.
inline double mean_radius(const ImmersionGrid& grid) {
  const Vector centroid = grid.positions().rowwise().mean();
  return (grid.positions().colwise() - centroid).colwise().norm().mean();
}

}  // namespace gaussflow
