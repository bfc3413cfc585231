#pragma once

// Periodic parameter grids for immersed curves (n = 1) and surfaces (n = 2)
// in R^{n+m}, plus the named initial-surface presets.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "gaussflow/error.hpp"
#include "gaussflow/grassmann.hpp"

namespace gaussflow {

inline constexpr int kMaxAmbient = 8;
using AmbientVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxAmbient, 1>;
using AmbientFrame = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbient, 2>;
using SmallSquare = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;

/// Sampled immersion F on a periodic grid. Wrapping axis k adds the ambient
/// translation `wrap_offsets.col(k)`, so graphs over a flat torus (offset
/// 2 pi e_k) and closed tori (offset 0) share one representation.
class ImmersionGrid {
 public:
  ImmersionGrid(int n, int m, std::vector<int> resolution, Matrix positions,
                std::vector<double> periods, Matrix wrap_offsets)
      : n_(n), m_(m), resolution_(std::move(resolution)), positions_(std::move(positions)),
        periods_(std::move(periods)), wrap_offsets_(std::move(wrap_offsets)) {
    if (n_ < 1 || n_ > 2 || m_ < 1 || n_ + m_ > kMaxAmbient) {
      throw Error(ErrorKind::kDimensionMismatch, "grids support n in {1,2}, n+m <= 8");
    }
    if (static_cast<int>(resolution_.size()) != n_ || static_cast<int>(periods_.size()) != n_) {
      throw Error(ErrorKind::kDimensionMismatch, "one resolution and period per axis");
    }
    for (int r : resolution_) {
      if (r < 5) throw Error(ErrorKind::kDimensionMismatch, "each axis needs at least 5 points");
    }
    if (positions_.rows() != n_ + m_ || positions_.cols() != point_count() ||
        wrap_offsets_.rows() != n_ + m_ || wrap_offsets_.cols() != n_) {
      throw Error(ErrorKind::kDimensionMismatch, "position or offset array has the wrong shape");
    }
  }

  int n() const { return n_; }
  int m() const { return m_; }
  int ambient() const { return n_ + m_; }
  int resolution(int axis) const { return resolution_[static_cast<std::size_t>(axis)]; }
  const std::vector<int>& resolution() const { return resolution_; }
  double period(int axis) const { return periods_[static_cast<std::size_t>(axis)]; }
  const std::vector<double>& periods() const { return periods_; }
  double spacing(int axis) const { return period(axis) / resolution(axis); }
  double min_spacing() const {
    double h = spacing(0);
    for (int k = 1; k < n_; ++k) h = std::min(h, spacing(k));
    return h;
  }
  double cell_volume() const {
    double v = 1.0;
    for (int k = 0; k < n_; ++k) v *= spacing(k);
    return v;
  }
  Eigen::Index point_count() const {
    Eigen::Index count = 1;
    for (int r : resolution_) count *= r;
    return count;
  }

  const Matrix& positions() const { return positions_; }
  const Matrix& wrap_offsets() const { return wrap_offsets_; }

  Eigen::Index index(int i, int j = 0) const {
    return static_cast<Eigen::Index>(wrap(i, 0)) +
           (n_ == 2 ? static_cast<Eigen::Index>(wrap(j, 1)) * resolution(0) : 0);
  }

  /// Position at any integer multi-index, unwrapped through the offsets.
  AmbientVector point(int i, int j = 0) const {
    AmbientVector p = positions_.col(index(i, j));
    const int wi = floor_div(i, resolution(0));
    if (wi != 0) p += wi * wrap_offsets_.col(0);
    if (n_ == 2) {
      const int wj = floor_div(j, resolution(1));
      if (wj != 0) p += wj * wrap_offsets_.col(1);
    }
    return p;
  }

  ImmersionGrid with_positions(Matrix positions) const {
    return ImmersionGrid(n_, m_, resolution_, std::move(positions), periods_, wrap_offsets_);
  }

  bool same_layout(const ImmersionGrid& other) const {
    return n_ == other.n_ && m_ == other.m_ && resolution_ == other.resolution_ &&
           periods_ == other.periods_;
  }

 private:
  static int floor_div(int a, int b) { return (a >= 0) ? a / b : -((-a + b - 1) / b); }
  int wrap(int i, int axis) const {
    const int r = resolution(axis);
    const int w = i % r;
    return w < 0 ? w + r : w;
  }

  int n_;
  int m_;
  std::vector<int> resolution_;
  Matrix positions_;
  std::vector<double> periods_;
  Matrix wrap_offsets_;
};

/// Samples `f(x)` (x has one coordinate per axis) on a uniform periodic grid.
template <class Immersion>
ImmersionGrid sample_immersion(int n, int m, std::vector<int> resolution, Matrix wrap_offsets,
                               Immersion f, std::vector<double> periods = {}) {
  if (periods.empty()) periods.assign(static_cast<std::size_t>(n), 2.0 * std::numbers::pi);
  Eigen::Index count = 1;
  for (int r : resolution) count *= r;
  Matrix positions(n + m, count);
  const int n1 = resolution.at(0);
  const int n2 = n == 2 ? resolution.at(1) : 1;
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      std::array<double, 2> x{i * periods[0] / n1, n == 2 ? j * periods[1] / n2 : 0.0};
      positions.col(i + static_cast<Eigen::Index>(j) * n1) = f(x);
    }
  }
  return ImmersionGrid(n, m, std::move(resolution), std::move(positions), std::move(periods),
                       std::move(wrap_offsets));
}

struct PresetSpec {
  std::string name;
  std::map<std::string, double> params;

  double param(const std::string& key, double fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

/// Intrinsic and ambient codimension a preset produces; `plane` takes them
/// from the caller.
inline std::pair<int, int> preset_dimensions(const std::string& name, int n, int m) {
  if (name == "plane") return {n, m};
  if (name == "circle" || name == "ellipse") return {1, 1};
  if (name == "product_torus" || name == "graph_torus" || name == "lagrangian_graph") return {2, 2};
  throw Error(ErrorKind::kConfigError, "unknown preset '" + name + "'");
}

/// Presets (x, y are grid coordinates in [0, 2 pi)):
///   plane                 F = (x_1, .., x_n, 0, .., 0)
///   circle{r}             F = (r cos x, r sin x)
///   ellipse{a, b}         F = (a cos x, b sin x)
///   product_torus{r1, r2} F = (r1 cos x, r1 sin x, r2 cos y, r2 sin y)
///   graph_torus{amp, modes}
///                         F = (x, y, amp sin(k x), amp cos(k y)), k = modes
///   lagrangian_graph{amp} F = (x, u_x, y, u_y), u = amp sin x sin 2y
/// The last one is a gradient graph in C^2 = (x1, y1, x2, y2), hence
/// Lagrangian. Its two frequencies see different stencil errors, so the
/// discrete defect is small but not zero.
inline ImmersionGrid make_preset(const PresetSpec& preset, int n, int m,
                                 std::vector<int> resolution) {
  const auto [pn, pm] = preset_dimensions(preset.name, n, m);
  if (static_cast<int>(resolution.size()) < pn) {
    throw Error(ErrorKind::kConfigError, "preset '" + preset.name + "' needs " +
                                             std::to_string(pn) + " grid resolutions");
  }
  resolution.resize(static_cast<std::size_t>(pn));
  const double two_pi = 2.0 * std::numbers::pi;
  Matrix offsets = Matrix::Zero(pn + pm, pn);
  using X = std::array<double, 2>;

  if (preset.name == "plane") {
    for (int k = 0; k < pn; ++k) offsets(k, k) = two_pi;
    return sample_immersion(pn, pm, resolution, offsets, [&](const X& x) {
      Vector p = Vector::Zero(pn + pm);
      for (int k = 0; k < pn; ++k) p(k) = x[static_cast<std::size_t>(k)];
      return p;
    });
  }
  if (preset.name == "circle" || preset.name == "ellipse") {
    const double a = preset.name == "circle" ? preset.param("r", 1.0) : preset.param("a", 1.0);
    const double b = preset.name == "circle" ? a : preset.param("b", 0.5);
    if (a <= 0.0 || b <= 0.0) throw Error(ErrorKind::kConfigError, "radii must be positive");
    return sample_immersion(1, 1, resolution, offsets, [&](const X& x) {
      return Vector{{a * std::cos(x[0]), b * std::sin(x[0])}};
    });
  }
  if (preset.name == "product_torus") {
    const double r1 = preset.param("r1", 1.0), r2 = preset.param("r2", 1.0);
    if (r1 <= 0.0 || r2 <= 0.0) throw Error(ErrorKind::kConfigError, "radii must be positive");
    return sample_immersion(2, 2, resolution, offsets, [&](const X& x) {
      return Vector{{r1 * std::cos(x[0]), r1 * std::sin(x[0]), r2 * std::cos(x[1]),
                     r2 * std::sin(x[1])}};
    });
  }
  if (preset.name == "graph_torus") {
    const double amp = preset.param("amp", 0.1);
    const double k = preset.param("modes", 1.0);
    if (k != std::round(k) || k < 1.0) {
      throw Error(ErrorKind::kConfigError, "graph_torus modes must be a positive integer");
    }
    offsets(0, 0) = two_pi;
    offsets(1, 1) = two_pi;
    return sample_immersion(2, 2, resolution, offsets, [&](const X& x) {
      return Vector{{x[0], x[1], amp * std::sin(k * x[0]), amp * std::cos(k * x[1])}};
    });
  }
  // lagrangian_graph
  const double amp = preset.param("amp", 0.1);
  offsets(0, 0) = two_pi;
  offsets(2, 1) = two_pi;
  return sample_immersion(2, 2, resolution, offsets, [&](const X& x) {
    return Vector{{x[0], amp * std::cos(x[0]) * std::sin(2.0 * x[1]), x[1],
                   2.0 * amp * std::sin(x[0]) * std::cos(2.0 * x[1])}};
  });
}

}  // namespace gaussflow
