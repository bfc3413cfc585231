#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "gaussflow/diagnostics.hpp"
#include "gaussflow/random.hpp"
#include "gaussflow/selfdual.hpp"

namespace gf = gaussflow;
using gf::Matrix;
using gf::Vector;

namespace {

gf::FlowState state_of(const std::string& preset, std::map<std::string, double> params, int n,
                       int m, std::vector<int> res) {
  return gf::FlowState(0.0, gf::make_preset({preset, std::move(params)}, n, m, std::move(res)));
}

gf::FlowState advance(gf::FlowState s, double dt, int steps) {
  for (int k = 0; k < steps; ++k) s = gf::step(s, dt);
  return s;
}

gf::ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const gf::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return gf::ErrorKind::kConfigError;
}

const gf::OmegaForm kHorizontal{gf::coordinate_plane(2, 2)};

}  // namespace

TEST(Step, FlatPlaneIsStationary) {
  const gf::FlowState s = state_of("plane", {}, 2, 1, {16, 16});
  const gf::FlowState next = gf::step(s, 1e-3);
  EXPECT_LT((next.surface().positions() - s.surface().positions()).norm(), 1e-12);
  EXPECT_DOUBLE_EQ(next.time(), 1e-3);
}

TEST(Step, CflGuard) {
  const gf::FlowState s = state_of("circle", {}, 1, 1, {64});
  const double limit = gf::max_stable_dt(s.surface());
  EXPECT_NEAR(limit, 0.2 * std::pow(2.0 * std::numbers::pi / 64.0, 2), 1e-15);
  EXPECT_EQ(kind_of([&] { gf::step(s, 1.01 * limit); }), gf::ErrorKind::kCflViolation);
  EXPECT_EQ(kind_of([&] { gf::step(s, 0.0); }), gf::ErrorKind::kCflViolation);
  EXPECT_NO_THROW(gf::step(s, limit));
  EXPECT_NO_THROW(gf::step(s, 2.0 * limit, 0.4));
}

TEST(Step, CircleShrinksByTheRadiusLaw) {
  const double dt = 1e-3;
  const gf::FlowState s = advance(state_of("circle", {}, 1, 1, {64}), dt, 100);
  EXPECT_NEAR(gf::mean_radius(s.surface()), std::sqrt(1.0 - 2.0 * s.time()), 1e-5);
}

TEST(Step, ProductTorusFactorsShrinkIndependently) {
  const double dt = 1e-3;
  const gf::FlowState s =
      advance(state_of("product_torus", {{"r1", 1.0}, {"r2", 1.5}}, 2, 2, {32, 32}), dt, 50);
  const Vector p = s.surface().positions().col(7);
  EXPECT_NEAR(p.head<2>().norm(), std::sqrt(1.0 - 2.0 * s.time()), 1e-5);
  EXPECT_NEAR(p.tail<2>().norm(), std::sqrt(2.25 - 2.0 * s.time()), 1e-5);
}

TEST(Step, AreaDecreases) {
  gf::FlowState s = state_of("graph_torus", {{"amp", 0.3}}, 2, 2, {16, 16});
  double area = gf::total_area(s.surface());
  for (int k = 0; k < 20; ++k) {
    s = gf::step(s, 5e-3);
    const double next = gf::total_area(s.surface());
    EXPECT_LT(next, area + 1e-10);
    area = next;
  }
}

TEST(FlowState, GeometryIsCachedAndShared) {
  const gf::FlowState s = state_of("circle", {}, 1, 1, {16});
  const gf::FlowState copy = s;
  EXPECT_EQ(&s.geometry(), &copy.geometry());
}

TEST(HeatFlow, FlatPlaneAndRoundCircle) {
  for (const gf::FlowState& s0 :
       {state_of("plane", {}, 2, 2, {16, 16}), state_of("circle", {}, 1, 1, {64})}) {
    const double dt = 0.5 * gf::max_stable_dt(s0.surface());
    const gf::FlowState s1 = gf::step(s0, dt), s2 = gf::step(s1, dt);
    EXPECT_LE(gf::max_of(gf::theorem_a_residual(s0, s1, s2)), 1e-8);
  }
}

TEST(HeatFlow, EllipseResidualShrinksUnderRefinement) {
  const auto residual = [](int n) {
    const gf::FlowState s0 = state_of("ellipse", {}, 1, 1, {n});
    const double dt = 0.05 * std::pow(s0.surface().spacing(0), 2);
    const gf::FlowState s1 = gf::step(s0, dt), s2 = gf::step(s1, dt);
    return gf::max_of(gf::theorem_a_residual(s0, s1, s2));
  };
  const double coarse = residual(64), fine = residual(128);
  EXPECT_GT(fine, 0.0);
  EXPECT_LT(fine, coarse / 3.0);
  EXPECT_LT(fine, 2e-3);
}

TEST(HeatFlow, TensionIsTheHarmonicMapLaplacianOfTheCircle) {
  // On the circle the normal derivative of H vanishes.
  const gf::FlowState s = state_of("circle", {}, 1, 1, {32});
  for (const auto& pg : s.geometry().points()) EXPECT_LT(gf::tension_nvector(pg).norm(), 1e-12);
}

TEST(HeatFlow, RequiresMatchingStates) {
  const gf::FlowState a = state_of("circle", {}, 1, 1, {32});
  const gf::FlowState b = state_of("circle", {}, 1, 1, {64});
  const double dt = 1e-4;
  EXPECT_EQ(kind_of([&] { gf::theorem_a_residual(a, gf::step(a, dt), gf::step(b, 2 * dt)); }),
            gf::ErrorKind::kGridMismatch);
  const gf::FlowState a1 = gf::step(a, dt);
  EXPECT_EQ(kind_of([&] { gf::volume_law_residual(a, a1, gf::step(a1, 2 * dt)); }),
            gf::ErrorKind::kGridMismatch);
}

TEST(VolumeLaw, FlatAndCircle) {
  const gf::FlowState p0 = state_of("plane", {}, 1, 2, {32});
  const gf::FlowState p1 = gf::step(p0, 1e-3);
  EXPECT_LT(gf::max_of(gf::volume_law_residual(p0, p1, gf::step(p1, 1e-3))), 1e-12);
  const gf::FlowState c0 = state_of("circle", {}, 1, 1, {128});
  const double dt = 1e-4;
  const gf::FlowState c1 = gf::step(c0, dt);
  EXPECT_LT(gf::max_of(gf::volume_law_residual(c0, c1, gf::step(c1, dt))), 1e-5);
}

TEST(NegLnOmega, FlatPlaneIsZero) {
  const gf::FlowState s0 = state_of("plane", {}, 2, 2, {16, 16});
  const gf::FlowState s1 = gf::step(s0, 1e-3), s2 = gf::step(s1, 1e-3);
  EXPECT_LT(gf::max_abs_of(gf::corollary_a_check(s0, s1, s2, kHorizontal)), 1e-12);
  EXPECT_LT(gf::max_abs_of(gf::identity22_residual(s0, s1, s2, kHorizontal)), 1e-12);
}

TEST(NegLnOmega, GraphTorusIsASubsolution) {
  const gf::FlowState s0 = state_of("graph_torus", {{"amp", 0.1}}, 2, 2, {32, 32});
  const double dt = 1e-3;
  const gf::FlowState s1 = gf::step(s0, dt), s2 = gf::step(s1, dt);
  EXPECT_LT(gf::max_of(gf::corollary_a_check(s0, s1, s2, kHorizontal)), 1e-2);
  EXPECT_LT(gf::max_abs_of(gf::identity22_residual(s0, s1, s2, kHorizontal)), 1e-3);
}

TEST(NegLnOmega, GaussDifferentialOfTheTorus) {
  // Coordinate directions on the product torus: d gamma(e_k) has a single
  // unit-curvature entry per row.
  const gf::FlowState s = state_of("product_torus", {{"r1", 1.0}, {"r2", 0.5}}, 2, 2, {32, 32});
  const auto& pg = s.geometry().at(3, 5);
  EXPECT_NEAR(gf::gauss_differential(pg, 0).norm(), 1.0, 1e-3);
  EXPECT_NEAR(gf::gauss_differential(pg, 1).norm(), 2.0, 2e-3);
  EXPECT_NEAR(gf::gauss_differential(pg, 0).entries()(1, 0), 0.0, 1e-12);
}

TEST(NegLnOmega, LeavingTheChartThrows) {
  const gf::FlowState s0 = state_of("product_torus", {}, 2, 2, {16, 16});
  const gf::FlowState s1 = gf::step(s0, 1e-3), s2 = gf::step(s1, 1e-3);
  EXPECT_EQ(kind_of([&] { gf::corollary_a_check(s0, s1, s2, kHorizontal); }),
            gf::ErrorKind::kOutOfChart);
}

TEST(Lagrangian, Examples) {
  EXPECT_LT(gf::lagrangian_monitor(state_of("product_torus", {}, 2, 2, {32, 32})), 1e-12);
  EXPECT_NEAR(gf::lagrangian_monitor(state_of("plane", {}, 2, 2, {8, 8})), 1.0, 1e-15);
  EXPECT_EQ(kind_of([] { gf::lagrangian_monitor(state_of("plane", {}, 2, 1, {8, 8})); }),
            gf::ErrorKind::kDimensionMismatch);
}

TEST(Lagrangian, MatchesSelfDualDefect) {
  const gf::FlowState s = state_of("graph_torus", {{"amp", 0.4}}, 2, 2, {16, 16});
  const auto field = gf::lagrangian_defect_field(s);
  for (std::size_t k = 0; k < field.size(); ++k) {
    EXPECT_NEAR(field[k], std::sqrt(2.0) * gf::lagrangian_defect(s.geometry()[k].gauss_plane, 1),
                1e-12);
  }
}

TEST(Lagrangian, GradientGraphIsNearlyLagrangian) {
  const auto defect = [](int n) {
    return gf::lagrangian_monitor(state_of("lagrangian_graph", {{"amp", 0.3}}, 2, 2, {n, n}));
  };
  const double coarse = defect(16), fine = defect(32);
  EXPECT_GT(coarse, 1e-6);
  EXPECT_LT(fine, coarse / 8.0);
}

TEST(MinOmega, FlatPlaneStaysOne) {
  std::vector<gf::FlowState> states{state_of("plane", {}, 2, 2, {8, 8})};
  for (int k = 0; k < 3; ++k) states.push_back(gf::step(states.back(), 1e-2));
  for (double v : gf::min_omega_monitor(states, kHorizontal)) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(MinOmega, LargestDrop) {
  const std::vector<double> up{0.1, 0.2, 0.2, 0.3};
  const std::vector<double> dip{0.1, 0.3, 0.25, 0.4};
  EXPECT_EQ(gf::largest_drop(up), 0.0);
  EXPECT_NEAR(gf::largest_drop(dip), 0.05, 1e-15);
}

TEST(RunFlow, RecordsAndFinalState) {
  gf::FlowRunConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.02;
  cfg.record_every = 5;
  cfg.probes.volume_law = cfg.probes.thm_a = true;
  const auto result = gf::run_flow(state_of("circle", {}, 1, 1, {64}), cfg);
  ASSERT_EQ(result.records.size(), 5u);
  EXPECT_EQ(result.records.front().time, 0.0);
  EXPECT_EQ(result.records.front().max_volume_law_residual, 0.0);
  EXPECT_NEAR(result.records.back().time, 0.02, 1e-15);
  EXPECT_EQ(result.steps_taken, 20);
  EXPECT_FALSE(result.halted_early);
  for (const auto& r : result.records) {
    EXPECT_EQ(r.min_omega, 0.0);
    EXPECT_TRUE(std::isfinite(r.total_area));
  }
}

TEST(RunFlow, HaltsWhenTheMetricCollapses) {
  gf::FlowRunConfig cfg;
  cfg.dt = 2e-3;
  cfg.t_end = 0.45;
  cfg.halt_volume_density = 0.5;
  const auto result = gf::run_flow(state_of("circle", {}, 1, 1, {32}), cfg);
  EXPECT_TRUE(result.halted_early);
  EXPECT_NEAR(result.records.back().time, 0.375, 2e-3);
}

TEST(RunFlow, Deterministic) {
  gf::FlowRunConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.01;
  cfg.omega = kHorizontal;
  cfg.probes = {true, true, true, true, true, true};
  const gf::FlowState s = state_of("graph_torus", {{"amp", 0.1}}, 2, 2, {16, 16});
  const auto a = gf::run_flow(s, cfg), b = gf::run_flow(s, cfg);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    EXPECT_EQ(std::memcmp(&a.records[k], &b.records[k], sizeof(gf::DiagnosticsRecord)), 0);
  }
}

TEST(RunFlow, OmegaProbesNeedAForm) {
  gf::FlowRunConfig cfg;
  cfg.probes.min_omega = true;
  EXPECT_EQ(kind_of([&] { gf::run_flow(state_of("circle", {}, 1, 1, {16}), cfg); }),
            gf::ErrorKind::kConfigError);
}
