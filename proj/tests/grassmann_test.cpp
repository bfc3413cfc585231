#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gaussflow/grassmann.hpp"
#include "gaussflow/random.hpp"
#include "support/oracles.hpp"

namespace gf = gaussflow;
using gf::Matrix;
using gf::Vector;

namespace {

constexpr double kPi = std::numbers::pi;

gf::Plane span_of(std::initializer_list<std::initializer_list<double>> columns) {
  const auto cols = static_cast<Eigen::Index>(columns.size());
  const auto rows = static_cast<Eigen::Index>(columns.begin()->size());
  Matrix m(rows, cols);
  Eigen::Index c = 0;
  for (const auto& col : columns) {
    Eigen::Index r = 0;
    for (double v : col) m(r++, c) = v;
    ++c;
  }
  return gf::orthonormalize(m);
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

}  // namespace

TEST(Orthonormalize, KeepsOrthonormalInput) {
  const Matrix id = Matrix::Identity(5, 3);
  const gf::Plane p = gf::orthonormalize(id);
  EXPECT_LT((p.frame() - id).norm(), 1e-15);
}

TEST(Orthonormalize, MatchesHandGramSchmidt) {
  Matrix raw(3, 2);
  raw << 1, 0, 1, 1, 0, 0;
  const gf::Plane p = gf::orthonormalize(raw);
  const Matrix expected = oracle::gram_schmidt(raw);
  EXPECT_LT((p.frame() - expected).norm(), 1e-14);
  EXPECT_LT((p.frame().transpose() * p.frame() - Matrix::Identity(2, 2)).norm(), 1e-12);
  EXPECT_LT(gf::principal_angles(p, gf::coordinate_plane(2, 1)).maxCoeff(), 1e-12);
}

TEST(Orthonormalize, ComplementCompletesTheFrame) {
  gf::Rng rng(3);
  const gf::Plane p = gf::random_plane(rng, 3, 2);
  Matrix full(5, 5);
  full << p.frame(), p.complement();
  EXPECT_LT((full.transpose() * full - Matrix::Identity(5, 5)).norm(), 1e-12);
}

TEST(Orthonormalize, RejectsDependentColumns) {
  Matrix raw(3, 2);
  raw << 1, 2, 0, 0, 0, 0;
  EXPECT_EQ(kind_of([&] { gf::orthonormalize(raw); }), gf::ErrorKind::kRankDeficient);
}

TEST(Orthonormalize, RejectsFullDimensionalSpan) {
  EXPECT_EQ(kind_of([] { gf::orthonormalize(Matrix::Identity(2, 2)); }),
            gf::ErrorKind::kDimensionMismatch);
}

TEST(Plane, EqualityIsSpanEquality) {
  gf::Rng rng(5);
  const gf::Plane p = gf::random_plane(rng, 2, 3);
  const Matrix mixed = p.frame() * gf::random_orthogonal(rng, 2);
  EXPECT_TRUE(p == gf::orthonormalize(mixed));
  EXPECT_FALSE(p == gf::random_plane(rng, 2, 3));
}

TEST(GraphPlane, ZeroMapGivesBase) {
  gf::Rng rng(7);
  const gf::Plane q = gf::random_plane(rng, 2, 2);
  EXPECT_TRUE(gf::graph_plane(q, Matrix::Zero(2, 2)) == q);
}

TEST(GraphPlane, LineOverLine) {
  const gf::Plane q = gf::coordinate_plane(1, 1);
  const gf::Plane p = gf::graph_plane(q, Matrix::Constant(1, 1, 1.0));
  EXPECT_TRUE(p == span_of({{1.0, 1.0}}));
}

TEST(GraphPlane, DiagonalMapHasExpectedColumns) {
  const gf::Plane q = gf::coordinate_plane(2, 2);
  Matrix l = Matrix::Zero(2, 2);
  l.diagonal() << 2.0, 0.4;
  const gf::Plane p = gf::graph_plane(q, l);
  Matrix expected(4, 2);
  expected << 1, 0, 0, 1, 2, 0, 0, 0.4;
  EXPECT_LT((p.projector() - oracle::projector(expected)).norm(), 1e-12);
}

TEST(SingularValues, RoundTripThroughGraphPlane) {
  gf::Rng rng(11);
  const gf::Plane q = gf::random_plane(rng, 2, 2);
  const std::vector<double> lambdas{2.0, 0.4};
  const auto sv = gf::singular_values(gf::plane_with_singular_values(rng, q, lambdas), q);
  ASSERT_EQ(sv.size(), 2u);
  EXPECT_NEAR(sv[0], 2.0, 1e-10);
  EXPECT_NEAR(sv[1], 0.4, 1e-10);
}

TEST(SingularValues, IdentityGraphIsZero) {
  gf::Rng rng(12);
  const gf::Plane q = gf::random_plane(rng, 3, 2);
  for (double v : gf::singular_values(q, q)) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(SingularValues, PaddedWhenNExceedsM) {
  gf::Rng rng(13);
  const gf::Plane q = gf::coordinate_plane(3, 1);
  const std::vector<double> lambdas{0.7};
  const auto sv = gf::singular_values(gf::plane_with_singular_values(rng, q, lambdas), q);
  ASSERT_EQ(sv.size(), 3u);
  EXPECT_NEAR(sv[0], 0.7, 1e-12);
  EXPECT_EQ(sv[1], 0.0);
  EXPECT_EQ(sv[2], 0.0);
}

TEST(SingularValues, VerticalPlaneIsNotAGraph) {
  const gf::Plane q = gf::coordinate_plane(1, 1);
  const gf::Plane vertical = span_of({{0.0, 1.0}});
  EXPECT_EQ(kind_of([&] { gf::singular_values(vertical, q); }), gf::ErrorKind::kNotAGraph);
  EXPECT_FALSE(gf::is_graph_over(vertical, q));
}

TEST(SingularValues, DiagonalRoundTripProperty) {
  gf::Rng rng(17);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 3, m = 1 + (trial / 3) % 3;
    const int r = std::min(n, m);
    Matrix l = Matrix::Zero(n, m);
    std::vector<double> expected;
    for (int k = 0; k < r; ++k) {
      l(k, k) = u(rng);
      expected.push_back(l(k, k));
    }
    std::sort(expected.rbegin(), expected.rend());
    const gf::Plane q = gf::random_plane(rng, n, m);
    const auto sv = gf::singular_values(gf::graph_plane(q, l), q);
    for (int k = 0; k < r; ++k) EXPECT_NEAR(sv[static_cast<std::size_t>(k)], expected[static_cast<std::size_t>(k)], 1e-10);
  }
}

TEST(Geodesic, ZeroArcLengthIsStart) {
  gf::Rng rng(19);
  const gf::Plane p = gf::random_plane(rng, 2, 2);
  const gf::TangentMatrix m = gf::random_unit_tangent(rng, p);
  EXPECT_TRUE(gf::geodesic(p, m, 0.0) == p);
  EXPECT_TRUE(gf::geodesic_closed_form(m, 0.0) == p);
}

TEST(Geodesic, LineCaseFollowsTangent) {
  const gf::Plane p = gf::coordinate_plane(1, 1);
  const gf::TangentMatrix m(p, Matrix::Constant(1, 1, 1.0));
  for (double s : {0.1, 0.5, kPi / 4.0, 1.0, 1.3}) {
    const gf::GeodesicState st = gf::integrate_graph_geodesic(m.entries(), s);
    EXPECT_NEAR(st.z(0, 0), std::tan(s), 1e-10 * std::max(1.0, std::tan(s))) << s;
  }
  EXPECT_TRUE(gf::geodesic(p, m, kPi / 4.0) == span_of({{1.0, 1.0}}));
  EXPECT_NEAR(gf::closed_form_graph_coordinate(m.entries(), kPi / 4.0)(0, 0), 1.0, 1e-15);
}

TEST(Geodesic, TanSubstitutionSolvesTheOde) {
  // z = tan s: z'' = 2 sec^2 s tan s and 2 z'^2 z / (1 + z^2) agree.
  for (double s : {0.0, 0.3, 0.9, 1.4}) {
    const double z = std::tan(s), zd = 1.0 / (std::cos(s) * std::cos(s));
    const Matrix rhs = oracle::geodesic_rhs(Matrix::Constant(1, 1, z), Matrix::Constant(1, 1, zd));
    EXPECT_NEAR(rhs(0, 0), 2.0 * zd * z, 1e-9 * std::max(1.0, zd * z));
  }
}

TEST(Geodesic, MatrixClosedFormSolvesTheOde) {
  gf::Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 3, m = 1 + (trial / 3) % 3;
    const Matrix v = gf::gaussian_matrix(rng, n, m).normalized();
    const double h = 1e-4;
    for (double s : {0.3, 0.8}) {
      const auto z = [&](double t) { return gf::closed_form_graph_coordinate(v, t); };
      const Matrix zd = (z(s + h) - z(s - h)) / (2.0 * h);
      const Matrix zdd = (z(s + h) - 2.0 * z(s) + z(s - h)) / (h * h);
      EXPECT_LT((zdd - oracle::geodesic_rhs(z(s), zd)).norm(), 1e-5);
    }
  }
}

TEST(Geodesic, IntegratorResidualIsSmall) {
  gf::Rng rng(29);
  const Matrix v = gf::gaussian_matrix(rng, 2, 3).normalized();
  const double h = 1e-4;
  for (double s : {0.2, 0.6, 1.0}) {
    const auto a = gf::integrate_graph_geodesic(v, s - h);
    const auto b = gf::integrate_graph_geodesic(v, s);
    const auto c = gf::integrate_graph_geodesic(v, s + h);
    const Matrix zdd = (c.z_dot - a.z_dot) / (2.0 * h);
    EXPECT_LT((zdd - oracle::geodesic_rhs(b.z, b.z_dot)).norm(), 1e-6) << s;
  }
}

TEST(Geodesic, RankOneMovesOneDirection) {
  const gf::Plane p = gf::coordinate_plane(2, 2);
  Matrix e = Matrix::Zero(2, 2);
  e(0, 0) = 1.0;
  const gf::Plane moved = gf::geodesic_closed_form(gf::TangentMatrix(p, e), 0.7);
  const Vector fixed = p.frame().col(1);
  EXPECT_LT((moved.projector() * fixed - fixed).norm(), 1e-14);
  const Vector angles = gf::principal_angles(p, moved);
  EXPECT_NEAR(angles(0), 0.0, 1e-12);
  EXPECT_NEAR(angles(1), 0.7, 1e-12);
}

TEST(Geodesic, IntegratorMatchesClosedForm) {
  gf::Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3, m = 1 + (trial / 3) % 3;
    const gf::Plane p = gf::random_plane(rng, n, m);
    const gf::TangentMatrix dir = gf::random_unit_tangent(rng, p);
    EXPECT_LT(gf::distance(gf::geodesic(p, dir, 1.0), gf::geodesic_closed_form(dir, 1.0)), 1e-8);
  }
}

TEST(Geodesic, ArcLength) {
  gf::Rng rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 3, m = 1 + (trial / 3) % 3;
    const gf::Plane p = gf::random_plane(rng, n, m);
    const gf::TangentMatrix dir = gf::random_unit_tangent(rng, p);
    for (double s : {0.05, 0.25, 0.5}) {
      EXPECT_NEAR(gf::distance(p, gf::geodesic(p, dir, s)) / s, 1.0, 1e-6);
    }
  }
}

TEST(Geodesic, ChartExitIsReported) {
  const gf::Plane p = gf::coordinate_plane(1, 1);
  const gf::TangentMatrix m(p, Matrix::Constant(1, 1, 1.0));
  EXPECT_EQ(kind_of([&] { gf::geodesic(p, m, 2.0); }), gf::ErrorKind::kGraphChartExit);
  EXPECT_EQ(kind_of([&] { gf::geodesic_closed_form(m, kPi / 2.0); }),
            gf::ErrorKind::kGraphChartExit);
}

TEST(Geodesic, TangentMustBelongToPlane) {
  gf::Rng rng(41);
  const gf::Plane p = gf::random_plane(rng, 2, 2);
  const gf::TangentMatrix m = gf::random_unit_tangent(rng, gf::random_plane(rng, 2, 2));
  EXPECT_EQ(kind_of([&] { gf::geodesic(p, m, 0.1); }), gf::ErrorKind::kDimensionMismatch);
  EXPECT_EQ(kind_of([&] { gf::TangentMatrix(p, Matrix::Zero(3, 2)); }),
            gf::ErrorKind::kDimensionMismatch);
}

TEST(Distance, Examples) {
  gf::Rng rng(43);
  const gf::Plane p = gf::random_plane(rng, 2, 3);
  EXPECT_NEAR(gf::distance(p, p), 0.0, 1e-12);
  EXPECT_NEAR(gf::distance(gf::coordinate_plane(1, 1), span_of({{1.0, 1.0}})), kPi / 4.0, 1e-14);
  EXPECT_EQ(kind_of([&] { gf::distance(p, gf::random_plane(rng, 3, 2)); }),
            gf::ErrorKind::kDimensionMismatch);
}

TEST(Distance, SmallAnglesStayAccurate) {
  const gf::Plane p = gf::coordinate_plane(1, 1);
  const gf::Plane tilted = span_of({{1.0, 1e-9}});
  EXPECT_NEAR(gf::distance(p, tilted), 1e-9, 1e-20);
}

TEST(NVector, CoordinatePlaneIsABasisVector) {
  const Vector v = gf::plane_to_nvector(gf::coordinate_plane(2, 3));
  ASSERT_EQ(v.size(), 10);
  EXPECT_EQ(v(0), 1.0);
  EXPECT_EQ(v.tail(9).norm(), 0.0);
}

TEST(NVector, DiagonalLine) {
  const Vector v = gf::plane_to_nvector(span_of({{1.0, 1.0}}));
  EXPECT_NEAR(v(0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(v(1), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(NVector, UnitNormAndLeibnizAgreement) {
  gf::Rng rng(47);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 3, m = 1 + (trial / 3) % 3;
    const gf::Plane p = gf::random_plane(rng, n, m);
    const Vector v = gf::plane_to_nvector(p);
    ASSERT_NEAR(v.norm(), 1.0, 1e-12);
    ASSERT_LT((v - oracle::wedge(p.frame())).norm(), 1e-12);
  }
}

TEST(NVector, ColumnSwapFlipsSign) {
  gf::Rng rng(53);
  const gf::Plane p = gf::random_plane(rng, 2, 2);
  Matrix swapped = p.frame();
  swapped.col(0).swap(swapped.col(1));
  EXPECT_LT((gf::plane_to_nvector(gf::orthonormalize(swapped)) + gf::plane_to_nvector(p)).norm(),
            1e-12);
}

TEST(Combinations, CountsAndOrder) {
  const auto c = gf::combinations(4, 2);
  ASSERT_EQ(c.size(), 6u);
  EXPECT_EQ(c.front(), (std::vector<int>{0, 1}));
  EXPECT_EQ(c[3], (std::vector<int>{1, 2}));
  EXPECT_EQ(c.back(), (std::vector<int>{2, 3}));
  EXPECT_TRUE(gf::combinations(2, 3).empty());
}
