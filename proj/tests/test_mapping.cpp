#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rmm/elements.hpp"
#include "rmm/mapping.hpp"
#include "rmm/quadrature.hpp"

using namespace rmm;

TEST(Mapping, ScalarGradientExamples) {
  const Vec2 g(0.3, -1.2);
  EXPECT_LT((map_scalar_gradient(Mat2::Identity(), g) - g).norm(), 1e-15);
  EXPECT_LT((map_scalar_gradient(2.0 * Mat2::Identity(), g) - 0.5 * g).norm(), 1e-15);
  Mat2 R;
  R << 0, -1, 1, 0;  // rotation by 90 degrees
  EXPECT_LT((map_scalar_gradient(R, g) - R * g).norm(), 1e-15);
}

TEST(Mapping, SingularJacobianNamesCell) {
  Mat2 J;
  J << 1, 2, 2, 4;
  try {
    checked_det(J, 17);
    FAIL() << "expected GeometryError";
  } catch (const GeometryError& e) {
    EXPECT_NE(std::string(e.what()).find("17"), std::string::npos);
  }
  Mat2 flip;
  flip << 1, 0, 0, -1;
  EXPECT_THROW(checked_det(flip, 3), GeometryError);
}

TEST(Mapping, BetaNormalization) {
  EXPECT_DOUBLE_EQ(beta_normalization(1, 2.0), 2.0);
  EXPECT_DOUBLE_EQ(beta_normalization(2, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(beta_normalization(1, 1.0), 1.0);
}

TEST(Mapping, PiolaExamples) {
  const Vec2 v(0.4, -0.7);
  const MappedVector id = piola_map(Mat2::Identity(), 1.0, 1, 1.0, v, 2.5);
  EXPECT_LT((id.value - v).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(id.curl, 2.5);

  const double h = 0.25;
  const Mat2 J = h * Mat2::Identity();
  const MappedVector s = piola_map(J, h * h, -1, 3.0, v, 2.5);
  EXPECT_NEAR(s.curl, -3.0 * 2.5 / (h * h), 1e-12);
  EXPECT_LT((s.value - (-3.0 / h) * v).norm(), 1e-12);
}

// Reference square [-1,1]^2 mapped onto a physical square of side 2: the NQ1
// edge function scaled by beta = L = 2 has unit tangential trace on its edge.
TEST(Mapping, UnitTraceOnPhysicalSquare) {
  const std::vector<Vec2> verts{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  const GeometryMap g(CellKind::quad, verts);
  const auto edges = reference_edges(CellKind::quad);
  for (int e = 0; e < 4; ++e) {
    const Vec2 a = verts[edges[e].start], b = verts[edges[e].end];
    const Vec2 tau = (b - a).normalized();
    const double L = (b - a).norm();
    for (double s : {0.1, 0.5, 0.8}) {
      const Vec2 xi = reference_edge_point(CellKind::quad, e, s);
      const Mat2 J = g.jacobian(xi);
      const VectorBasis nb = nedelec_eval(CellKind::quad, 1, xi);
      for (int f = 0; f < 4; ++f) {
        const MappedVector psi = piola_map(J, J.determinant(), 1, beta_normalization(1, L), nb.value[f], nb.curl[f]);
        EXPECT_NEAR(psi.value.dot(tau), f == e ? 1.0 : 0.0, 1e-12) << "edge " << e << " basis " << f;
      }
    }
  }
}

TEST(Mapping, AffineAndBilinearMaps) {
  const std::vector<Vec2> tri{{1, 1}, {3, 1.5}, {1.5, 4}};
  const GeometryMap gt(CellKind::tri, tri);
  EXPECT_LT((gt.point(Vec2(0, 0)) - tri[0]).norm(), 1e-15);
  EXPECT_LT((gt.point(Vec2(1, 0)) - tri[1]).norm(), 1e-15);
  EXPECT_LT((gt.point(Vec2(0, 1)) - tri[2]).norm(), 1e-15);

  const std::vector<Vec2> quad{{0, 0}, {2, 0.2}, {2.3, 1.9}, {-0.1, 1.5}};
  const GeometryMap gq(CellKind::quad, quad);
  for (int a = 0; a < 4; ++a) {
    const Vec2 xi(a == 0 || a == 3 ? -1 : 1, a < 2 ? -1 : 1);
    EXPECT_LT((gq.point(xi) - quad[a]).norm(), 1e-15);
  }
  // Jacobian against central differences.
  const Vec2 xi(0.3, -0.4);
  const double h = 1e-6;
  Mat2 fd;
  fd.col(0) = (gq.point(xi + Vec2(h, 0)) - gq.point(xi - Vec2(h, 0))) / (2 * h);
  fd.col(1) = (gq.point(xi + Vec2(0, h)) - gq.point(xi - Vec2(0, h))) / (2 * h);
  EXPECT_LT((fd - gq.jacobian(xi)).norm(), 1e-8);
}

TEST(Mapping, InverseRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  const std::vector<Vec2> quad{{0, 0}, {2, 0.2}, {2.3, 1.9}, {-0.1, 1.5}};
  const GeometryMap g(CellKind::quad, quad);
  for (int i = 0; i < 100; ++i) {
    const Vec2 xi(u(rng), u(rng));
    const auto back = g.inverse(g.point(xi));
    ASSERT_TRUE(back.has_value());
    EXPECT_LT((*back - xi).norm(), 1e-12);
    EXPECT_TRUE(g.contains(g.point(xi)));
  }
  EXPECT_FALSE(g.contains(Vec2(5, 5)));
}

TEST(Mapping, MeshCellsHavePositiveDeterminant) {
  const Mesh2D m = gen_annulus(25, 2, 10, 4, 8, CellKind::quad);
  for (index_t c = 0; c < m.num_cells(); ++c) {
    const GeometryMap g(m, c);
    for (const Vec2& xi : quadrature(CellKind::quad, 6).points) EXPECT_GT(g.jacobian(xi).determinant(), 0.0);
  }
}
