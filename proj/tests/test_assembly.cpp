#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "rmm/assembly.hpp"
#include "rmm/mapping.hpp"
#include "rmm/postprocess.hpp"
#include "rmm/quadrature.hpp"
#include "rmm/solver.hpp"

using namespace rmm;

namespace {

const Pairing kMicro[] = {Pairing::T2T1, Pairing::T2T2, Pairing::T2NT1, Pairing::T2NT2, Pairing::Q2NQ1, Pairing::Q2NQ2};

Mesh2D mesh_for(Pairing p, int nx = 4, int ny = 2) {
  const std::optional<double> iface = nx % 2 == 0 ? std::optional<double>(1.0) : std::nullopt;
  return gen_rectangle(2.0, 1.0, nx, ny, formulation(p).kind, iface);
}

MaterialSet bimaterial(double Lc = 0.7) {
  MaterialSet m{{1, material_preset("bvp1-material1")}, {2, material_preset("bvp1-material2")}};
  for (auto& [r, p] : m) {
    p.Lc = Lc;
    p.mu_c = 50.0;  // exercise the Cosserat term
  }
  return m;
}

Eigen::MatrixXd dense(const SparseMatrix& K) { return Eigen::MatrixXd(K); }

Eigen::VectorXd random_vector(index_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (index_t i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

// Global dof vector with u = u(x) at the u-nodes and P the L2 projection of G.
Eigen::VectorXd interpolate(const DofMap& dofs, const VectorField& u, const Mat2& G) {
  const index_t n = dofs.num_dofs();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (index_t a = 0; a < dofs.num_u_nodes(); ++a) {
    const Vec2 v = u(dofs.u_node_coords()[a]);
    for (int i = 0; i < 2; ++i) {
      M(dofs.u_dof(a, i), dofs.u_dof(a, i)) = 1.0;
      rhs[dofs.u_dof(a, i)] = v[i];
    }
  }
  const Eigen::Vector4d g(G(0, 0), G(0, 1), G(1, 0), G(1, 1));
  PointOperator op;
  const Mesh2D& mesh = dofs.mesh();
  for (index_t c = 0; c < mesh.num_cells(); ++c) {
    const auto ids = dofs.cell_dofs(c);
    const QuadratureRule q = quadrature(mesh.cells()[c].kind, 6);
    for (std::size_t k = 0; k < q.size(); ++k) {
      point_operator(dofs, c, q.points[k], op);
      const Eigen::MatrixXd Bp = op.B.middleRows(zrow::P11, 4);
      const Eigen::MatrixXd Mloc = Bp.transpose() * Bp * q.weights[k] * op.detJ;
      const Eigen::VectorXd rloc = Bp.transpose() * g * q.weights[k] * op.detJ;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < dofs.p_offset()) continue;
        rhs[ids[i]] += rloc[i];
        for (std::size_t j = 0; j < ids.size(); ++j) M(ids[i], ids[j]) += Mloc(i, j);
      }
    }
  }
  return M.ldlt().solve(rhs);
}

}  // namespace

// z = B d is internally consistent: the gradient rows match central
// differences of the u rows, and the curl rows match the curl of the P rows.
TEST(Assembly, PointOperatorConsistentWithDifferences) {
  for (Pairing p : kMicro) {
    Mesh2D mesh = mesh_for(p, 3, 2);
    const DofMap dofs(mesh, formulation(p));
    const SolutionFields s(dofs, random_vector(dofs.num_dofs(), 11));
    const index_t c = 4;
    const GeometryMap g(mesh, c);
    const Vec2 xi = mesh.cells()[c].kind == CellKind::tri ? Vec2(0.21, 0.33) : Vec2(0.2, -0.35);
    const Vec2 x = g.point(xi);
    const double h = 1e-6;
    auto at = [&](const Vec2& y) { return s.eval(c, *g.inverse(y)); };
    const ZVector z = s.eval(c, xi);
    const ZVector dx = (at(x + Vec2(h, 0)) - at(x - Vec2(h, 0))) / (2 * h);
    const ZVector dy = (at(x + Vec2(0, h)) - at(x - Vec2(0, h))) / (2 * h);
    const double scale = z.cwiseAbs().maxCoeff();
    EXPECT_NEAR(z(zrow::H11), dx(zrow::U1), 1e-6 * scale) << to_string(p);
    EXPECT_NEAR(z(zrow::H12), dy(zrow::U1), 1e-6 * scale) << to_string(p);
    EXPECT_NEAR(z(zrow::H21), dx(zrow::U2), 1e-6 * scale) << to_string(p);
    EXPECT_NEAR(z(zrow::H22), dy(zrow::U2), 1e-6 * scale) << to_string(p);
    // curl of row i: d P_i2 / dx - d P_i1 / dy
    EXPECT_NEAR(z(zrow::C1), dx(zrow::P12) - dy(zrow::P11), 1e-6 * scale) << to_string(p);
    EXPECT_NEAR(z(zrow::C2), dx(zrow::P22) - dy(zrow::P21), 1e-6 * scale) << to_string(p);
  }
}

// 1/2 d^T K_e d against quadrature of the tensorially evaluated energy density.
TEST(Assembly, ElementEnergyOracle) {
  const MaterialSet mats = bimaterial();
  for (Pairing p : kMicro) {
    const Mesh2D mesh = mesh_for(p, 1, 1);
    const DofMap dofs(mesh, formulation(p));
    const EnergyMatrix D = energy_matrix(mats.at(1));
    const ElementMatrices em = element_stiffness(dofs, 0, D, formulation(p).default_quadrature_degree());
    const Eigen::VectorXd x = random_vector(dofs.num_dofs(), 3);
    const auto ids = dofs.cell_dofs(0);
    Eigen::VectorXd d(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) d[i] = x[ids[i]];
    const SolutionFields s(dofs, x);
    double w = 0.0;
    const QuadratureRule q = quadrature(mesh.cells()[0].kind, 8);
    const GeometryMap g(mesh, 0);
    for (std::size_t k = 0; k < q.size(); ++k)
      w += q.weights[k] * g.jacobian(q.points[k]).determinant() * energy_terms(s.eval(0, q.points[k]), mats.at(1)).total();
    EXPECT_NEAR(0.5 * d.dot(em.K * d), w, 1e-12 * std::abs(w)) << to_string(p);
    EXPECT_LT((em.K - em.K.transpose()).norm(), 1e-12 * em.K.norm());
  }
}

TEST(Assembly, ZeroFieldsZeroResidual) {
  const Mesh2D mesh = mesh_for(Pairing::T2NT2);
  const DofMap dofs(mesh, formulation(Pairing::T2NT2));
  const LinearSystem sys = assemble(dofs, bimaterial());
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dofs.num_dofs());
  EXPECT_EQ((sys.K * zero - sys.f).norm(), 0.0);
}

TEST(Assembly, CompatibleAffineStateOnUnitQuad) {
  const Mesh2D mesh = gen_rectangle(1.0, 1.0, 1, 1, CellKind::quad);
  const IsotropicParams m1 = material_preset("bvp1-material1");
  for (Pairing p : {Pairing::Q2NQ1, Pairing::Q2NQ2}) {
    const DofMap dofs(mesh, formulation(p));
    Mat2 G;
    G << 1, 0, 0, 0;  // u = (x, 0), P = grad u
    const Eigen::VectorXd d = interpolate(dofs, [](const Vec2& x) { return Vec2(x.x(), 0.0); }, G);
    const LinearSystem sys = assemble(dofs, MaterialSet{{1, m1}});
    const double expect = build_tensor(m1.lambda_micro, m1.mu_micro).energy(G);
    EXPECT_NEAR(0.5 * d.dot(sys.K * d), expect, 1e-10 * expect) << to_string(p);
  }
}

// Residual K d - f against central differences of the quadrature potential.
TEST(Assembly, ResidualMatchesFiniteDifferences) {
  Loads loads;
  loads.body_force = [](const Vec2& x) { return Vec2(0.3 + x.y(), -0.2 * x.x()); };
  loads.body_moment = [](const Vec2& x) {
    Mat2 m;
    m << 0.1, x.x(), -0.4, 0.2 * x.y();
    return m;
  };
  loads.tractions.push_back({"right", [](const Vec2& x) { return Vec2(1.0, x.y()); }});
  for (Pairing p : kMicro) {
    const CellKind kind = formulation(p).kind;
    const Mesh2D mesh = kind == CellKind::tri ? gen_rectangle(2.0, 1.0, 5, 5, kind, 0.8)
                                              : gen_rectangle(2.0, 1.0, 10, 5, kind, 1.0);
    ASSERT_EQ(mesh.num_cells(), 50);
    const DofMap dofs(mesh, formulation(p));
    const MaterialSet mats = bimaterial();
    const LinearSystem sys = assemble(dofs, mats, loads);
    const Eigen::VectorXd d = 1e-2 * random_vector(dofs.num_dofs(), 21);
    const Eigen::VectorXd dir = random_vector(dofs.num_dofs(), 22);
    auto pot = [&](const Eigen::VectorXd& x) {
      return total_potential(SolutionFields(dofs, x), mats, loads).potential;
    };
    const double eps = 1e-4;
    const double fd = (pot(d + eps * dir) - pot(d - eps * dir)) / (2 * eps);
    const double an = (sys.K * d - sys.f).dot(dir);
    EXPECT_LT(std::abs(fd - an) / std::abs(an), 1e-6) << to_string(p);
  }
}

TEST(Assembly, RigidModesCarryNoEnergy) {
  MaterialSet mats = bimaterial();
  for (auto& [r, p] : mats) p.mu_c = 0.0;
  for (Pairing p : kMicro) {
    const Mesh2D mesh = mesh_for(p);
    const DofMap dofs(mesh, formulation(p));
    const LinearSystem sys = assemble(dofs, mats);
    const double knorm = dense(sys.K).norm();
    const Eigen::VectorXd t = interpolate(dofs, [](const Vec2&) { return Vec2(0.3, -0.8); }, Mat2::Zero());
    EXPECT_LT((sys.K * t).norm(), 1e-11 * knorm * t.norm()) << to_string(p);
    Mat2 W;
    W << 0, -0.5, 0.5, 0;
    const Eigen::VectorXd r = interpolate(dofs, [&](const Vec2& x) { return Vec2(W * x); }, W);
    EXPECT_LT((sys.K * r).norm(), 1e-11 * knorm * r.norm()) << to_string(p);
  }
}

TEST(Assembly, ScalingAndRegionLinearity) {
  for (Pairing p : {Pairing::T2T2, Pairing::T2NT2, Pairing::Q2NQ1}) {
    const Mesh2D mesh = mesh_for(p);
    const DofMap dofs(mesh, formulation(p));
    const MaterialSet mats = bimaterial();
    const Eigen::MatrixXd K = dense(assemble(dofs, mats).K);
    MaterialSet scaled = mats;
    for (auto& [r, q] : scaled) {
      for (double* v : {&q.lambda_micro, &q.mu_micro, &q.lambda_e, &q.mu_e, &q.mu_c, &q.mu}) *v *= 3.0;
    }
    EXPECT_LT((dense(assemble(dofs, scaled).K) - 3.0 * K).norm(), 1e-12 * K.norm());

    MaterialSet doubled = mats;
    for (double* v : {&doubled[2].lambda_micro, &doubled[2].mu_micro, &doubled[2].lambda_e, &doubled[2].mu_e,
                      &doubled[2].mu_c, &doubled[2].mu})
      *v *= 2.0;
    RegionOperators only2{{1, EnergyMatrix::Zero()}, {2, energy_matrix(mats.at(2))}};
    const Eigen::MatrixXd K2 = dense(assemble(dofs, only2).K);
    EXPECT_LT((dense(assemble(dofs, doubled).K) - K - K2).norm(), 1e-12 * K.norm()) << to_string(p);
  }
}

TEST(Assembly, MatchesSumOfElementMatrices) {
  const Mesh2D mesh = mesh_for(Pairing::Q2NQ2, 2, 1);
  const DofMap dofs(mesh, formulation(Pairing::Q2NQ2));
  const MaterialSet mats = bimaterial();
  const Eigen::MatrixXd K = dense(assemble(dofs, mats).K);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(K.rows(), K.cols());
  for (index_t c = 0; c < mesh.num_cells(); ++c) {
    const ElementMatrices em = element_stiffness(dofs, c, energy_matrix(mats.at(mesh.cells()[c].region)),
                                                 formulation(Pairing::Q2NQ2).default_quadrature_degree());
    const auto ids = dofs.cell_dofs(c);
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = 0; j < ids.size(); ++j) sum(ids[i], ids[j]) += em.K(i, j);
  }
  EXPECT_LT((K - sum).norm(), 1e-13 * K.norm());

  const Mesh2D one = gen_rectangle(1.0, 1.0, 1, 1, CellKind::quad);
  const DofMap d1(one, formulation(Pairing::Q2NQ2));
  const ElementMatrices e1 = element_stiffness(d1, 0, energy_matrix(mats.at(1)), 6);
  const Eigen::MatrixXd K1 = dense(assemble(d1, MaterialSet{{1, mats.at(1)}}).K);
  const auto ids = d1.cell_dofs(0);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = 0; j < ids.size(); ++j) EXPECT_EQ(K1(ids[i], ids[j]), e1.K(i, j));
}

TEST(Assembly, ThreadedAssemblyIsBitIdentical) {
  const Mesh2D mesh = gen_rectangle(2.0, 1.0, 40, 20, CellKind::tri, 1.0);
  const DofMap dofs(mesh, formulation(Pairing::T2NT2));
  AssemblyOptions serial, threaded;
  threaded.threads = 3;
  const LinearSystem a = assemble(dofs, bimaterial(), {}, serial);
  const LinearSystem b = assemble(dofs, bimaterial(), {}, threaded);
  ASSERT_EQ(a.K.nonZeros(), b.K.nonZeros());
  for (int i = 0; i < a.K.nonZeros(); ++i) ASSERT_EQ(a.K.valuePtr()[i], b.K.valuePtr()[i]);
}

TEST(Assembly, SymmetryAndMissingMaterial) {
  const Mesh2D mesh = mesh_for(Pairing::T2NT1);
  const DofMap dofs(mesh, formulation(Pairing::T2NT1));
  const Eigen::MatrixXd K = dense(assemble(dofs, bimaterial()).K);
  EXPECT_LT((K - K.transpose()).norm(), 1e-12 * K.norm());
  EXPECT_THROW(assemble(dofs, MaterialSet{{1, material_preset("bvp1-material1")}}), ParameterError);
}

TEST(Assembly, DirichletExamples) {
  const Mesh2D rect = gen_rectangle(2.0, 1.0, 4, 2, CellKind::tri, 1.0);
  const DofMap dofs(rect, formulation(Pairing::T2NT2));
  ConstraintSet cs;
  dirichlet_u(dofs, "bottom", [](const Vec2&) { return Vec2(0, 0); }, cs);
  dirichlet_u(dofs, "left", [](const Vec2& x) { return Vec2(0.01 * x.y() * x.y(), 0.01 * x.y() * x.y()); }, cs);
  int bottom = 0;
  for (index_t a = 0; a < dofs.num_u_nodes(); ++a) {
    const Vec2 x = dofs.u_node_coords()[a];
    if (x.y() == 0.0) {
      ++bottom;
      for (int i = 0; i < 2; ++i) {
        ASSERT_TRUE(cs.constrained(dofs.u_dof(a, i)));
        EXPECT_EQ(cs.entries().at(dofs.u_dof(a, i)).value, 0.0);
      }
    }
    if (x.x() == 0.0 && x.y() == 1.0)
      for (int i = 0; i < 2; ++i) EXPECT_NEAR(cs.entries().at(dofs.u_dof(a, i)).value, 0.01, 1e-15);
  }
  EXPECT_EQ(bottom, 9);  // 4 cells along the bottom, quadratic nodes

  const Mesh2D ring = gen_annulus(25, 2, std::nullopt, 2, 8, CellKind::quad);
  const DofMap rd(ring, formulation(Pairing::Q2NQ1));
  ConstraintSet rc;
  const double w = 0.01 / 25.0;
  dirichlet_u(rd, "outer", [w](const Vec2& x) { return Vec2(-w * x.y(), w * x.x()); }, rc);
  // (25, 0) is an outer chord midpoint, i.e. a quadratic u-node.
  bool found = false;
  for (index_t a = 0; a < rd.num_u_nodes(); ++a) {
    const Vec2 x = rd.u_node_coords()[a];
    if ((x - Vec2(25.0 * std::cos(M_PI / 8), 0.0)).norm() < 1e-12) {
      found = true;
      EXPECT_NEAR(rc.entries().at(rd.u_dof(a, 0)).value, 0.0, 1e-15);
      EXPECT_NEAR(rc.entries().at(rd.u_dof(a, 1)).value, w * x.x(), 1e-15);
    }
  }
  EXPECT_TRUE(found);
  for (index_t a = 0; a < rd.num_u_nodes(); ++a) {
    const Vec2 x = rd.u_node_coords()[a];
    if (std::abs(x.norm() - 25.0) < 1e-9) EXPECT_NEAR(rc.entries().at(rd.u_dof(a, 1)).value, w * x.x(), 1e-15);
  }
  EXPECT_THROW(dirichlet_u(rd, "nowhere", [](const Vec2&) { return Vec2(0, 0); }, rc), ParameterError);
}

TEST(Assembly, CouplingZeroData) {
  const Mesh2D ring = gen_annulus(25, 2, std::nullopt, 2, 8, CellKind::tri);
  const DofMap dofs(ring, formulation(Pairing::T2NT2));
  ConstraintSet cs;
  const CouplingData data{"inner", [](const Vec2&) { return Mat2(Mat2::Zero()); }};
  consistent_coupling(dofs, std::span(&data, 1), cs);
  EXPECT_EQ(cs.size(), 8u * 2 * 2);  // edges x moments x rows
  for (const auto& [dof, c] : cs.entries()) EXPECT_EQ(c.value, 0.0);
}

TEST(Assembly, CouplingEdgeValues) {
  // Affine data on a first-order edge: the dof equals G_row . tau exactly.
  Mat2 G;
  G << 0.3, -1.1, 0.7, 2.0;
  const Mesh2D mesh = gen_rectangle(2.0, 1.0, 4, 2, CellKind::tri, 1.0);
  const DofMap dofs(mesh, formulation(Pairing::T2NT1));
  const CouplingData lin{"bottom", [G](const Vec2&) { return G; }};
  ConstraintSet cs;
  consistent_coupling(dofs, std::span(&lin, 1), cs);
  for (index_t e : mesh.edges_with_tag("bottom")) {
    const Vec2 tau = mesh.edges()[e].tangent;
    for (int row = 0; row < 2; ++row)
      EXPECT_NEAR(cs.entries().at(dofs.function_dof(dofs.edge_function(e, 0), row)).value,
                  G.row(row).dot(tau), 1e-14);
  }
  // Left edge of the bimaterial problem: average of 0.02 y over the edge.
  const CouplingData left{"left", [](const Vec2& x) {
                            Mat2 g;
                            g << 0, 0.02 * x.y(), 0, 0.02 * x.y();
                            return g;
                          }};
  ConstraintSet cl;
  consistent_coupling(dofs, std::span(&left, 1), cl);
  const index_t low = mesh.edges_with_tag("left").front();
  const auto& rec = mesh.edges()[low];
  const double y0 = mesh.nodes()[rec.nodes[0]].y(), y1 = mesh.nodes()[rec.nodes[1]].y();
  ASSERT_NEAR(y0, 0.0, 1e-15);
  ASSERT_NEAR(y1, 0.5, 1e-15);
  for (int row = 0; row < 2; ++row)
    EXPECT_NEAR(cl.entries().at(dofs.function_dof(dofs.edge_function(low, 0), row)).value, 0.005, 1e-14);
  EXPECT_NEAR(edge_functional(dofs, low, 0, 1, left.grad_ubar), 0.005, 1e-14);
}

TEST(Assembly, CouplingReproducesTangentialTrace) {
  // Constants lie in every space; after coupling, P . tau = G . tau on the edge.
  Mat2 G;
  G << 0.3, -1.1, 0.7, 2.0;
  for (Pairing p : kMicro) {
    const Mesh2D mesh = mesh_for(p);
    const DofMap dofs(mesh, formulation(p));
    std::vector<CouplingData> data;
    for (const char* tag : {"bottom", "top", "left", "right"}) data.push_back({tag, [G](const Vec2&) { return G; }});
    ConstraintSet cs;
    consistent_coupling(dofs, data, cs);
    Eigen::VectorXd x = random_vector(dofs.num_dofs(), 9);
    for (const auto& [dof, c] : cs.entries()) {
      double v = c.value;
      for (const auto& [j, a] : c.terms) v += a * x[j];
      x[dof] = v;
    }
    const SolutionFields s(dofs, x);
    for (index_t e : mesh.edges_with_tag("top")) {
      const auto& rec = mesh.edges()[e];
      const index_t c = rec.adj[0].cell;
      const GeometryMap g(mesh, c);
      for (double t : {0.2, 0.5, 0.9}) {
        const Vec2 pt = (1 - t) * mesh.nodes()[rec.nodes[0]] + t * mesh.nodes()[rec.nodes[1]];
        const Mat2 P = s.P(c, *g.inverse(pt));
        EXPECT_LT((P * rec.tangent - G * rec.tangent).norm(), 1e-12) << to_string(p);
      }
    }
  }
}

TEST(Assembly, CouplingErrors) {
  const Mesh2D mesh = gen_rectangle(1.0, 1.0, 2, 2, CellKind::tri);
  const DofMap dofs(mesh, formulation(Pairing::T2T1));
  Mat2 a = Mat2::Identity(), b = 2.0 * Mat2::Identity();
  std::vector<CouplingData> conflicting{{"left", [a](const Vec2&) { return a; }}, {"left", [b](const Vec2&) { return b; }}};
  ConstraintSet cs;
  EXPECT_THROW(consistent_coupling(dofs, conflicting, cs), ConstraintError);

  // Two triangles touching at a vertex: four boundary tangents meet there.
  std::vector<Vec2> nodes{{0, 0}, {1, 0}, {0.5, 1}, {-1, -0.2}, {-0.3, -1}};
  std::vector<Cell> cells(2);
  cells[0].v = {0, 1, 2, -1};
  cells[1].v = {0, 3, 4, -1};
  std::vector<BoundaryTag> tags{{0, 1, "all"}, {1, 2, "all"}, {2, 0, "all"}, {0, 3, "all"}, {3, 4, "all"}, {4, 0, "all"}};
  const Mesh2D bow(nodes, cells, tags);
  const DofMap bd(bow, formulation(Pairing::T2T1));
  const CouplingData all{"all", [](const Vec2&) { return Mat2(Mat2::Zero()); }};
  ConstraintSet bc;
  EXPECT_THROW(consistent_coupling(bd, std::span(&all, 1), bc), ConstraintError);
}

TEST(Assembly, NodalCornerIsFullyDetermined) {
  const Mesh2D mesh = gen_rectangle(1.0, 1.0, 2, 2, CellKind::quad);
  ASSERT_THROW(DofMap(mesh, formulation(Pairing::T2T1)), ParameterError);
  const Mesh2D tri = gen_rectangle(1.0, 1.0, 2, 2, CellKind::tri);
  const DofMap dofs(tri, formulation(Pairing::T2T1));
  Mat2 G;
  G << 1, 2, 3, 4;
  std::vector<CouplingData> data{{"left", [G](const Vec2&) { return G; }}, {"bottom", [G](const Vec2&) { return G; }}};
  ConstraintSet cs;
  consistent_coupling(dofs, data, cs);
  // Vertex 0 sits at (0, 0); its four entries are fixed to G.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const auto& c = cs.entries().at(dofs.p_node_dof(0, i, j));
      EXPECT_TRUE(c.terms.empty());
      EXPECT_NEAR(c.value, G(i, j), 1e-14);
    }
}

TEST(Constraints, IdentityAndFullReduction) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Random(6, 6);
  A = A * A.transpose() + 6 * Eigen::MatrixXd::Identity(6, 6);
  const SparseMatrix K = A.sparseView();
  const Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(6, 1, 6);
  const ReducedSystem id = eliminate_constraints(K, f, {});
  EXPECT_LT((Eigen::MatrixXd(id.K) - A).norm(), 1e-14);
  EXPECT_LT((id.f - f).norm(), 1e-14);

  ConstraintSet all;
  for (int i = 0; i < 6; ++i) all.fix(i, 0.5 * i);
  const ReducedSystem none = eliminate_constraints(K, f, all);
  EXPECT_EQ(none.K.rows(), 0);
  const Eigen::VectorXd x = none.recover(Eigen::VectorXd(0));
  for (int i = 0; i < 6; ++i) EXPECT_EQ(x[i], 0.5 * i);
}

TEST(Constraints, MatchesLagrangeMultiplierOracle) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  Eigen::MatrixXd A(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) A(i, j) = g(rng);
  A = A * A.transpose() + 10 * Eigen::MatrixXd::Identity(10, 10);
  Eigen::VectorXd f(10);
  for (int i = 0; i < 10; ++i) f[i] = g(rng);

  ConstraintSet cs;
  cs.fix(2, 0.5);
  cs.fix(7, -1.0);
  cs.tie(4, {{1, 2.0}, {3, -1.0}}, 0.25);
  const ReducedSystem red = eliminate_constraints(A.sparseView(), f, cs);
  const Eigen::VectorXd x = red.recover(Eigen::MatrixXd(red.K).ldlt().solve(red.f));

  // KKT system [A C^T; C 0] [x; l] = [f; d].
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(3, 10);
  Eigen::VectorXd d(3);
  C(0, 2) = 1;
  d[0] = 0.5;
  C(1, 7) = 1;
  d[1] = -1.0;
  C(2, 4) = 1;
  C(2, 1) = -2;
  C(2, 3) = 1;
  d[2] = 0.25;
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(13, 13);
  kkt.topLeftCorner(10, 10) = A;
  kkt.topRightCorner(10, 3) = C.transpose();
  kkt.bottomLeftCorner(3, 10) = C;
  Eigen::VectorXd rhs(13);
  rhs << f, d;
  const Eigen::VectorXd oracle = kkt.fullPivLu().solve(rhs).head(10);
  EXPECT_LT((x - oracle).norm(), 1e-12 * oracle.norm());
}

TEST(Constraints, ChainsCyclesAndConflicts) {
  const SparseMatrix K = Eigen::MatrixXd::Identity(4, 4).sparseView();
  const Eigen::VectorXd f = Eigen::VectorXd::Ones(4);
  ConstraintSet chain;
  chain.tie(0, {{1, 2.0}}, 1.0);
  chain.tie(1, {{2, 1.0}}, 0.5);
  const ReducedSystem r = eliminate_constraints(K, f, chain);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(r.K.rows());
  const Eigen::VectorXd x = r.recover(y);
  EXPECT_DOUBLE_EQ(x[1], 0.5 + x[2]);
  EXPECT_DOUBLE_EQ(x[0], 1.0 + 2.0 * x[1]);

  ConstraintSet cyc;
  cyc.tie(0, {{1, 1.0}}, 0.0);
  cyc.tie(1, {{0, 1.0}}, 0.0);
  EXPECT_THROW(eliminate_constraints(K, f, cyc), ConstraintError);

  ConstraintSet fx;
  fx.fix(3, 1.0);
  EXPECT_NO_THROW(fx.fix(3, 1.0));
  try {
    fx.fix(3, 2.0);
    FAIL();
  } catch (const ConstraintError& e) {
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
  }
  EXPECT_THROW(fx.tie(3, {{0, 1.0}}, 0.0), ConstraintError);
  ConstraintSet range;
  range.fix(9, 0.0);
  EXPECT_THROW(eliminate_constraints(K, f, range), ConstraintError);
}

TEST(Assembly, CoupledSystemIsPositiveDefinite) {
  for (Pairing p : kMicro) {
    const Mesh2D mesh = mesh_for(p);
    const DofMap dofs(mesh, formulation(p));
    MaterialSet mats = bimaterial();
    for (auto& [r, q] : mats) q.mu_c = 0.0;
    const LinearSystem sys = assemble(dofs, mats);
    ConstraintSet cs;
    std::vector<CouplingData> data;
    for (const char* tag : {"bottom", "top", "left", "right"}) {
      dirichlet_u(dofs, tag, [](const Vec2&) { return Vec2(0, 0); }, cs);
      data.push_back({tag, [](const Vec2&) { return Mat2(Mat2::Zero()); }});
    }
    consistent_coupling(dofs, data, cs);
    const ReducedSystem red = eliminate_constraints(sys.K, sys.f, cs);
    EXPECT_TRUE(is_positive_definite(red.K)) << to_string(p);
    EXPECT_GT(smallest_ritz_value(red.K), 0.0) << to_string(p);
  }
}

// A first-order edge field on one triangle, re-interpolated onto its red
// refinement, keeps its values: the spaces are nested.
TEST(Assembly, EdgeInterpolationCommutesWithRefinement) {
  const std::vector<Vec2> v{{0, 0}, {2, 0.3}, {0.6, 1.7}};
  const Mesh2D coarse(v, {Cell{CellKind::tri, 1, {0, 1, 2, -1}}});
  const DofMap cd(coarse, formulation(Pairing::T2NT1));
  const SolutionFields cs(cd, random_vector(cd.num_dofs(), 31));
  const GeometryMap gc(coarse, 0);
  const TensorField field = [&](const Vec2& x) { return cs.P(0, *gc.inverse(x)); };

  const std::vector<Vec2> fv{v[0], v[1], v[2], 0.5 * (v[0] + v[1]), 0.5 * (v[1] + v[2]), 0.5 * (v[0] + v[2])};
  const std::vector<Cell> fc{Cell{CellKind::tri, 1, {0, 3, 5, -1}}, Cell{CellKind::tri, 1, {3, 1, 4, -1}},
                             Cell{CellKind::tri, 1, {5, 4, 2, -1}}, Cell{CellKind::tri, 1, {3, 4, 5, -1}}};
  const Mesh2D fine(fv, fc);
  const DofMap fd(fine, formulation(Pairing::T2NT1));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(fd.num_dofs());
  for (index_t e = 0; e < fine.num_edges(); ++e)
    for (int row = 0; row < 2; ++row) x[fd.function_dof(fd.edge_function(e, 0), row)] = edge_functional(fd, e, 0, row, field);
  const SolutionFields fs(fd, x);
  for (index_t c = 0; c < fine.num_cells(); ++c) {
    const GeometryMap g(fine, c);
    for (const Vec2& xi : quadrature(CellKind::tri, 3).points)
      EXPECT_LT((fs.P(c, xi) - field(g.point(xi))).norm(), 1e-12);
  }
}
