#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "rmm/mapping.hpp"
#include "rmm/postprocess.hpp"
#include "rmm/quadrature.hpp"
#include "rmm/studies.hpp"

using namespace rmm;

namespace {

MaterialSet table1() {
  return {{1, material_preset("bvp1-material1")}, {2, material_preset("bvp1-material2")}};
}

ZVector make_z(const Mat2& H, const Mat2& P, const Vec2& curl = Vec2::Zero()) {
  ZVector z = ZVector::Zero();
  z << H(0, 0), H(0, 1), H(1, 0), H(1, 1), P(0, 0), P(0, 1), P(1, 0), P(1, 1), curl.x(), curl.y(), 0, 0;
  return z;
}

Eigen::VectorXd random_vector(index_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (index_t i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

}  // namespace

TEST(Postprocess, ZeroStateIsStressFree) {
  const StressState s = stress_state(ZVector::Zero(), material_preset("bvp1-material1"));
  EXPECT_EQ(s.sigma.norm(), 0.0);
  EXPECT_EQ(s.sigma_micro.norm(), 0.0);
  EXPECT_EQ(s.m.norm(), 0.0);
  EXPECT_EQ(s.W, 0.0);
}

TEST(Postprocess, CompatibleStateIdentity) {
  const IsotropicParams p = material_preset("bvp1-material2");
  Mat2 H;
  H << 0.013, -0.004, 0.021, -0.008;
  const StressState s = stress_state(make_z(H, H), p);
  EXPECT_LT(s.sigma.norm(), 1e-10);
  const ElasticityTensor2D cm = build_tensor(p.lambda_micro, p.mu_micro);
  EXPECT_LT((s.sigma_micro - cm.apply(sym(H))).norm(), 1e-10);
  EXPECT_NEAR(s.W, cm.energy(sym(H)), 1e-10);
}

TEST(Postprocess, ShearStressExample) {
  const IsotropicParams p = material_preset("bvp1-material1");
  Mat2 D;
  D << 0, 1e-2, 1e-2, 0;  // grad u - P, pure shear
  const StressState s = stress_state(make_z(D, Mat2::Zero()), p);
  EXPECT_NEAR(s.sigma(0, 1), 14.5834, 1e-10);
  EXPECT_NEAR(s.sigma(1, 0), 14.5834, 1e-10);
}

TEST(Postprocess, MomentStressAndMatrixForm) {
  IsotropicParams p = material_preset("bvp1-material1");
  p.Lc = 0.5;
  p.mu_c = 40.0;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (int k = 0; k < 20; ++k) {
    ZVector z;
    for (int i = 0; i < kZ; ++i) z[i] = g(rng);
    const StressState s = stress_state(z, p);
    EXPECT_LT((s.m - moment_modulus(p) * Vec2(z(zrow::C1), z(zrow::C2))).norm(), 1e-10);
    EXPECT_NEAR(s.W, energy_density(energy_matrix(p), z), 1e-10 * std::abs(s.W));
    EXPECT_NEAR(energy_terms(z, p).total(), s.W, 1e-10 * std::abs(s.W));
    EXPECT_GE(s.W, 0.0);
  }
}

TEST(Postprocess, PotentialMatchesAlgebraicForm) {
  StudySpec spec;
  for (Pairing p : {Pairing::T2T2, Pairing::T2NT1, Pairing::Q2NQ2}) {
    spec.pairing = p;
    spec.samples = 20;
    const RunResult r = run_bvp1(spec);
    EXPECT_NEAR(r.potential.potential, r.algebraic_potential, 1e-10 * r.potential.potential) << to_string(p);
    EXPECT_NEAR(r.potential.energy.total(), r.potential.potential, 1e-14);
  }
  const Mesh2D m = gen_rectangle(1, 1, 2, 2, CellKind::tri);
  const DofMap d(m, formulation(Pairing::T2NT2));
  const SolutionFields zero(d, Eigen::VectorXd::Zero(d.num_dofs()));
  EXPECT_EQ(total_potential(zero, MaterialSet{{1, material_preset("bvp1-material1")}}).potential, 0.0);
}

TEST(Postprocess, EnergyNonNegativeAtQuadraturePoints) {
  const Mesh2D m = gen_rectangle(2, 1, 4, 2, CellKind::quad, 1.0);
  const DofMap d(m, formulation(Pairing::Q2NQ2));
  const SolutionFields s(d, random_vector(d.num_dofs(), 12));
  for (index_t c = 0; c < m.num_cells(); ++c)
    for (const Vec2& xi : quadrature(CellKind::quad, 6).points) EXPECT_GE(stresses_at(s, c, xi, table1()).W, 0.0);
}

TEST(Postprocess, ConstantFieldSampledAnywhere) {
  const Mesh2D m = gen_annulus(5, 1, std::nullopt, 3, 9, CellKind::tri);
  const DofMap d(m, formulation(Pairing::T2NT1));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d.num_dofs());
  Mat2 G;
  G << 0.4, -0.3, 1.2, 0.05;
  for (index_t e = 0; e < m.num_edges(); ++e)
    for (int row = 0; row < 2; ++row)
      x[d.function_dof(d.edge_function(e, 0), row)] = edge_functional(d, e, 0, row, [G](const Vec2&) { return G; });
  const SolutionFields s(d, x);
  const Table t = sample_line(s, line_points(m, Vec2(1.2, 0.3), Vec2(-2.0, 3.1), 30), {"P11", "P12", "P21", "P22"},
                              Frame::cartesian, MaterialSet{{1, material_preset("bvp1-material1")}});
  ASSERT_GT(t.rows.size(), 30u);
  for (const auto& row : t.rows) {
    EXPECT_NEAR(row[t.column("P11")], G(0, 0), 1e-12);
    EXPECT_NEAR(row[t.column("P12")], G(0, 1), 1e-12);
    EXPECT_NEAR(row[t.column("P21")], G(1, 0), 1e-12);
    EXPECT_NEAR(row[t.column("P22")], G(1, 1), 1e-12);
  }
}

TEST(Postprocess, InterfaceReportsBothSides) {
  StudySpec spec;
  spec.pairing = Pairing::T2NT2;
  spec.level = 1;
  spec.samples = 40;
  const RunResult r = run_bvp1(spec);
  const Table& t = r.samples;
  int sides = 0;
  double minus = 0, plus = 0;
  for (const auto& row : t.rows) {
    if (std::abs(row[t.column("x")] - 1.0) > 1e-12) continue;
    if (row[t.column("side")] < 0) minus = row[t.column("P11")];
    if (row[t.column("side")] > 0) plus = row[t.column("P11")];
    ++sides;
  }
  EXPECT_EQ(sides, 2);
  EXPECT_GT(std::abs(plus - minus), 1e-4);
}

TEST(Postprocess, TangentialContinuityOfSampledFields) {
  // Along y = 0.3 every crossing of an interior edge is sampled from both sides;
  // the tangential components agree while the normal ones may jump.
  const Mesh2D m = gen_rectangle(2, 1, 6, 3, CellKind::tri);
  for (Pairing p : {Pairing::T2NT1, Pairing::T2NT2}) {
    const DofMap d(m, formulation(p));
    const SolutionFields s(d, random_vector(d.num_dofs(), 5));
    const MaterialSet mats{{1, material_preset("bvp1-material1")}};
    const Table t = sample_line(s, line_points(m, Vec2(0, 0.3), Vec2(2, 0.3), 7), {"P11", "P12", "P21", "P22"},
                                Frame::cartesian, mats);
    int pairs = 0;
    for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
      const auto& a = t.rows[i];
      const auto& b = t.rows[i + 1];
      if (a[t.column("side")] != -1 || b[t.column("side")] != 1) continue;
      ++pairs;
      const Vec2 x(a[1], a[2]);
      // Locate the crossed edge and its tangent.
      Vec2 tau = Vec2::Zero();
      for (const EdgeRecord& e : m.edges()) {
        const Vec2 p0 = m.nodes()[e.nodes[0]], p1 = m.nodes()[e.nodes[1]];
        const double cross = (p1 - p0).x() * (x - p0).y() - (p1 - p0).y() * (x - p0).x();
        const double t0 = (x - p0).dot(p1 - p0) / (p1 - p0).squaredNorm();
        if (std::abs(cross) < 1e-12 && t0 > -1e-12 && t0 < 1 + 1e-12) tau = e.tangent;
      }
      ASSERT_GT(tau.norm(), 0.5);
      Mat2 Pa, Pb;
      Pa << a[5], a[6], a[7], a[8];
      Pb << b[5], b[6], b[7], b[8];
      EXPECT_LT((Pa * tau - Pb * tau).norm(), 1e-10) << to_string(p);
    }
    EXPECT_GE(pairs, 10);
  }
}

TEST(Postprocess, PolarFrameOnXAxis) {
  const Mesh2D m = gen_annulus(5, 1, std::nullopt, 3, 12, CellKind::quad);
  const DofMap d(m, formulation(Pairing::Q2NQ2));
  const SolutionFields s(d, random_vector(d.num_dofs(), 6));
  const MaterialSet mats{{1, material_preset("bvp2-material1")}};
  const std::vector<Vec2> pts{{1.7, 0.0}, {3.3, 0.0}};
  const Table c = sample_line(s, pts, {"P12", "P21", "u2", "sigma12"}, Frame::cartesian, mats);
  const Table p = sample_line(s, pts, {"P_rt", "P_tr", "u_t", "sigma_rt"}, Frame::polar, mats);
  ASSERT_EQ(c.rows.size(), p.rows.size());
  for (std::size_t i = 0; i < c.rows.size(); ++i)
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(c.rows[i][5 + k], p.rows[i][5 + k], 1e-14);

  // Off-axis: the polar tensor is the rotated Cartesian one.
  const double th = 0.7;
  const Vec2 x = 2.5 * Vec2(std::cos(th), std::sin(th));
  const Table a = sample_line(s, {x}, {"P11", "P12", "P21", "P22"}, Frame::cartesian, mats);
  const Table b = sample_line(s, {x}, {"P_rr", "P_rt", "P_tr", "P_tt"}, Frame::polar, mats);
  Mat2 P, R;
  P << a.rows[0][5], a.rows[0][6], a.rows[0][7], a.rows[0][8];
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const Mat2 Q = R.transpose() * P * R;
  EXPECT_NEAR(b.rows[0][5], Q(0, 0), 1e-12);
  EXPECT_NEAR(b.rows[0][6], Q(0, 1), 1e-12);
  EXPECT_NEAR(b.rows[0][7], Q(1, 0), 1e-12);
  EXPECT_NEAR(b.rows[0][8], Q(1, 1), 1e-12);
}

TEST(Postprocess, SamplingErrors) {
  const Mesh2D m = gen_rectangle(1, 1, 2, 2, CellKind::quad);
  const DofMap d(m, formulation(Pairing::Q2NQ1));
  const SolutionFields s(d, Eigen::VectorXd::Zero(d.num_dofs()));
  const MaterialSet mats{{1, material_preset("bvp1-material1")}};
  EXPECT_THROW(sample_line(s, {Vec2(2, 2)}, {"u1"}, Frame::cartesian, mats), GeometryError);
  EXPECT_THROW(sample_line(s, {Vec2(0.5, 0.5)}, {"velocity"}, Frame::cartesian, mats), ParameterError);
  EXPECT_THROW(PointLocator(m).locate(Vec2(-1, 0)), GeometryError);
  EXPECT_EQ(PointLocator(m).locate_all(Vec2(0.5, 0.5)).size(), 4u);
}

TEST(Postprocess, CsvOutput) {
  Table empty;
  empty.columns = {"a", "b"};
  std::ostringstream os;
  export_csv(empty, os);
  EXPECT_EQ(os.str(), "a,b\n");

  Table t;
  t.meta = {"Lc 1"};
  t.columns = {"x"};
  t.rows = {{0.1}, {-2.5e-7}};
  std::ostringstream o2;
  export_csv(t, o2);
  EXPECT_EQ(o2.str(), "# Lc 1\nx\n0.1\n-2.5e-07\n");
  EXPECT_THROW(export_csv(t, "/nonexistent-dir/x.csv"), Error);
}

namespace {

// Minimal legacy-VTK reader: checks section sizes and returns the names of data arrays.
std::vector<std::string> validate_vtk(std::istream& is, int& points, int& cells) {
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "# vtk DataFile Version 3.0");
  std::getline(is, line);
  std::getline(is, line);
  EXPECT_EQ(line, "ASCII");
  std::getline(is, line);
  EXPECT_EQ(line, "DATASET UNSTRUCTURED_GRID");
  std::vector<std::string> arrays;
  std::string word;
  int npoint_data = -1, ncell_data = -1, current = 0;
  while (is >> word) {
    if (word == "POINTS") {
      std::string type;
      is >> points >> type;
      for (int i = 0; i < 3 * points; ++i) {
        double v;
        EXPECT_TRUE(static_cast<bool>(is >> v));
      }
    } else if (word == "CELLS") {
      int size;
      is >> cells >> size;
      int total = 0;
      for (int c = 0; c < cells; ++c) {
        int n;
        is >> n;
        total += n + 1;
        for (int k = 0; k < n; ++k) {
          int id;
          is >> id;
          EXPECT_LT(id, points);
        }
      }
      EXPECT_EQ(total, size);
    } else if (word == "CELL_TYPES") {
      int n;
      is >> n;
      EXPECT_EQ(n, cells);
      for (int c = 0; c < n; ++c) {
        int type;
        is >> type;
        EXPECT_TRUE(type == 5 || type == 9);
      }
    } else if (word == "POINT_DATA") {
      is >> npoint_data;
      EXPECT_EQ(npoint_data, points);
      current = npoint_data;
    } else if (word == "CELL_DATA") {
      is >> ncell_data;
      EXPECT_EQ(ncell_data, cells);
      current = ncell_data;
    } else if (word == "SCALARS" || word == "VECTORS" || word == "TENSORS") {
      std::string name, type;
      is >> name >> type;
      int width = word == "VECTORS" ? 3 : word == "TENSORS" ? 9 : 1;
      if (word == "SCALARS") {
        std::string lookup, table;
        is >> lookup;
        if (lookup != "LOOKUP_TABLE") is >> lookup;  // optional component count
        is >> table;
        EXPECT_EQ(lookup, "LOOKUP_TABLE");
      }
      arrays.push_back((current == ncell_data && ncell_data >= 0 ? "cell:" : "point:") + name);
      for (int i = 0; i < width * current; ++i) {
        double v;
        EXPECT_TRUE(static_cast<bool>(is >> v)) << name;
      }
    } else {
      ADD_FAILURE() << "unexpected token " << word;
      break;
    }
  }
  return arrays;
}

}  // namespace

TEST(Postprocess, VtkExportValidates) {
  const Mesh2D one = gen_rectangle(1, 1, 1, 1, CellKind::quad);
  const DofMap d(one, formulation(Pairing::Q2NQ1));
  const SolutionFields s(d, random_vector(d.num_dofs(), 1));
  std::stringstream ss;
  export_vtk(s, MaterialSet{{1, material_preset("bvp1-material1")}}, ss);
  int points = 0, cells = 0;
  const auto arrays = validate_vtk(ss, points, cells);
  EXPECT_EQ(points, 4);
  EXPECT_EQ(cells, 1);

  StudySpec spec;
  spec.samples = 10;
  const RunResult r = run_bvp1(spec);
  std::stringstream s2;
  export_vtk(*r.solution, r.materials, s2);
  const auto a2 = validate_vtk(s2, points, cells);
  EXPECT_EQ(cells, r.mesh->num_cells());
  EXPECT_EQ(points, 3 * cells);  // vertices duplicated per cell
  for (const char* name : {"point:u", "point:P", "point:sigma", "point:sigma_micro", "point:W", "cell:region", "cell:P_cell"})
    EXPECT_NE(std::find(a2.begin(), a2.end(), name), a2.end()) << name;
}
