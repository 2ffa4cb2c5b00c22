#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rmm/assembly.hpp"

namespace rmm {

/// A solved (or arbitrary) global dof vector together with its discretization.
class SolutionFields {
 public:
  SolutionFields(const DofMap& dofs, Eigen::VectorXd x);

  const DofMap& dofs() const { return *dofs_; }
  const Mesh2D& mesh() const { return dofs_->mesh(); }
  const Eigen::VectorXd& x() const { return x_; }

  /// Kinematic vector z (see zrow) at reference point xi of cell c.
  ZVector eval(index_t c, const Vec2& xi) const;
  Vec2 u(index_t c, const Vec2& xi) const;
  Mat2 grad_u(index_t c, const Vec2& xi) const;
  Mat2 P(index_t c, const Vec2& xi) const;
  /// Row curls (curl P^1, curl P^2).
  Vec2 curl_P(index_t c, const Vec2& xi) const;

  Eigen::VectorXd local_dofs(index_t c) const;

 private:
  const DofMap* dofs_;
  Eigen::VectorXd x_;
};

inline Mat2 z_grad_u(const ZVector& z) {
  Mat2 m;
  m << z(zrow::H11), z(zrow::H12), z(zrow::H21), z(zrow::H22);
  return m;
}
inline Mat2 z_P(const ZVector& z) {
  Mat2 m;
  m << z(zrow::P11), z(zrow::P12), z(zrow::P21), z(zrow::P22);
  return m;
}

struct EnergySplit {
  double elastic = 0.0;    // 1/2 sym(grad u - P) : C_e : sym(grad u - P)
  double micro = 0.0;      // 1/2 sym P : C_micro : sym P
  double cosserat = 0.0;   // 1/2 skew(grad u - P) : C_c : skew(grad u - P)
  double curvature = 0.0;  // 1/2 mu Lc^2 Curl P : L : Curl P
  double total() const { return elastic + micro + cosserat + curvature; }
};

/// Energy density terms evaluated tensorially (independent of the matrix form).
/// With has_p == false, `elastic` holds 1/2 sym grad u : C_e : sym grad u.
EnergySplit energy_terms(const ZVector& z, const IsotropicParams& p, bool has_p = true);

struct StressState {
  Mat2 sigma = Mat2::Zero();
  Mat2 sigma_micro = Mat2::Zero();
  Vec2 m = Vec2::Zero();  // (m13, m23)
  double W = 0.0;
};

StressState stress_state(const ZVector& z, const IsotropicParams& p, bool has_p = true);
/// Stresses at reference point xi of cell c using the material of the cell's region.
StressState stresses_at(const SolutionFields& s, index_t c, const Vec2& xi, const MaterialSet& m);

struct PotentialReport {
  double potential = 0.0;  // int W dV - load work
  EnergySplit energy;      // integrated terms
  double load_work = 0.0;
};

/// Quadrature evaluation of the total potential.
PotentialReport total_potential(const SolutionFields& s, const MaterialSet& m, const Loads& loads = {},
                                int quadrature_degree = 0);

/// Bounding-box prefiltered brute-force point location.
class PointLocator {
 public:
  explicit PointLocator(const Mesh2D& mesh);
  struct Hit {
    index_t cell;
    Vec2 xi;
  };
  /// Every cell containing x (within tol in reference coordinates), ascending cell id.
  std::vector<Hit> locate_all(const Vec2& x, double tol = 1e-10) const;
  /// Lowest-id containing cell; throws GeometryError if x lies outside the mesh.
  Hit locate(const Vec2& x) const;

 private:
  const Mesh2D* mesh_;
  std::vector<Eigen::Vector4d> boxes_;
};

enum class Frame { cartesian, polar };

struct Table {
  std::vector<std::string> meta;  // written as '# ' lines
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;
};

/// Quantity names. Cartesian: u1 u2 P11 P12 P21 P22 H11 H12 H21 H22 curlP1 curlP2
/// sigma11 sigma12 sigma21 sigma22 sigma_micro11 ... m13 m23 W.
/// Polar: u_r u_t P_rr P_rt P_tr P_tt sigma_rr sigma_rt sigma_tr sigma_tt
/// sigma_micro_rr ... m_rz m_tz W.
std::vector<std::string> quantity_names(Frame frame);

/// Samples quantities at the points. Each point yields one row per side: at
/// points on interior element boundaries crossed by the polyline both one-sided
/// values are reported (side -1 before the crossing, +1 after), otherwise side 0.
/// Columns: s (arc length), x, y, side, cell, quantities.
Table sample_line(const SolutionFields& s, const std::vector<Vec2>& points,
                  const std::vector<std::string>& quantities, Frame frame, const MaterialSet& m);

/// n + 1 equally spaced points from a to b plus every crossing with mesh edges,
/// sorted along the segment.
std::vector<Vec2> line_points(const Mesh2D& mesh, const Vec2& a, const Vec2& b, int n);
/// Points a + t (b - a) for the given parameters plus every edge crossing.
std::vector<Vec2> line_points(const Mesh2D& mesh, const Vec2& a, const Vec2& b,
                              std::vector<double> params);

/// Legacy ASCII VTK unstructured grid. Vertices are duplicated per cell so that
/// point data stays element-wise (no averaging across cells).
void export_vtk(const SolutionFields& s, const MaterialSet& m, std::ostream& os);
void export_vtk(const SolutionFields& s, const MaterialSet& m, const std::string& path);
void export_csv(const Table& t, std::ostream& os);
void export_csv(const Table& t, const std::string& path);

}  // namespace rmm
