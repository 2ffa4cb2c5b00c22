#include "rmm/postprocess.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>

#include "rmm/elements.hpp"
#include "rmm/mapping.hpp"
#include "rmm/quadrature.hpp"

namespace rmm {

using namespace zrow;

namespace {

std::string num(double v) {
  char buf[64];
  if (v == 0.0) v = 0.0;  // drop negative zero
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const IsotropicParams& region_params(const MaterialSet& m, int region) {
  auto it = m.find(region);
  if (it == m.end()) throw ParameterError("no material for region " + std::to_string(region));
  return it->second;
}

double iso_energy(double lambda, double mu, const Mat2& e) {
  const double tr = e.trace();
  return 0.5 * (lambda * tr * tr + 2.0 * mu * (e.array() * e.array()).sum());
}

Mat2 iso_stress(double lambda, double mu, const Mat2& e) {
  return lambda * e.trace() * Mat2::Identity() + 2.0 * mu * e;
}

Mat2 to_polar(const Mat2& T, const Vec2& x) {
  const double th = std::atan2(x.y(), x.x());
  Mat2 R;
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);  // columns e_r, e_t
  return R.transpose() * T * R;
}

Vec2 vec_to_polar(const Vec2& v, const Vec2& x) {
  const double th = std::atan2(x.y(), x.x());
  return {std::cos(th) * v.x() + std::sin(th) * v.y(), -std::sin(th) * v.x() + std::cos(th) * v.y()};
}

}  // namespace

SolutionFields::SolutionFields(const DofMap& dofs, Eigen::VectorXd x) : dofs_(&dofs), x_(std::move(x)) {
  if (x_.size() != dofs.num_dofs()) throw ContractError("SolutionFields: dof vector size mismatch");
}

Eigen::VectorXd SolutionFields::local_dofs(index_t c) const {
  const auto d = dofs_->cell_dofs(c);
  Eigen::VectorXd out(d.size());
  for (std::size_t a = 0; a < d.size(); ++a) out[a] = x_[d[a]];
  return out;
}

ZVector SolutionFields::eval(index_t c, const Vec2& xi) const {
  PointOperator op;
  point_operator(*dofs_, c, xi, op);
  return op.B * local_dofs(c);
}

Vec2 SolutionFields::u(index_t c, const Vec2& xi) const { return eval(c, xi).segment<2>(U1); }
Mat2 SolutionFields::grad_u(index_t c, const Vec2& xi) const { return z_grad_u(eval(c, xi)); }
Mat2 SolutionFields::P(index_t c, const Vec2& xi) const { return z_P(eval(c, xi)); }
Vec2 SolutionFields::curl_P(index_t c, const Vec2& xi) const { return eval(c, xi).segment<2>(C1); }

EnergySplit energy_terms(const ZVector& z, const IsotropicParams& p, bool has_p) {
  EnergySplit s;
  const Mat2 H = z_grad_u(z);
  if (!has_p) {
    s.elastic = iso_energy(p.lambda_e, p.mu_e, sym(H));
    return s;
  }
  const Mat2 P = z_P(z);
  const Mat2 A = H - P;
  s.elastic = iso_energy(p.lambda_e, p.mu_e, sym(A));
  s.micro = iso_energy(p.lambda_micro, p.mu_micro, sym(P));
  s.cosserat = p.mu_c * (skew(A).array() * skew(A).array()).sum();
  s.curvature = 0.5 * moment_modulus(p) * (z(C1) * z(C1) + z(C2) * z(C2));
  return s;
}

StressState stress_state(const ZVector& z, const IsotropicParams& p, bool has_p) {
  StressState st;
  const Mat2 H = z_grad_u(z);
  if (!has_p) {
    st.sigma = iso_stress(p.lambda_e, p.mu_e, sym(H));
    st.W = energy_terms(z, p, false).total();
    return st;
  }
  const Mat2 P = z_P(z);
  const Mat2 A = H - P;
  st.sigma = iso_stress(p.lambda_e, p.mu_e, sym(A)) + 2.0 * p.mu_c * skew(A);
  st.sigma_micro = iso_stress(p.lambda_micro, p.mu_micro, sym(P));
  st.m = moment_modulus(p) * Vec2(z(C1), z(C2));
  st.W = energy_terms(z, p, true).total();
  return st;
}

StressState stresses_at(const SolutionFields& s, index_t c, const Vec2& xi, const MaterialSet& m) {
  return stress_state(s.eval(c, xi), region_params(m, s.mesh().cells()[c].region),
                      s.dofs().formulation().has_p());
}

PotentialReport total_potential(const SolutionFields& s, const MaterialSet& m, const Loads& loads,
                                int quadrature_degree) {
  const Mesh2D& mesh = s.mesh();
  const Formulation& f = s.dofs().formulation();
  const int degree = quadrature_degree > 0 ? quadrature_degree : f.default_quadrature_degree();
  PotentialReport rep;
  PointOperator op;
  for (index_t c = 0; c < mesh.num_cells(); ++c) {
    const IsotropicParams& p = region_params(m, mesh.cells()[c].region);
    const QuadratureRule& rule = quadrature(mesh.cells()[c].kind, degree);
    const Eigen::VectorXd d = s.local_dofs(c);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      point_operator(s.dofs(), c, rule.points[q], op);
      const ZVector z = op.B * d;
      const double w = rule.weights[q] * op.detJ;
      const EnergySplit e = energy_terms(z, p, f.has_p());
      rep.energy.elastic += w * e.elastic;
      rep.energy.micro += w * e.micro;
      rep.energy.cosserat += w * e.cosserat;
      rep.energy.curvature += w * e.curvature;
      if (loads.body_force) rep.load_work += w * loads.body_force(op.x).dot(z.segment<2>(U1));
      if (loads.body_moment) rep.load_work += w * (loads.body_moment(op.x).array() * z_P(z).array()).sum();
    }
  }
  if (!loads.tractions.empty()) {
    std::vector<double> gs, gw;
    gauss_legendre(6, gs, gw);
    for (const Traction& t : loads.tractions) {
      if (!t.value) continue;
      for (index_t e : mesh.edges_with_tag(t.tag)) {
        const EdgeAdjacency& adj = mesh.edges()[e].adj[0];
        const CellKind kind = mesh.cells()[adj.cell].kind;
        const GeometryMap geo(mesh, adj.cell);
        for (std::size_t q = 0; q < gs.size(); ++q) {
          const Vec2 xi = reference_edge_point(kind, adj.local_edge, 0.5 * (gs[q] + 1.0));
          rep.load_work += 0.5 * gw[q] * mesh.edges()[e].length *
                           t.value(geo.point(xi)).dot(s.u(adj.cell, xi));
        }
      }
    }
  }
  rep.potential = rep.energy.total() - rep.load_work;
  return rep;
}

PointLocator::PointLocator(const Mesh2D& mesh) : mesh_(&mesh) {
  boxes_.reserve(mesh.num_cells());
  for (const Cell& c : mesh.cells()) {
    Eigen::Vector4d b(1e300, 1e300, -1e300, -1e300);
    for (int a = 0; a < c.num_vertices(); ++a) {
      const Vec2& p = mesh.nodes()[c.v[a]];
      b[0] = std::min(b[0], p.x());
      b[1] = std::min(b[1], p.y());
      b[2] = std::max(b[2], p.x());
      b[3] = std::max(b[3], p.y());
    }
    const double pad = 1e-9 * std::max(b[2] - b[0], b[3] - b[1]);
    boxes_.push_back(b + Eigen::Vector4d(-pad, -pad, pad, pad));
  }
}

std::vector<PointLocator::Hit> PointLocator::locate_all(const Vec2& x, double tol) const {
  std::vector<Hit> out;
  for (index_t c = 0; c < static_cast<index_t>(boxes_.size()); ++c) {
    const auto& b = boxes_[c];
    if (x.x() < b[0] || x.y() < b[1] || x.x() > b[2] || x.y() > b[3]) continue;
    const GeometryMap geo(*mesh_, c);
    const auto xi = geo.inverse(x);
    if (!xi) continue;
    const bool inside = geo.kind() == CellKind::tri
                            ? (xi->x() >= -tol && xi->y() >= -tol && xi->x() + xi->y() <= 1.0 + tol)
                            : (std::abs(xi->x()) <= 1.0 + tol && std::abs(xi->y()) <= 1.0 + tol);
    if (inside) out.push_back({c, *xi});
  }
  return out;
}

PointLocator::Hit PointLocator::locate(const Vec2& x) const {
  auto hits = locate_all(x);
  if (hits.empty())
    throw GeometryError("point (" + num(x.x()) + ", " + num(x.y()) + ") lies outside the mesh");
  return hits.front();
}

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> quantity_names(Frame frame) {
  if (frame == Frame::cartesian)
    return {"u1", "u2", "P11", "P12", "P21", "P22", "H11", "H12", "H21", "H22", "curlP1", "curlP2",
            "sigma11", "sigma12", "sigma21", "sigma22", "sigma_micro11", "sigma_micro12",
            "sigma_micro21", "sigma_micro22", "m13", "m23", "W"};
  return {"u_r", "u_t", "P_rr", "P_rt", "P_tr", "P_tt", "H_rr", "H_rt", "H_tr", "H_tt",
          "sigma_rr", "sigma_rt", "sigma_tr", "sigma_tt", "sigma_micro_rr", "sigma_micro_rt",
          "sigma_micro_tr", "sigma_micro_tt", "m_rz", "m_tz", "W"};
}

namespace {

double pick(const std::string& q, Frame frame, const Vec2& x, const ZVector& z, const StressState& st) {
  auto comp = [](const Mat2& T, char a, char b) {
    const int i = (a == '1' || a == 'r') ? 0 : 1;
    const int j = (b == '1' || b == 'r') ? 0 : 1;
    return T(i, j);
  };
  auto tensor = [&](const Mat2& T) { return frame == Frame::polar ? to_polar(T, x) : T; };
  auto vec = [&](const Vec2& v) { return frame == Frame::polar ? vec_to_polar(v, x) : v; };
  auto tail2 = [&](const std::string& prefix, const Mat2& T) -> std::optional<double> {
    const std::size_t n = prefix.size();
    if (q.size() == n + 2 && q.compare(0, n, prefix) == 0) return comp(tensor(T), q[n], q[n + 1]);
    return std::nullopt;
  };
  if (q == "W") return st.W;
  if (frame == Frame::cartesian) {
    if (q == "u1") return z(U1);
    if (q == "u2") return z(U2);
    if (q == "curlP1") return z(C1);
    if (q == "curlP2") return z(C2);
    if (q == "m13") return st.m.x();
    if (q == "m23") return st.m.y();
    if (auto v = tail2("sigma_micro", st.sigma_micro)) return *v;
    if (auto v = tail2("sigma", st.sigma)) return *v;
    if (auto v = tail2("P", z_P(z))) return *v;
    if (auto v = tail2("H", z_grad_u(z))) return *v;
  } else {
    const Vec2 u = vec(z.segment<2>(U1));
    if (q == "u_r") return u.x();
    if (q == "u_t") return u.y();
    const Vec2 m = vec(st.m);
    if (q == "m_rz") return m.x();
    if (q == "m_tz") return m.y();
    if (auto v = tail2("sigma_micro_", st.sigma_micro)) return *v;
    if (auto v = tail2("sigma_", st.sigma)) return *v;
    if (auto v = tail2("P_", z_P(z))) return *v;
    if (auto v = tail2("H_", z_grad_u(z))) return *v;
  }
  throw ParameterError("unknown sample quantity '" + q + "'");
}

}  // namespace

Table sample_line(const SolutionFields& s, const std::vector<Vec2>& points,
                  const std::vector<std::string>& quantities, Frame frame, const MaterialSet& m) {
  const Mesh2D& mesh = s.mesh();
  const bool has_p = s.dofs().formulation().has_p();
  Table t;
  t.columns = {"s", "x", "y", "side", "cell"};
  t.columns.insert(t.columns.end(), quantities.begin(), quantities.end());
  const PointLocator loc(mesh);
  const double eps = 1e-8 * mesh.max_edge_length();
  double arc = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec2& p = points[i];
    if (i > 0) arc += (p - points[i - 1]).norm();
    Vec2 d = Vec2::Zero();
    if (points.size() > 1) {
      const Vec2 a = points[i == 0 ? 0 : i - 1];
      const Vec2 b = points[i + 1 < points.size() ? i + 1 : i];
      if ((b - a).norm() > 0) d = (b - a).normalized();
    }
    auto here = loc.locate_all(p);
    if (here.empty()) throw GeometryError("sample point (" + num(p.x()) + ", " + num(p.y()) + ") lies outside the mesh");
    std::vector<std::pair<int, index_t>> sides;
    const auto minus = loc.locate_all(p - eps * d, 1e-12);
    const auto plus = loc.locate_all(p + eps * d, 1e-12);
    if (d.norm() > 0 && !minus.empty() && !plus.empty() && minus.front().cell != plus.front().cell) {
      sides = {{-1, minus.front().cell}, {1, plus.front().cell}};
    } else {
      sides = {{0, here.front().cell}};
    }
    for (const auto& [side, c] : sides) {
      const auto xi = GeometryMap(mesh, c).inverse(p);
      const ZVector z = s.eval(c, *xi);
      const StressState st = stress_state(z, region_params(m, mesh.cells()[c].region), has_p);
      std::vector<double> row{arc, p.x(), p.y(), static_cast<double>(side), static_cast<double>(c)};
      for (const std::string& q : quantities) row.push_back(pick(q, frame, p, z, st));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

std::vector<Vec2> line_points(const Mesh2D& mesh, const Vec2& a, const Vec2& b, std::vector<double> params) {
  const Vec2 d = b - a;
  for (const EdgeRecord& e : mesh.edges()) {
    const Vec2 p0 = mesh.nodes()[e.nodes[0]];
    const Vec2 q = mesh.nodes()[e.nodes[1]] - p0;
    const double den = d.x() * q.y() - d.y() * q.x();
    if (std::abs(den) < 1e-14 * d.norm() * q.norm()) continue;
    const Vec2 w = p0 - a;
    const double t = (w.x() * q.y() - w.y() * q.x()) / den;
    const double u = (w.x() * d.y() - w.y() * d.x()) / den;
    if (t >= -1e-12 && t <= 1 + 1e-12 && u >= -1e-12 && u <= 1 + 1e-12)
      params.push_back(std::clamp(t, 0.0, 1.0));
  }
  std::sort(params.begin(), params.end());
  std::vector<Vec2> out;
  double last = -1.0;
  for (double t : params) {
    if (t - last <= 1e-12) continue;
    out.push_back(a + t * d);
    last = t;
  }
  return out;
}

std::vector<Vec2> line_points(const Mesh2D& mesh, const Vec2& a, const Vec2& b, int n) {
  std::vector<double> params;
  for (int i = 0; i <= n; ++i) params.push_back(static_cast<double>(i) / n);
  return line_points(mesh, a, b, std::move(params));
}

namespace {

void write_tensor(std::ostream& os, const Mat2& T) {
  os << num(T(0, 0)) << ' ' << num(T(0, 1)) << " 0 " << num(T(1, 0)) << ' ' << num(T(1, 1))
     << " 0 0 0 0\n";
}

}  // namespace

void export_vtk(const SolutionFields& s, const MaterialSet& m, std::ostream& os) {
  const Mesh2D& mesh = s.mesh();
  const bool has_p = s.dofs().formulation().has_p();
  index_t npts = 0;
  for (const Cell& c : mesh.cells()) npts += c.num_vertices();

  struct PointValue {
    ZVector z;
    StressState st;
  };
  std::vector<PointValue> pv;
  std::vector<PointValue> cv;
  pv.reserve(npts);
  for (index_t c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cells()[c];
    const IsotropicParams& p = region_params(m, cell.region);
    const auto ref = lagrange_nodes(cell.kind, 1);
    for (int a = 0; a < cell.num_vertices(); ++a) {
      const ZVector z = s.eval(c, ref[a]);
      pv.push_back({z, stress_state(z, p, has_p)});
    }
    const Vec2 centre = cell.kind == CellKind::tri ? Vec2(1.0 / 3, 1.0 / 3) : Vec2(0, 0);
    const ZVector z = s.eval(c, centre);
    cv.push_back({z, stress_state(z, p, has_p)});
  }

  os << "# vtk DataFile Version 3.0\nrelaxed micromorphic solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << npts << " double\n";
  for (const Cell& c : mesh.cells())
    for (int a = 0; a < c.num_vertices(); ++a) {
      const Vec2& x = mesh.nodes()[c.v[a]];
      os << num(x.x()) << ' ' << num(x.y()) << " 0\n";
    }
  os << "CELLS " << mesh.num_cells() << ' ' << npts + mesh.num_cells() << '\n';
  index_t next = 0;
  for (const Cell& c : mesh.cells()) {
    os << c.num_vertices();
    for (int a = 0; a < c.num_vertices(); ++a) os << ' ' << next++;
    os << '\n';
  }
  os << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (const Cell& c : mesh.cells()) os << (c.kind == CellKind::tri ? 5 : 9) << '\n';

  os << "POINT_DATA " << npts << "\nVECTORS u double\n";
  for (const auto& v : pv) os << num(v.z(U1)) << ' ' << num(v.z(U2)) << " 0\n";
  os << "TENSORS P double\n";
  for (const auto& v : pv) write_tensor(os, z_P(v.z));
  os << "TENSORS sigma double\n";
  for (const auto& v : pv) write_tensor(os, v.st.sigma);
  os << "TENSORS sigma_micro double\n";
  for (const auto& v : pv) write_tensor(os, v.st.sigma_micro);
  os << "SCALARS W double 1\nLOOKUP_TABLE default\n";
  for (const auto& v : pv) os << num(v.st.W) << '\n';

  os << "CELL_DATA " << mesh.num_cells() << "\nSCALARS region int 1\nLOOKUP_TABLE default\n";
  for (const Cell& c : mesh.cells()) os << c.region << '\n';
  os << "TENSORS P_cell double\n";
  for (const auto& v : cv) write_tensor(os, z_P(v.z));
  os << "SCALARS W_cell double 1\nLOOKUP_TABLE default\n";
  for (const auto& v : cv) os << num(v.st.W) << '\n';
}

void export_vtk(const SolutionFields& s, const MaterialSet& m, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  export_vtk(s, m, os);
  if (!os) throw Error("write to '" + path + "' failed");
}

void export_csv(const Table& t, std::ostream& os) {
  for (const std::string& line : t.meta) os << "# " << line << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << num(row[i]);
    os << '\n';
  }
}

void export_csv(const Table& t, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  export_csv(t, os);
  if (!os) throw Error("write to '" + path + "' failed");
}

}  // namespace rmm
