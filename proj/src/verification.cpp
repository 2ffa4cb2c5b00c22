#include "rmm/verification.hpp"

#include <cmath>
#include <algorithm>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "rmm/dofmap.hpp"
#include "rmm/elements.hpp"
#include "rmm/mapping.hpp"
#include "rmm/postprocess.hpp"
#include "rmm/quadrature.hpp"

namespace rmm {

namespace {

struct EdgeFamily {
  const char* name;
  CellKind kind;
  int order;
  Pairing pairing;
};
constexpr EdgeFamily kFamilies[] = {{"NT1", CellKind::tri, 1, Pairing::T2NT1},
                                {"NT2", CellKind::tri, 2, Pairing::T2NT2},
                                {"NQ1", CellKind::quad, 1, Pairing::Q2NQ1},
                                {"NQ2", CellKind::quad, 2, Pairing::Q2NQ2}};

VectorBasis basis(CellKind kind, int order, const Vec2& xi, bool negate) {
  VectorBasis b = nedelec_eval(kind, order, xi);
  if (negate && kind == CellKind::tri && order == 1) {
    b.value[2] = -b.value[2];
    b.curl[2] = -b.curl[2];
  }
  return b;
}

std::string functional_name(CellKind kind, int order, int dof) {
  const int edge_dofs = order * (kind == CellKind::tri ? 3 : 4);
  std::ostringstream os;
  if (dof < edge_dofs) os << "edge " << dof / order + 1 << " moment " << dof % order + 1;
  else os << "inner " << dof - edge_dofs + 1;
  return os.str();
}

Vec2 interior_point(CellKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  if (kind == CellKind::quad) return {2 * u(rng) - 1, 2 * u(rng) - 1};
  const double a = u(rng), b = u(rng);
  return a + b < 1.0 ? Vec2(a, b) : Vec2(1.0 - a, 1.0 - b);
}

double curl_deviation(CellKind kind, int order, bool negate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double h = 1e-6;
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    const Vec2 xi = interior_point(kind, rng);
    const VectorBasis b = basis(kind, order, xi, negate);
    const VectorBasis px = basis(kind, order, xi + Vec2(h, 0), negate);
    const VectorBasis mx = basis(kind, order, xi - Vec2(h, 0), negate);
    const VectorBasis py = basis(kind, order, xi + Vec2(0, h), negate);
    const VectorBasis my = basis(kind, order, xi - Vec2(0, h), negate);
    for (int i = 0; i < b.n; ++i) {
      const double fd = (px.value[i].y() - mx.value[i].y() - py.value[i].x() + my.value[i].x()) / (2 * h);
      worst = std::max(worst, std::abs(fd - b.curl[i]));
    }
  }
  return worst;
}

double trace_degree_deviation(CellKind kind, int order, bool negate) {
  double worst = 0.0;
  for (int e = 0; e < num_edges(kind); ++e) {
    const Vec2 t = reference_tangent(kind, e);
    for (int i = 0; i < nedelec_count(kind, order); ++i) {
      Eigen::MatrixXd V(7, order);
      Eigen::VectorXd y(7);
      for (int q = 0; q < 7; ++q) {
        const double s = q / 6.0;
        for (int d = 0; d < order; ++d) V(q, d) = std::pow(s, d);
        y[q] = basis(kind, order, reference_edge_point(kind, e, s), negate).value[i].dot(t);
      }
      const Eigen::VectorXd c = V.colPivHouseholderQr().solve(y);
      worst = std::max(worst, (V * c - y).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

Mesh2D random_cell(CellKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(0.2, 5.0);
  const double s = scale(rng);
  const Vec2 shift(10 * u(rng), 10 * u(rng));
  for (;;) {
    std::vector<Vec2> p;
    if (kind == CellKind::tri) {
      p = {{0, 0}, {1, 0}, {0, 1}};
      for (Vec2& x : p) x += 0.3 * Vec2(u(rng), u(rng));
    } else {
      p = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
      for (Vec2& x : p) x += 0.45 * Vec2(u(rng), u(rng));
    }
    const double th = 3.14159 * u(rng);
    Mat2 R;
    R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    for (Vec2& x : p) x = shift + s * (R * x);
    std::vector<Cell> cells{{kind, 1, {0, 1, 2, kind == CellKind::quad ? 3 : -1}}};
    try {
      return Mesh2D(p, cells);
    } catch (const GeometryError&) {
      continue;  // inverted or non-convex draw
    }
  }
}

Mesh2D perturbed_mesh(CellKind kind, std::mt19937_64& rng) {
  const Mesh2D base = gen_rectangle(1, 1, 5, 4, kind);
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  std::vector<Vec2> nodes = base.nodes();
  for (Vec2& p : nodes)
    if (p.x() > 1e-12 && p.x() < 1 - 1e-12 && p.y() > 1e-12 && p.y() < 1 - 1e-12)
      p += Vec2(u(rng) / 5, u(rng) / 4);
  return Mesh2D(nodes, base.cells(), base.tag_list());
}

}  // namespace

double duality_deviation(CellKind kind, int order, bool negate, std::string* worst_name) {
  const int n = nedelec_count(kind, order);
  double worst = 0.0;
  for (int b = 0; b < n; ++b) {
    const ReferenceField v = [&](const Vec2& x) { return basis(kind, order, x, negate).value[b]; };
    for (int a = 0; a < n; ++a) {
      const double dev = std::abs(apply_dof_functional(kind, order, a, v) - (a == b ? 1.0 : 0.0));
      if (dev > worst) {
        worst = dev;
        if (worst_name) *worst_name = functional_name(kind, order, a) + " applied to basis " + std::to_string(b + 1);
      }
    }
  }
  return worst;
}

double unisolvence_deviation(CellKind kind, int order, int cells, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Pairing pairing = kind == CellKind::tri ? (order == 1 ? Pairing::T2NT1 : Pairing::T2NT2)
                                                : (order == 1 ? Pairing::Q2NQ1 : Pairing::Q2NQ2);
  std::vector<double> gs, gw;
  gauss_legendre(5, gs, gw);
  double worst = 0.0;
  for (int trial = 0; trial < cells; ++trial) {
    const Mesh2D mesh = random_cell(kind, rng);
    const DofMap dofs(mesh, formulation(pairing));
    const GeometryMap geo(mesh, 0);
    const auto scale = dofs.cell_p_scale(0);
    const int nf = dofs.cell_num_p_local(0);
    for (int e = 0; e < num_edges(kind); ++e) {
      const Vec2 tau = mesh.edges()[mesh.cell_edge(0, e)].tangent;
      for (double s : gs) {
        const Vec2 xi = reference_edge_point(kind, e, 0.5 * (s + 1.0));
        const Mat2 J = geo.jacobian(xi);
        const VectorBasis b = nedelec_eval(kind, order, xi);
        std::vector<double> sums(num_edges(kind) + 1, 0.0);  // per owning edge, last = inner
        for (int f = 0; f < nf; ++f) {
          const MappedVector psi = piola_map(J, J.determinant(), 1, scale[f], b.value[f], b.curl[f]);
          const int owner = f < order * num_edges(kind) ? f / order : num_edges(kind);
          sums[owner] += psi.value.dot(tau);
        }
        for (int o = 0; o < static_cast<int>(sums.size()); ++o)
          worst = std::max(worst, std::abs(sums[o] - (o == e ? 1.0 : 0.0)));
      }
    }
  }
  return worst;
}

double continuity_deviation(CellKind kind, int order, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Pairing pairing = kind == CellKind::tri ? (order == 1 ? Pairing::T2NT1 : Pairing::T2NT2)
                                                : (order == 1 ? Pairing::Q2NQ1 : Pairing::Q2NQ2);
  double worst = 0.0;
  std::vector<Mesh2D> meshes;
  meshes.push_back(perturbed_mesh(kind, rng));
  meshes.push_back(gen_annulus(3.0, 1.0, 2.0, 3, 7, kind));
  std::normal_distribution<double> nd;
  for (const Mesh2D& mesh : meshes) {
    const DofMap dofs(mesh, formulation(pairing));
    Eigen::VectorXd x(dofs.num_dofs());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = nd(rng);
    const SolutionFields sol(dofs, x);
    for (const EdgeRecord& e : mesh.edges()) {
      if (e.is_boundary()) continue;
      const Vec2 a = mesh.nodes()[e.nodes[0]], b = mesh.nodes()[e.nodes[1]];
      for (double s : {0.0, 0.13, 0.5, 0.77, 1.0}) {
        const Vec2 p = (1 - s) * a + s * b;
        Vec2 tp[2];
        Vec2 up[2];
        for (int k = 0; k < 2; ++k) {
          const index_t c = e.adj[k].cell;
          const auto xi = GeometryMap(mesh, c).inverse(p);
          const ZVector z = sol.eval(c, *xi);
          tp[k] = z_P(z) * e.tangent;
          up[k] = z.segment<2>(zrow::U1);
        }
        worst = std::max({worst, (tp[0] - tp[1]).cwiseAbs().maxCoeff(), (up[0] - up[1]).cwiseAbs().maxCoeff()});
      }
    }
  }
  return worst;
}

std::vector<CheckResult> verify_elements(const VerificationOptions& o) {
  std::vector<CheckResult> out;
  auto add = [&](const EdgeFamily& f, const char* check, double dev, double tol, std::string detail = {}) {
    out.push_back({f.name, check, dev, tol, dev <= tol, dev <= tol ? std::string() : std::move(detail)});
  };
  std::uint64_t seed = o.seed;
  for (const EdgeFamily& f : kFamilies) {
    std::string worst;
    const double d = duality_deviation(f.kind, f.order, o.negate_nt1_v3, &worst);
    add(f, "duality", d, o.duality_tol, worst);
    add(f, "curl", curl_deviation(f.kind, f.order, o.negate_nt1_v3, ++seed), o.curl_fd_tol);
    add(f, "trace-degree", trace_degree_deviation(f.kind, f.order, o.negate_nt1_v3), o.trace_tol);
    add(f, "unisolvence", unisolvence_deviation(f.kind, f.order, o.random_cells, ++seed), o.trace_tol);
    add(f, "continuity", continuity_deviation(f.kind, f.order, ++seed), o.trace_tol);
  }
  return out;
}

void print_verification(std::ostream& os, const std::vector<CheckResult>& results) {
  std::vector<std::string> checks;
  for (const CheckResult& r : results)
    if (std::find(checks.begin(), checks.end(), r.check) == checks.end()) checks.push_back(r.check);
  os << "element";
  for (const std::string& c : checks) os << "  " << c;
  os << '\n';
  for (const char* fam : {"NT1", "NT2", "NQ1", "NQ2"}) {
    os << fam << "    ";
    for (const std::string& c : checks)
      for (const CheckResult& r : results)
        if (r.element == fam && r.check == c) os << "  " << std::string(c.size() - 4, ' ') << (r.pass ? "pass" : "FAIL");
    os << '\n';
  }
  for (const CheckResult& r : results) {
    if (r.pass) continue;
    os << r.element << ' ' << r.check << ": deviation " << r.deviation << " > " << r.tolerance;
    if (!r.detail.empty()) os << " (" << r.detail << ")";
    os << '\n';
  }
}

}  // namespace rmm
