#include "rmm/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "rmm/elements.hpp"
#include "rmm/mapping.hpp"
#include "rmm/quadrature.hpp"

namespace rmm {

using namespace zrow;

void point_operator(const DofMap& dofs, index_t c, const Vec2& xi, PointOperator& out) {
  const Mesh2D& mesh = dofs.mesh();
  const Formulation& f = dofs.formulation();
  const CellKind kind = mesh.cells()[c].kind;
  const GeometryMap geo(mesh, c);
  const Mat2 J = geo.jacobian(xi);
  out.detJ = checked_det(J, c);
  out.x = geo.point(xi);
  const Mat2 Jit = J.inverse().transpose();

  const int n = dofs.cell_num_dofs(c);
  out.B.setZero(kZ, n);
  const ScalarBasis ub = lagrange_eval(kind, f.u_order, xi);
  for (int a = 0; a < ub.n; ++a) {
    const Vec2 g = Jit * ub.grad[a];
    out.B(H11, 2 * a) = g.x();
    out.B(H12, 2 * a) = g.y();
    out.B(H21, 2 * a + 1) = g.x();
    out.B(H22, 2 * a + 1) = g.y();
    out.B(U1, 2 * a) = ub.value[a];
    out.B(U2, 2 * a + 1) = ub.value[a];
  }
  const int off = 2 * ub.n;
  if (f.p_space == PSpace::nodal) {
    const ScalarBasis pb = lagrange_eval(kind, f.p_order, xi);
    for (int a = 0; a < pb.n; ++a) {
      const Vec2 g = Jit * pb.grad[a];
      for (int i = 0; i < 2; ++i) {
        const int c1 = off + 4 * a + 2 * i;  // P_i1
        const int c2 = c1 + 1;               // P_i2
        out.B(P11 + 2 * i, c1) = pb.value[a];
        out.B(P12 + 2 * i, c2) = pb.value[a];
        out.B(C1 + i, c2) = g.x();
        out.B(C1 + i, c1) = -g.y();
      }
    }
  } else if (f.p_space == PSpace::nedelec) {
    const VectorBasis vb = nedelec_eval(kind, f.p_order, xi);
    const auto scale = dofs.cell_p_scale(c);
    for (int a = 0; a < vb.n; ++a) {
      const Vec2 psi = scale[a] * (Jit * vb.value[a]);
      const double curl = scale[a] * vb.curl[a] / out.detJ;
      for (int i = 0; i < 2; ++i) {
        const int col = off + 2 * a + i;
        out.B(P11 + 2 * i, col) = psi.x();
        out.B(P12 + 2 * i, col) = psi.y();
        out.B(C1 + i, col) = curl;
      }
    }
  }
}

EnergyMatrix energy_matrix(const IsotropicParams& p) {
  using Row = Eigen::Matrix<double, 3, kZEnergy>;
  Row Te = Row::Zero(), Tm = Row::Zero();
  Te(0, H11) = 1;
  Te(0, P11) = -1;
  Te(1, H22) = 1;
  Te(1, P22) = -1;
  Te(2, H12) = Te(2, H21) = 0.5;
  Te(2, P12) = Te(2, P21) = -0.5;
  Tm(0, P11) = 1;
  Tm(1, P22) = 1;
  Tm(2, P12) = Tm(2, P21) = 0.5;
  Eigen::Matrix<double, 1, kZEnergy> Tw = Eigen::Matrix<double, 1, kZEnergy>::Zero();
  Tw(H12) = 0.5;
  Tw(H21) = -0.5;
  Tw(P12) = -0.5;
  Tw(P21) = 0.5;

  const Eigen::Matrix3d Ee = build_tensor(p.lambda_e, p.mu_e).energy_matrix();
  const Eigen::Matrix3d Em = build_tensor(p.lambda_micro, p.mu_micro).energy_matrix();
  EnergyMatrix D = Te.transpose() * Ee * Te + Tm.transpose() * Em * Tm;
  // skew(A) : 2 mu_c skew(A) = 4 mu_c w^2 with w = (A12 - A21) / 2
  D += 4.0 * p.mu_c * Tw.transpose() * Tw;
  const double m = moment_modulus(p);
  D(C1, C1) += m;
  D(C2, C2) += m;
  return D;
}

EnergyMatrix elastic_energy_matrix(const ElasticityTensor2D& c) {
  Eigen::Matrix<double, 3, kZEnergy> Th = Eigen::Matrix<double, 3, kZEnergy>::Zero();
  Th(0, H11) = 1;
  Th(1, H22) = 1;
  Th(2, H12) = Th(2, H21) = 0.5;
  return Th.transpose() * c.energy_matrix() * Th;
}

ElementMatrices element_stiffness(const DofMap& dofs, index_t c, const EnergyMatrix& D,
                                  int quadrature_degree, const Loads& loads) {
  const CellKind kind = dofs.mesh().cells()[c].kind;
  const QuadratureRule& rule = quadrature(kind, quadrature_degree);
  const int n = dofs.cell_num_dofs(c);
  ElementMatrices out{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  PointOperator op;
  const bool body = static_cast<bool>(loads.body_force) || static_cast<bool>(loads.body_moment);
  Eigen::Matrix<double, kZEnergy, Eigen::Dynamic> DB(kZEnergy, n);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    point_operator(dofs, c, rule.points[q], op);
    const double w = rule.weights[q] * op.detJ;
    const auto Be = op.B.topRows<kZEnergy>();
    DB.noalias() = D * Be;
    out.K.noalias() += w * Be.transpose() * DB;
    if (body) {
      ZVector load = ZVector::Zero();
      if (loads.body_force) load.segment<2>(U1) = loads.body_force(op.x);
      if (loads.body_moment) {
        const Mat2 M = loads.body_moment(op.x);
        load(P11) = M(0, 0);
        load(P12) = M(0, 1);
        load(P21) = M(1, 0);
        load(P22) = M(1, 1);
      }
      out.f.noalias() += w * op.B.transpose() * load;
    }
  }
  out.K = 0.5 * (out.K + out.K.transpose()).eval();
  return out;
}

RegionOperators region_operators(const MaterialSet& materials) {
  RegionOperators ops;
  for (const auto& [r, p] : materials) {
    p.validate();
    ops[r] = energy_matrix(p);
  }
  return ops;
}

RegionOperators region_operators(const std::map<int, ElasticityTensor2D>& tensors) {
  RegionOperators ops;
  for (const auto& [r, c] : tensors) ops[r] = elastic_energy_matrix(c);
  return ops;
}

namespace {

SparseMatrix build_pattern(const DofMap& dofs) {
  const index_t n = dofs.num_dofs();
  const index_t nc = dofs.mesh().num_cells();
  // dof -> cells incidence
  std::vector<index_t> count(n + 1, 0);
  for (index_t c = 0; c < nc; ++c)
    for (index_t d : dofs.cell_dofs(c)) ++count[d + 1];
  for (index_t i = 0; i < n; ++i) count[i + 1] += count[i];
  std::vector<index_t> cells(count[n]);
  {
    std::vector<index_t> pos(count.begin(), count.end() - 1);
    for (index_t c = 0; c < nc; ++c)
      for (index_t d : dofs.cell_dofs(c)) cells[pos[d]++] = c;
  }
  std::vector<int> outer(n + 1, 0);
  std::vector<int> inner;
  std::vector<index_t> scratch;
  for (index_t col = 0; col < n; ++col) {
    scratch.clear();
    for (index_t k = count[col]; k < count[col + 1]; ++k) {
      const auto cd = dofs.cell_dofs(cells[k]);
      scratch.insert(scratch.end(), cd.begin(), cd.end());
    }
    std::sort(scratch.begin(), scratch.end());
    scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    inner.insert(inner.end(), scratch.begin(), scratch.end());
    outer[col + 1] = static_cast<int>(inner.size());
  }
  std::vector<double> values(inner.size(), 0.0);
  const Eigen::Map<const SparseMatrix> view(n, n, static_cast<Eigen::Index>(inner.size()),
                                            outer.data(), inner.data(), values.data());
  return SparseMatrix(view);
}

void scatter(SparseMatrix& K, std::span<const index_t> d, const Eigen::MatrixXd& Ke) {
  const int* outer = K.outerIndexPtr();
  const int* inner = K.innerIndexPtr();
  double* val = K.valuePtr();
  for (std::size_t b = 0; b < d.size(); ++b) {
    const int* first = inner + outer[d[b]];
    const int* last = inner + outer[d[b] + 1];
    for (std::size_t a = 0; a < d.size(); ++a) {
      const int* p = std::lower_bound(first, last, d[a]);
      val[p - inner] += Ke(a, b);
    }
  }
}

void add_tractions(const DofMap& dofs, const Loads& loads, Eigen::VectorXd& f) {
  const Mesh2D& mesh = dofs.mesh();
  std::vector<double> s, w;
  gauss_legendre(6, s, w);
  for (const Traction& t : loads.tractions) {
    if (!t.value) continue;
    for (index_t e : mesh.edges_with_tag(t.tag)) {
      const EdgeAdjacency& adj = mesh.edges()[e].adj[0];
      const CellKind kind = mesh.cells()[adj.cell].kind;
      const GeometryMap geo(mesh, adj.cell);
      const auto nodes = dofs.cell_u_nodes(adj.cell);
      const double len = mesh.edges()[e].length;
      for (std::size_t q = 0; q < s.size(); ++q) {
        const Vec2 xi = reference_edge_point(kind, adj.local_edge, 0.5 * (s[q] + 1.0));
        const ScalarBasis b = lagrange_eval(kind, dofs.formulation().u_order, xi);
        const Vec2 tv = t.value(geo.point(xi));
        for (int a = 0; a < b.n; ++a)
          for (int i = 0; i < 2; ++i) f[dofs.u_dof(nodes[a], i)] += 0.5 * w[q] * len * b.value[a] * tv[i];
      }
    }
  }
}

}  // namespace

LinearSystem assemble(const DofMap& dofs, const RegionOperators& ops, const Loads& loads,
                      const AssemblyOptions& opts) {
  const Mesh2D& mesh = dofs.mesh();
  for (int r : mesh.regions())
    if (!ops.count(r)) throw ParameterError("no material for region " + std::to_string(r));
  const int degree =
      opts.quadrature_degree > 0 ? opts.quadrature_degree : dofs.formulation().default_quadrature_degree();

  LinearSystem sys;
  sys.K = build_pattern(dofs);
  sys.f = Eigen::VectorXd::Zero(dofs.num_dofs());

  const index_t nc = mesh.num_cells();
  const int threads = std::max(1, opts.threads);
  const index_t batch = 512 * threads;
  std::vector<ElementMatrices> em(batch);
  for (index_t start = 0; start < nc; start += batch) {
    const index_t stop = std::min(nc, start + batch);
    auto work = [&](int t) {
      for (index_t c = start + t; c < stop; c += threads)
        em[c - start] = element_stiffness(dofs, c, ops.at(mesh.cells()[c].region), degree, loads);
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    }
    for (index_t c = start; c < stop; ++c) {
      const auto d = dofs.cell_dofs(c);
      scatter(sys.K, d, em[c - start].K);
      for (std::size_t a = 0; a < d.size(); ++a) sys.f[d[a]] += em[c - start].f[a];
    }
  }
  add_tractions(dofs, loads, sys.f);
  return sys;
}

LinearSystem assemble(const DofMap& dofs, const MaterialSet& materials, const Loads& loads,
                      const AssemblyOptions& opts) {
  if (dofs.formulation().has_p()) return assemble(dofs, region_operators(materials), loads, opts);
  std::map<int, ElasticityTensor2D> tensors;
  for (const auto& [r, p] : materials) tensors[r] = build_tensor(p.lambda_e, p.mu_e);
  return assemble(dofs, region_operators(tensors), loads, opts);
}

void dirichlet_u(const DofMap& dofs, const std::string& tag, const VectorField& ubar,
                 ConstraintSet& out) {
  const Mesh2D& mesh = dofs.mesh();
  std::vector<index_t> nodes;
  for (index_t e : mesh.edges_with_tag(tag)) {
    nodes.push_back(mesh.edges()[e].nodes[0]);
    nodes.push_back(mesh.edges()[e].nodes[1]);
    nodes.push_back(mesh.num_nodes() + e);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  for (index_t n : nodes) {
    const Vec2 v = ubar(dofs.u_node_coords()[n]);
    out.fix(dofs.u_dof(n, 0), v.x());
    out.fix(dofs.u_dof(n, 1), v.y());
  }
}

double edge_functional(const DofMap& dofs, index_t edge, int slot, int row, const TensorField& G) {
  const Mesh2D& mesh = dofs.mesh();
  const EdgeRecord& e = mesh.edges()[edge];
  const int k = dofs.formulation().p_order;
  const Vec2 a = mesh.nodes()[e.nodes[0]], b = mesh.nodes()[e.nodes[1]];
  std::vector<double> s, w;
  gauss_legendre(6, s, w);
  double acc = 0.0;
  for (std::size_t q = 0; q < s.size(); ++q) {
    const double sigma = 0.5 * (s[q] + 1.0);
    const Vec2 x = (1.0 - sigma) * a + sigma * b;
    const double r = k == 1 ? 1.0 : (slot == 0 ? 1.0 - sigma : sigma);
    const Vec2 grow = G(x).row(row).transpose();
    acc += 0.5 * w[q] * e.length * grow.dot(e.tangent) * r;
  }
  return acc / beta_normalization(k, e.length);
}

void consistent_coupling(const DofMap& dofs, std::span<const CouplingData> data, ConstraintSet& out) {
  const Mesh2D& mesh = dofs.mesh();
  const Formulation& f = dofs.formulation();
  if (f.p_space == PSpace::none) return;

  if (f.p_space == PSpace::nedelec) {
    for (const CouplingData& cd : data)
      for (index_t e : mesh.edges_with_tag(cd.tag))
        for (int slot = 0; slot < f.p_order; ++slot)
          for (int row = 0; row < 2; ++row)
            out.fix(dofs.function_dof(dofs.edge_function(e, slot), row),
                    edge_functional(dofs, e, slot, row, cd.grad_ubar));
    return;
  }

  struct Condition {
    Vec2 tau;
    Vec2 b;  // (G row 0 . tau, G row 1 . tau)
  };
  std::map<index_t, std::vector<Condition>> at_node;
  for (const CouplingData& cd : data) {
    for (index_t e : mesh.edges_with_tag(cd.tag)) {
      const EdgeRecord& er = mesh.edges()[e];
      std::vector<index_t> pn{er.nodes[0], er.nodes[1]};
      if (f.p_order == 2) pn.push_back(mesh.num_nodes() + e);
      for (index_t n : pn) {
        const Mat2 G = cd.grad_ubar(dofs.u_node_coords()[n]);
        at_node[n].push_back({er.tangent, G * er.tangent});
      }
    }
  }
  for (const auto& [node, conds] : at_node) {
    std::vector<Condition> distinct;
    for (const Condition& c : conds) {
      bool dup = false;
      for (const Condition& d : distinct) {
        const double cross = c.tau.x() * d.tau.y() - c.tau.y() * d.tau.x();
        if (std::abs(cross) > 1e-10) continue;
        dup = true;
        const double sgn = c.tau.dot(d.tau) > 0 ? 1.0 : -1.0;
        if ((c.b - sgn * d.b).norm() > 1e-10 * (1.0 + d.b.norm()))
          throw ConstraintError("conflicting consistent-coupling data at node " + std::to_string(node));
      }
      if (!dup) distinct.push_back(c);
    }
    if (distinct.size() > 2)
      throw ConstraintError("node " + std::to_string(node) + " has more than two boundary tangents");
    for (int i = 0; i < 2; ++i) {
      const index_t d1 = dofs.p_node_dof(node, i, 0), d2 = dofs.p_node_dof(node, i, 1);
      if (distinct.size() == 2) {
        Mat2 A;
        A << distinct[0].tau.transpose(), distinct[1].tau.transpose();
        const Vec2 p = A.inverse() * Vec2(distinct[0].b[i], distinct[1].b[i]);
        out.fix(d1, p.x());
        out.fix(d2, p.y());
      } else {
        const Vec2 t = distinct[0].tau;
        const double b = distinct[0].b[i];
        if (std::abs(t.x()) >= std::abs(t.y())) out.tie(d1, {{d2, -t.y() / t.x()}}, b / t.x());
        else out.tie(d2, {{d1, -t.x() / t.y()}}, b / t.y());
      }
    }
  }
}

}  // namespace rmm
