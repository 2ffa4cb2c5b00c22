#include "rmm/elements.hpp"

#include <cmath>
#include <string>

#include "rmm/quadrature.hpp"

namespace rmm {

namespace {

void check_supported(CellKind kind, int order, const char* what) {
  const bool ok = order == 1 || order == 2;
  if (!ok)
    throw ContractError(std::string(what) + ": unsupported (" + to_string(kind) + ", order " +
                        std::to_string(order) + ")");
}

double q1d(int node, double s) {
  // 1D quadratic Lagrange on [-1, 1] with nodes -1, 0, 1.
  switch (node) {
    case 0: return 0.5 * s * (s - 1.0);
    case 1: return 1.0 - s * s;
    default: return 0.5 * s * (s + 1.0);
  }
}

double dq1d(int node, double s) {
  switch (node) {
    case 0: return s - 0.5;
    case 1: return -2.0 * s;
    default: return s + 0.5;
  }
}

}  // namespace

int lagrange_count(CellKind kind, int order) {
  check_supported(kind, order, "lagrange_eval");
  if (kind == CellKind::tri) return order == 1 ? 3 : 6;
  return order == 1 ? 4 : 9;
}

std::vector<Vec2> lagrange_nodes(CellKind kind, int order) {
  check_supported(kind, order, "lagrange_nodes");
  if (kind == CellKind::tri) {
    std::vector<Vec2> p{{0, 0}, {1, 0}, {0, 1}};
    if (order == 2) p.insert(p.end(), {{0.5, 0}, {0.5, 0.5}, {0, 0.5}});
    return p;
  }
  std::vector<Vec2> p{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  if (order == 2) p.insert(p.end(), {{0, -1}, {1, 0}, {0, 1}, {-1, 0}, {0, 0}});
  return p;
}

ScalarBasis lagrange_eval(CellKind kind, int order, const Vec2& xi) {
  ScalarBasis b;
  b.n = lagrange_count(kind, order);
  const double x = xi.x(), y = xi.y();
  if (kind == CellKind::tri) {
    const double l0 = 1.0 - x - y;
    if (order == 1) {
      b.value = {l0, x, y};
      b.grad[0] = {-1, -1};
      b.grad[1] = {1, 0};
      b.grad[2] = {0, 1};
      return b;
    }
    const std::array<double, 3> l{l0, x, y};
    const std::array<Vec2, 3> dl{Vec2(-1, -1), Vec2(1, 0), Vec2(0, 1)};
    for (int a = 0; a < 3; ++a) {
      b.value[a] = l[a] * (2.0 * l[a] - 1.0);
      b.grad[a] = (4.0 * l[a] - 1.0) * dl[a];
    }
    constexpr int pairs[3][2] = {{0, 1}, {1, 2}, {2, 0}};
    for (int m = 0; m < 3; ++m) {
      const int i = pairs[m][0], j = pairs[m][1];
      b.value[3 + m] = 4.0 * l[i] * l[j];
      b.grad[3 + m] = 4.0 * (l[i] * dl[j] + l[j] * dl[i]);
    }
    return b;
  }
  if (order == 1) {
    constexpr double sx[4] = {-1, 1, 1, -1}, sy[4] = {-1, -1, 1, 1};
    for (int a = 0; a < 4; ++a) {
      b.value[a] = 0.25 * (1 + sx[a] * x) * (1 + sy[a] * y);
      b.grad[a] = {0.25 * sx[a] * (1 + sy[a] * y), 0.25 * sy[a] * (1 + sx[a] * x)};
    }
    return b;
  }
  // 1D node index (0 -> -1, 1 -> 0, 2 -> +1) per quad node.
  constexpr int ix[9] = {0, 2, 2, 0, 1, 2, 1, 0, 1};
  constexpr int iy[9] = {0, 0, 2, 2, 0, 1, 2, 1, 1};
  for (int a = 0; a < 9; ++a) {
    b.value[a] = q1d(ix[a], x) * q1d(iy[a], y);
    b.grad[a] = {dq1d(ix[a], x) * q1d(iy[a], y), q1d(ix[a], x) * dq1d(iy[a], y)};
  }
  return b;
}

int nedelec_count(CellKind kind, int order) {
  check_supported(kind, order, "nedelec_eval");
  if (kind == CellKind::tri) return order * (order + 2);
  return 2 * order * (order + 1);
}

int nedelec_inner_count(CellKind kind, int order) {
  return nedelec_count(kind, order) - order * (kind == CellKind::tri ? 3 : 4);
}

VectorBasis nedelec_eval(CellKind kind, int order, const Vec2& xi) {
  VectorBasis b;
  b.n = nedelec_count(kind, order);
  const double x = xi.x(), y = xi.y();
  auto set = [&](int i, double vx, double vy, double curl) {
    b.value[i] = {vx, vy};
    b.curl[i] = curl;
  };
  if (kind == CellKind::tri && order == 1) {
    set(0, y, -x, -2.0);
    set(1, y, 1.0 - x, -2.0);
    set(2, 1.0 - y, x, 2.0);
  } else if (kind == CellKind::tri) {
    set(0, 2 * (-y + 4 * y * x), 2 * (2 * x - 4 * x * x), 6 - 24 * x);
    set(1, 2 * (-2 * y + 4 * y * y), 2 * (x - 4 * y * x), 6 - 24 * y);
    set(2, 2 * (-2 * y + 4 * y * y), 2 * (-1 + 3 * y + x - 4 * y * x), 6 - 24 * y);
    set(3, 2 * (3 * y - 4 * y * y - 4 * y * x), 2 * (2 - 3 * y - 6 * x + 4 * y * x + 4 * x * x),
        24 * y + 24 * x - 18);
    set(4, 2 * (2 - 6 * y + 4 * y * y - 3 * x + 4 * y * x), 2 * (3 * x - 4 * y * x - 4 * x * x),
        18 - 24 * y - 24 * x);
    set(5, 2 * (-1 + y + 3 * x - 4 * y * x), 2 * (-2 * x + 4 * x * x), 24 * x - 6);
    set(6, 2 * (8 * y - 8 * y * y - 4 * y * x), 2 * (-4 * x + 8 * y * x + 4 * x * x),
        48 * y + 24 * x - 24);
    set(7, 2 * (-4 * y + 4 * y * y + 8 * y * x), 2 * (8 * x - 4 * y * x - 8 * x * x),
        24 - 24 * y - 48 * x);
  } else if (order == 1) {
    set(0, (1.0 - y) / 4, 0.0, 0.25);
    set(1, 0.0, (x + 1.0) / 4, 0.25);
    set(2, (y + 1.0) / 4, 0.0, -0.25);
    set(3, 0.0, (1.0 - x) / 4, -0.25);
  } else {
    const double y2 = y * y, x2 = x * x;
    set(0, -1.0 / 8 - y / 4 + 3 * y2 / 8 + 3 * x / 8 + 3 * y * x / 4 - 9 * y2 * x / 8, 0.0,
        9 * y * x / 4 - 3 * y / 4 - 3 * x / 4 + 1.0 / 4);
    set(1, -1.0 / 8 - y / 4 + 3 * y2 / 8 - 3 * x / 8 - 3 * y * x / 4 + 9 * y2 * x / 8, 0.0,
        -9 * y * x / 4 - 3 * y / 4 + 3 * x / 4 + 1.0 / 4);
    set(2, 0.0, -1.0 / 8 + 3 * y / 8 + x / 4 - 3 * y * x / 4 + 3 * x2 / 8 - 9 * y * x2 / 8,
        -9 * y * x / 4 - 3 * y / 4 + 3 * x / 4 + 1.0 / 4);
    set(3, 0.0, -1.0 / 8 - 3 * y / 8 + x / 4 + 3 * y * x / 4 + 3 * x2 / 8 + 9 * y * x2 / 8,
        9 * y * x / 4 + 3 * y / 4 + 3 * x / 4 + 1.0 / 4);
    set(4, -1.0 / 8 + y / 4 + 3 * y2 / 8 - 3 * x / 8 + 3 * y * x / 4 + 9 * y2 * x / 8, 0.0,
        -9 * y * x / 4 - 3 * y / 4 - 3 * x / 4 - 1.0 / 4);
    set(5, -1.0 / 8 + y / 4 + 3 * y2 / 8 + 3 * x / 8 - 3 * y * x / 4 - 9 * y2 * x / 8, 0.0,
        9 * y * x / 4 - 3 * y / 4 + 3 * x / 4 - 1.0 / 4);
    set(6, 0.0, -1.0 / 8 - 3 * y / 8 - x / 4 - 3 * y * x / 4 + 3 * x2 / 8 + 9 * y * x2 / 8,
        9 * y * x / 4 - 3 * y / 4 + 3 * x / 4 - 1.0 / 4);
    set(7, 0.0, -1.0 / 8 + 3 * y / 8 - x / 4 + 3 * y * x / 4 + 3 * x2 / 8 - 9 * y * x2 / 8,
        -9 * y * x / 4 + 3 * y / 4 + 3 * x / 4 - 1.0 / 4);
    set(8, 3.0 / 8 - 3 * y2 / 8 + 9 * x / 8 - 9 * y2 * x / 8, 0.0, 9 * y * x / 4 + 3 * y / 4);
    set(9, 3.0 / 8 - 3 * y2 / 8 - 9 * x / 8 + 9 * y2 * x / 8, 0.0, -9 * y * x / 4 + 3 * y / 4);
    set(10, 0.0, 3.0 / 8 + 9 * y / 8 - 3 * x2 / 8 - 9 * y * x2 / 8, -9 * y * x / 4 - 3 * x / 4);
    set(11, 0.0, 3.0 / 8 - 9 * y / 8 - 3 * x2 / 8 + 9 * y * x2 / 8, 9 * y * x / 4 - 3 * x / 4);
  }
  return b;
}

ReferenceElement reference_element(Family family, CellKind kind, int order) {
  ReferenceElement e{family, kind, order, {}};
  if (family == Family::lagrange) {
    const int n = lagrange_count(kind, order);
    const int nv = kind == CellKind::tri ? 3 : 4;
    for (int a = 0; a < n; ++a) {
      if (a < nv) e.dofs.push_back({DofKind::vertex, a, 0});
      else if (a < 2 * nv) e.dofs.push_back({DofKind::edge, a - nv, 0});
      else e.dofs.push_back({DofKind::inner, 0, 0});
    }
    return e;
  }
  const int ne = kind == CellKind::tri ? 3 : 4;
  for (int i = 0; i < ne; ++i)
    for (int j = 0; j < order; ++j) e.dofs.push_back({DofKind::edge, i, j});
  for (int i = 0; i < nedelec_inner_count(kind, order); ++i) e.dofs.push_back({DofKind::inner, i, 0});
  return e;
}

Vec2 reference_tangent(CellKind kind, int edge) {
  if (kind == CellKind::tri) {
    switch (edge) {
      case 0: return Vec2(1.0, -1.0) / std::sqrt(2.0);
      case 1: return {0.0, 1.0};
      default: return {1.0, 0.0};
    }
  }
  return (edge % 2 == 0) ? Vec2(1.0, 0.0) : Vec2(0.0, 1.0);
}

Vec2 reference_edge_point(CellKind kind, int edge, double s) {
  if (kind == CellKind::tri) {
    switch (edge) {
      case 0: return {s, 1.0 - s};
      case 1: return {0.0, s};
      default: return {s, 0.0};
    }
  }
  const double t = 2.0 * s - 1.0;
  switch (edge) {
    case 0: return {t, -1.0};
    case 1: return {1.0, t};
    case 2: return {t, 1.0};
    default: return {-1.0, t};
  }
}

double reference_edge_length(CellKind kind, int edge) {
  if (kind == CellKind::tri) return edge == 0 ? std::sqrt(2.0) : 1.0;
  return 2.0;
}

double edge_moment_weight(CellKind kind, int order, int edge, int moment, const Vec2& xi) {
  if (order == 1) return 1.0;
  const double x = xi.x(), y = xi.y();
  if (kind == CellKind::tri) {
    switch (edge) {
      case 0: return moment == 0 ? x : y;
      case 1: return moment == 0 ? y : 1.0 - y;
      default: return moment == 0 ? 1.0 - x : x;
    }
  }
  switch (edge) {
    case 0: return moment == 0 ? 0.5 * (1 - x) : 0.5 * (1 + x);
    case 1: return moment == 0 ? 0.5 * (1 - y) : 0.5 * (1 + y);
    case 2: return moment == 0 ? 0.5 * (1 + x) : 0.5 * (1 - x);
    default: return moment == 0 ? 0.5 * (1 + y) : 0.5 * (1 - y);
  }
}

int edge_moment_vertex(CellKind kind, int order, int edge, int moment) {
  if (kind == CellKind::tri) {
    if (order == 1) return edge == 0 ? 2 : 0;
    constexpr int v[3][2] = {{1, 2}, {2, 0}, {0, 1}};
    return v[edge][moment];
  }
  if (order == 1) return edge == 2 ? 3 : (edge == 1 ? 1 : 0);
  constexpr int v[4][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  return v[edge][moment];
}

Vec2 inner_moment_weight(CellKind kind, int order, int inner, const Vec2& xi) {
  if (order < 2) throw ContractError("inner moments exist only for order-2 edge elements");
  if (kind == CellKind::tri) return inner == 0 ? Vec2(1.0, 0.0) : Vec2(0.0, 1.0);
  const double x = xi.x(), y = xi.y();
  switch (inner) {
    case 0: return {0.5 * (1 + x), 0.0};
    case 1: return {0.5 * (1 - x), 0.0};
    case 2: return {0.0, 0.5 * (1 + y)};
    default: return {0.0, 0.5 * (1 - y)};
  }
}

double edge_dof_functional(CellKind kind, int order, int edge, int moment, const ReferenceField& v) {
  check_supported(kind, order, "edge_dof_functional");
  if (edge < 0 || edge >= (kind == CellKind::tri ? 3 : 4) || moment < 0 || moment >= order)
    throw ContractError("edge_dof_functional: edge or moment index out of range");
  std::vector<double> s, w;
  gauss_legendre(6, s, w);
  const Vec2 t = reference_tangent(kind, edge);
  const double len = reference_edge_length(kind, edge);
  double acc = 0.0;
  for (std::size_t q = 0; q < s.size(); ++q) {
    const double sq = 0.5 * (s[q] + 1.0);
    const Vec2 p = reference_edge_point(kind, edge, sq);
    acc += 0.5 * w[q] * len * v(p).dot(t) * edge_moment_weight(kind, order, edge, moment, p);
  }
  return acc;
}

double inner_dof_functional(CellKind kind, int order, int inner, const ReferenceField& v) {
  check_supported(kind, order, "inner_dof_functional");
  if (order < 2)
    throw ContractError("inner_dof_functional: order-1 edge elements have no inner dofs");
  if (inner < 0 || inner >= nedelec_inner_count(kind, order))
    throw ContractError("inner_dof_functional: inner index out of range");
  const QuadratureRule& rule = quadrature(kind, 8);
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q)
    acc += rule.weights[q] * v(rule.points[q]).dot(inner_moment_weight(kind, order, inner, rule.points[q]));
  return acc;
}

double apply_dof_functional(CellKind kind, int order, int dof, const ReferenceField& v) {
  const int edge_dofs = order * (kind == CellKind::tri ? 3 : 4);
  if (dof < edge_dofs) return edge_dof_functional(kind, order, dof / order, dof % order, v);
  return inner_dof_functional(kind, order, dof - edge_dofs, v);
}

}  // namespace rmm
