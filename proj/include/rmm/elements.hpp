#pragma once

#include <array>
#include <functional>
#include <vector>

#include "rmm/common.hpp"

namespace rmm {

enum class Family { lagrange, nedelec };

/// Values and reference gradients of scalar Lagrange shape functions.
struct ScalarBasis {
  int n = 0;
  std::array<double, 9> value{};
  std::array<Vec2, 9> grad{};
};

/// Values and reference scalar curls (d v_y/d xi - d v_x/d eta) of vector shape functions.
struct VectorBasis {
  int n = 0;
  std::array<Vec2, 12> value{};
  std::array<double, 12> curl{};
};

/// Lagrange shape functions on the reference triangle {xi, eta >= 0, xi + eta <= 1}
/// or the reference square [-1, 1]^2.
///   tri  order 1: vertices (0,0), (1,0), (0,1)
///   tri  order 2: vertices, then midpoints of (0,1), (1,2), (2,0)
///   quad order 1: vertices (-1,-1), (1,-1), (1,1), (-1,1)
///   quad order 2: vertices, midpoints of (0,1), (1,2), (2,3), (3,0), centre
ScalarBasis lagrange_eval(CellKind kind, int order, const Vec2& xi);
int lagrange_count(CellKind kind, int order);
/// Reference coordinates of the Lagrange nodes in the order above.
std::vector<Vec2> lagrange_nodes(CellKind kind, int order);

/// First-kind Nedelec shape vectors in the closed forms of the edge-element
/// construction: edge functions in local edge order (k per edge), then inner
/// functions. Counts: NT1 3, NT2 8, NQ1 4, NQ2 12.
VectorBasis nedelec_eval(CellKind kind, int order, const Vec2& xi);
int nedelec_count(CellKind kind, int order);
int nedelec_inner_count(CellKind kind, int order);

enum class DofKind { vertex, edge, inner };

struct DofDescriptor {
  DofKind kind;
  int entity;  // local vertex, edge or inner index
  int moment;  // moment index j along the edge (0 otherwise)
};

struct ReferenceElement {
  Family family;
  CellKind kind;
  int order;
  std::vector<DofDescriptor> dofs;
};

ReferenceElement reference_element(Family family, CellKind kind, int order);

/// Unit reference tangent t_i of local edge i.
Vec2 reference_tangent(CellKind kind, int edge);
/// Reference point on local edge i at parameter s in [0, 1] (start to end).
Vec2 reference_edge_point(CellKind kind, int edge, double s);
double reference_edge_length(CellKind kind, int edge);

/// Edge weight r_j of moment j on local edge i, evaluated at reference point xi.
double edge_moment_weight(CellKind kind, int order, int edge, int moment, const Vec2& xi);
/// Local vertex at which r_j equals one (order 2); the start vertex for order 1.
int edge_moment_vertex(CellKind kind, int order, int edge, int moment);
/// Inner weight q_i evaluated at reference point xi.
Vec2 inner_moment_weight(CellKind kind, int order, int inner, const Vec2& xi);

using ReferenceField = std::function<Vec2(const Vec2&)>;

/// m_j^{e_i}(v) = int_{e_i} (v . t_i) r_j ds on the reference cell.
double edge_dof_functional(CellKind kind, int order, int edge, int moment, const ReferenceField& v);
/// m_i^inner(v) = int_{B_e} v . q_i da; order-1 elements have no inner dofs.
double inner_dof_functional(CellKind kind, int order, int inner, const ReferenceField& v);

/// Applies functional `dof` (edge moments first, then inner) to v.
double apply_dof_functional(CellKind kind, int order, int dof, const ReferenceField& v);

}  // namespace rmm
