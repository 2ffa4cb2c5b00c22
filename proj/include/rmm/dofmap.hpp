#pragma once

#include <span>
#include <vector>

#include "rmm/formulation.hpp"
#include "rmm/mesh.hpp"

namespace rmm {

/// Global numbering. Displacement dofs come first (2 per u-node, component
/// fastest), followed by micro-distortion dofs:
///   nodal   4 per P-node, ordered P11, P12, P21, P22
///   nedelec 2 per vector function (one per row of P)
/// u-nodes are the mesh vertices, then edge midpoints (by edge id), then quad
/// centres (by cell order). Order-2 edge functions are keyed by the physical
/// endpoint at which their moment weight equals one: slot 0 for the lower node id.
///
/// Cell-local layout: u (node a, component i) -> 2a + i, then
/// P nodal (node a, entry ij) -> 4a + 2i + j or P edge (function f, row i) -> 2f + i,
/// offset by the u block.
class DofMap {
 public:
  DofMap(const Mesh2D& mesh, Formulation f);

  const Formulation& formulation() const { return f_; }
  const Mesh2D& mesh() const { return *mesh_; }

  index_t num_dofs() const { return num_u_dofs() + num_p_dofs_; }
  index_t num_u_dofs() const { return 2 * num_u_nodes(); }
  index_t num_p_dofs() const { return num_p_dofs_; }
  index_t p_offset() const { return num_u_dofs(); }

  index_t num_u_nodes() const { return static_cast<index_t>(u_nodes_.size()); }
  const std::vector<Vec2>& u_node_coords() const { return u_nodes_; }
  index_t u_dof(index_t node, int comp) const { return 2 * node + comp; }

  /// Nodal P: P-nodes are the vertices (order 1) or all u-nodes (order 2).
  index_t num_p_nodes() const { return num_p_nodes_; }
  index_t p_node_dof(index_t pnode, int i, int j) const { return p_offset() + 4 * pnode + 2 * i + j; }

  /// Edge-element P.
  index_t num_p_functions() const { return num_p_functions_; }
  index_t edge_function(index_t edge, int slot) const { return edge * f_.p_order + slot; }
  index_t function_dof(index_t func, int row) const { return p_offset() + 2 * func + row; }

  int cell_num_u_nodes(index_t c) const;
  int cell_num_p_local(index_t c) const;  // local P nodes or P functions
  int cell_num_dofs(index_t c) const { return static_cast<int>(cell_dofs(c).size()); }

  /// Global u-nodes of cell c in Lagrange local order.
  std::span<const index_t> cell_u_nodes(index_t c) const;
  /// Global P-nodes (nodal) or P functions (edge elements) in local order.
  std::span<const index_t> cell_p_entities(index_t c) const;
  /// Global dofs in cell-local layout.
  std::span<const index_t> cell_dofs(index_t c) const;
  /// Orientation/normalization factor alpha*beta of each local P function (edge elements).
  std::span<const double> cell_p_scale(index_t c) const;

  /// Global edge function of local moment j on local edge i of cell c.
  index_t local_edge_function(index_t c, int edge, int moment) const;

 private:
  const Mesh2D* mesh_;
  Formulation f_;
  std::vector<Vec2> u_nodes_;
  index_t num_p_nodes_ = 0;
  index_t num_p_functions_ = 0;
  index_t num_p_dofs_ = 0;

  std::vector<index_t> u_off_, u_ids_;
  std::vector<index_t> p_off_, p_ids_;
  std::vector<double> p_scale_;
  std::vector<index_t> d_off_, d_ids_;
};

}  // namespace rmm
