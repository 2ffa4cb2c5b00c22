#include "rmm/dofmap.hpp"

#include "rmm/elements.hpp"
#include "rmm/mapping.hpp"

namespace rmm {

namespace {

/// Local edge carrying the Lagrange midpoint between local vertices (a, a+1 mod n).
int midpoint_edge(CellKind kind, int m) {
  constexpr int tri[3] = {2, 0, 1};
  constexpr int quad[4] = {0, 1, 2, 3};
  return kind == CellKind::tri ? tri[m] : quad[m];
}

}  // namespace

DofMap::DofMap(const Mesh2D& mesh, Formulation f) : mesh_(&mesh), f_(f) {
  for (const Cell& c : mesh.cells())
    if (c.kind != f.kind)
      throw ParameterError("pairing " + to_string(f.pairing) + " requires a " + to_string(f.kind) +
                           " mesh");
  const index_t nv = mesh.num_nodes();
  const index_t ne = mesh.num_edges();
  u_nodes_ = mesh.nodes();
  for (const EdgeRecord& e : mesh.edges())
    u_nodes_.push_back(0.5 * (mesh.nodes()[e.nodes[0]] + mesh.nodes()[e.nodes[1]]));
  std::vector<index_t> centre(mesh.num_cells(), -1);
  for (index_t c = 0; c < mesh.num_cells(); ++c) {
    if (mesh.cells()[c].kind != CellKind::quad) continue;
    centre[c] = static_cast<index_t>(u_nodes_.size());
    u_nodes_.push_back(mesh.centroid(c));
  }

  int inner = 0;
  if (f_.p_space == PSpace::nodal) {
    num_p_nodes_ = f_.p_order == 1 ? nv : num_u_nodes();
    num_p_dofs_ = 4 * num_p_nodes_;
  } else if (f_.p_space == PSpace::nedelec) {
    inner = nedelec_inner_count(f_.kind, f_.p_order);
    num_p_functions_ = ne * f_.p_order + inner * mesh.num_cells();
    num_p_dofs_ = 2 * num_p_functions_;
  }

  u_off_.push_back(0);
  p_off_.push_back(0);
  d_off_.push_back(0);
  for (index_t c = 0; c < mesh.num_cells(); ++c) {
    const Cell& cell = mesh.cells()[c];
    const int nvc = cell.num_vertices();
    std::vector<index_t> un(cell.v.begin(), cell.v.begin() + nvc);
    for (int m = 0; m < nvc; ++m) un.push_back(nv + mesh.cell_edge(c, midpoint_edge(cell.kind, m)));
    if (cell.kind == CellKind::quad) un.push_back(centre[c]);
    u_ids_.insert(u_ids_.end(), un.begin(), un.end());
    u_off_.push_back(static_cast<index_t>(u_ids_.size()));

    for (index_t n : un) {
      d_ids_.push_back(u_dof(n, 0));
      d_ids_.push_back(u_dof(n, 1));
    }

    if (f_.p_space == PSpace::nodal) {
      const int np = lagrange_count(cell.kind, f_.p_order);
      for (int a = 0; a < np; ++a) {
        p_ids_.push_back(un[a]);
        for (int ij = 0; ij < 4; ++ij) d_ids_.push_back(p_node_dof(un[a], ij / 2, ij % 2));
      }
    } else if (f_.p_space == PSpace::nedelec) {
      const int k = f_.p_order;
      for (int i = 0; i < num_edges(cell.kind); ++i) {
        const EdgeRecord& e = mesh.edges()[mesh.cell_edge(c, i)];
        const double s = mesh.cell_edge_sense(c, i) * beta_normalization(k, e.length);
        for (int j = 0; j < k; ++j) {
          p_ids_.push_back(local_edge_function(c, i, j));
          p_scale_.push_back(s);
        }
      }
      for (int q = 0; q < inner; ++q) {
        p_ids_.push_back(ne * k + inner * c + q);
        p_scale_.push_back(1.0);
      }
      for (index_t fn : std::span(p_ids_).subspan(p_off_.back())) {
        d_ids_.push_back(function_dof(fn, 0));
        d_ids_.push_back(function_dof(fn, 1));
      }
    }
    p_off_.push_back(static_cast<index_t>(p_ids_.size()));
    d_off_.push_back(static_cast<index_t>(d_ids_.size()));
  }
}

index_t DofMap::local_edge_function(index_t c, int edge, int moment) const {
  const index_t e = mesh_->cell_edge(c, edge);
  if (f_.p_order == 1) return edge_function(e, 0);
  const Cell& cell = mesh_->cells()[c];
  const index_t node = cell.v[edge_moment_vertex(cell.kind, f_.p_order, edge, moment)];
  return edge_function(e, node == mesh_->edges()[e].nodes[0] ? 0 : 1);
}

int DofMap::cell_num_u_nodes(index_t c) const { return u_off_[c + 1] - u_off_[c]; }
int DofMap::cell_num_p_local(index_t c) const { return p_off_[c + 1] - p_off_[c]; }

std::span<const index_t> DofMap::cell_u_nodes(index_t c) const {
  return std::span(u_ids_).subspan(u_off_[c], u_off_[c + 1] - u_off_[c]);
}

std::span<const index_t> DofMap::cell_p_entities(index_t c) const {
  return std::span(p_ids_).subspan(p_off_[c], p_off_[c + 1] - p_off_[c]);
}

std::span<const index_t> DofMap::cell_dofs(index_t c) const {
  return std::span(d_ids_).subspan(d_off_[c], d_off_[c + 1] - d_off_[c]);
}

std::span<const double> DofMap::cell_p_scale(index_t c) const {
  if (f_.p_space != PSpace::nedelec) return {};
  return std::span(p_scale_).subspan(p_off_[c], p_off_[c + 1] - p_off_[c]);
}

}  // namespace rmm
