#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmm/common.hpp"

namespace rmm {

struct Cell {
  CellKind kind = CellKind::tri;
  int region = 1;
  std::array<index_t, 4> v{-1, -1, -1, -1};

  int num_vertices() const { return kind == CellKind::tri ? 3 : 4; }
};

/// Local edge i of a reference cell runs from vertex `start` to vertex `end`.
/// The directions follow the reference tangents of the edge-element families:
/// tri  e0: v2->v1, e1: v0->v2, e2: v0->v1
/// quad e0: v0->v1, e1: v1->v2, e2: v3->v2, e3: v0->v3
struct LocalEdge {
  int start;
  int end;
};

std::span<const LocalEdge> reference_edges(CellKind kind);
inline int num_edges(CellKind kind) { return kind == CellKind::tri ? 3 : 4; }

struct EdgeAdjacency {
  index_t cell = -1;
  int local_edge = -1;
  /// +1 if the cell's reference edge direction agrees with the global tangent.
  int sense = 0;
};

struct EdgeRecord {
  std::array<index_t, 2> nodes{};  // ascending node ids
  Vec2 tangent = Vec2::Zero();     // unit, positive-x rule
  double length = 0.0;
  std::array<EdgeAdjacency, 2> adj{};
  int num_adjacent = 0;

  bool is_boundary() const { return num_adjacent == 1; }
};

/// Tag attached to the boundary edge (a, b); node order is irrelevant.
struct BoundaryTag {
  index_t a;
  index_t b;
  std::string name;
};

struct EdgeTopology {
  std::vector<EdgeRecord> edges;
  /// cell_edges[c][i] is the global edge id of local edge i of cell c.
  std::vector<std::array<index_t, 4>> cell_edges;
  /// cell_senses[c][i] is the orientation factor of local edge i of cell c.
  std::vector<std::array<int, 4>> cell_senses;
};

/// Builds the edge table. Edge ids follow the lexicographic order of the
/// sorted endpoint pairs. Throws TopologyError for non-manifold edges or
/// duplicate cells.
EdgeTopology build_edge_topology(std::span<const Cell> cells, std::span<const Vec2> nodes);

/// Sign convention for a tangent: +1 when it points to positive x, with the
/// y component deciding for (numerically) vertical tangents.
int orientation_alpha(const Vec2& local_tangent);

class Mesh2D {
 public:
  Mesh2D() = default;
  Mesh2D(std::vector<Vec2> nodes, std::vector<Cell> cells, std::vector<BoundaryTag> tags = {});

  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<EdgeRecord>& edges() const { return topo_.edges; }
  index_t num_nodes() const { return static_cast<index_t>(nodes_.size()); }
  index_t num_cells() const { return static_cast<index_t>(cells_.size()); }
  index_t num_edges() const { return static_cast<index_t>(topo_.edges.size()); }

  index_t cell_edge(index_t c, int i) const { return topo_.cell_edges[c][i]; }
  /// Orientation factor alpha of local edge i of cell c.
  int cell_edge_sense(index_t c, int i) const { return topo_.cell_senses[c][i]; }

  /// Edge id joining nodes a and b, or -1.
  index_t find_edge(index_t a, index_t b) const;

  const std::map<index_t, std::string>& boundary_tags() const { return tags_; }
  std::vector<std::string> tag_names() const;
  bool has_tag(const std::string& name) const;
  /// Edge ids carrying the tag, ascending. Throws ParameterError for an unknown tag.
  std::vector<index_t> edges_with_tag(const std::string& name) const;
  std::vector<BoundaryTag> tag_list() const;

  double cell_area(index_t c) const;
  Vec2 centroid(index_t c) const;
  bool has_kind(CellKind kind) const;
  std::vector<int> regions() const;
  /// Largest edge length.
  double max_edge_length() const;

 private:
  std::vector<Vec2> nodes_;
  std::vector<Cell> cells_;
  EdgeTopology topo_;
  std::map<index_t, std::string> tags_;
};

/// Structured rectangle [0,l]x[0,h]. Region 1 left of interface_x, region 2
/// right of it. Tags: bottom, top, left, right.
Mesh2D gen_rectangle(double length, double height, int nx, int ny, CellKind kind,
                     std::optional<double> interface_x = std::nullopt);

/// Structured polar mesh of the annulus r_i <= r <= r_o with chord edges.
/// Radial grid lines are geometrically graded and include r_m when given;
/// cells with r < r_m get region 2. Angular lines sit at (k + 1/2) * 2 pi / n_theta
/// so the ray theta = 0 crosses ring chords at their midpoints. Tags: inner, outer.
Mesh2D gen_annulus(double r_o, double r_i, std::optional<double> r_m, int n_r, int n_theta,
                   CellKind kind);

/// Line-oriented text format, header `mm-mesh v1`.
void write_mesh(std::ostream& os, const Mesh2D& mesh);
Mesh2D read_mesh(std::istream& is);

}  // namespace rmm
