#include "rmm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>

namespace rmm {

namespace {

constexpr std::array<LocalEdge, 3> kTriEdges{{{2, 1}, {0, 2}, {0, 1}}};
constexpr std::array<LocalEdge, 4> kQuadEdges{{{0, 1}, {1, 2}, {3, 2}, {0, 3}}};

std::pair<index_t, index_t> sorted_pair(index_t a, index_t b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

double signed_area(const Cell& cell, std::span<const Vec2> nodes) {
  double twice = 0.0;
  const int n = cell.num_vertices();
  for (int i = 0; i < n; ++i) {
    const Vec2& p = nodes[cell.v[i]];
    const Vec2& q = nodes[cell.v[(i + 1) % n]];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * twice;
}

}  // namespace

std::span<const LocalEdge> reference_edges(CellKind kind) {
  if (kind == CellKind::tri) return kTriEdges;
  return kQuadEdges;
}

int orientation_alpha(const Vec2& t) {
  const double n = t.norm();
  if (n == 0.0) throw GeometryError("orientation of a zero tangent vector is undefined");
  const double tx = t.x() / n;
  if (std::abs(tx) > 1e-12) return tx > 0.0 ? 1 : -1;
  return t.y() > 0.0 ? 1 : -1;
}

EdgeTopology build_edge_topology(std::span<const Cell> cells, std::span<const Vec2> nodes) {
  struct Incidence {
    index_t a, b;
    index_t cell;
    int local;
  };
  std::vector<Incidence> inc;
  inc.reserve(cells.size() * 4);

  {
    std::vector<std::array<index_t, 4>> keys;
    keys.reserve(cells.size());
    for (index_t c = 0; c < static_cast<index_t>(cells.size()); ++c) {
      const Cell& cell = cells[c];
      std::array<index_t, 4> k = cell.v;
      std::sort(k.begin(), k.begin() + cell.num_vertices());
      keys.push_back(k);
      for (int i = 0; i < cell.num_vertices(); ++i) {
        if (cell.v[i] < 0 || cell.v[i] >= static_cast<index_t>(nodes.size()))
          throw TopologyError("cell " + std::to_string(c) + " references a missing node");
      }
      for (const LocalEdge& le : reference_edges(cell.kind)) {
        auto [a, b] = sorted_pair(cell.v[le.start], cell.v[le.end]);
        inc.push_back({a, b, c, static_cast<int>(&le - reference_edges(cell.kind).data())});
      }
    }
    std::vector<std::array<index_t, 4>> sorted_keys = keys;
    std::sort(sorted_keys.begin(), sorted_keys.end());
    if (std::adjacent_find(sorted_keys.begin(), sorted_keys.end()) != sorted_keys.end())
      throw TopologyError("duplicate cell in cell list");
  }

  std::stable_sort(inc.begin(), inc.end(), [](const Incidence& x, const Incidence& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });

  EdgeTopology topo;
  topo.cell_edges.assign(cells.size(), {-1, -1, -1, -1});
  topo.cell_senses.assign(cells.size(), {0, 0, 0, 0});
  for (std::size_t i = 0; i < inc.size();) {
    std::size_t j = i;
    while (j < inc.size() && inc[j].a == inc[i].a && inc[j].b == inc[i].b) ++j;
    if (j - i > 2) {
      throw TopologyError("non-manifold edge (" + std::to_string(inc[i].a) + ", " +
                          std::to_string(inc[i].b) + ") shared by " + std::to_string(j - i) +
                          " cells");
    }
    EdgeRecord e;
    e.nodes = {inc[i].a, inc[i].b};
    const Vec2 d = nodes[e.nodes[1]] - nodes[e.nodes[0]];
    e.length = d.norm();
    if (e.length <= 0.0) throw GeometryError("zero-length edge");
    e.tangent = orientation_alpha(d) * d / e.length;
    const index_t id = static_cast<index_t>(topo.edges.size());
    for (std::size_t k = i; k < j; ++k) {
      const Cell& cell = cells[inc[k].cell];
      const LocalEdge le = reference_edges(cell.kind)[inc[k].local];
      const Vec2 local = nodes[cell.v[le.end]] - nodes[cell.v[le.start]];
      const int sense = local.dot(e.tangent) > 0.0 ? 1 : -1;
      e.adj[e.num_adjacent++] = {inc[k].cell, inc[k].local, sense};
      topo.cell_edges[inc[k].cell][inc[k].local] = id;
      topo.cell_senses[inc[k].cell][inc[k].local] = sense;
    }
    topo.edges.push_back(e);
    i = j;
  }
  return topo;
}

Mesh2D::Mesh2D(std::vector<Vec2> nodes, std::vector<Cell> cells, std::vector<BoundaryTag> tags)
    : nodes_(std::move(nodes)), cells_(std::move(cells)) {
  topo_ = build_edge_topology(cells_, nodes_);
  for (index_t c = 0; c < num_cells(); ++c) {
    if (signed_area(cells_[c], nodes_) <= 0.0)
      throw GeometryError("cell " + std::to_string(c) + " is not counterclockwise");
    if (cells_[c].kind == CellKind::quad) {
      // Bilinear map has positive Jacobian iff every corner turns left.
      for (int i = 0; i < 4; ++i) {
        const Vec2& p = nodes_[cells_[c].v[i]];
        const Vec2& q = nodes_[cells_[c].v[(i + 1) % 4]];
        const Vec2& r = nodes_[cells_[c].v[(i + 2) % 4]];
        const Vec2 a = q - p, b = r - q;
        if (a.x() * b.y() - a.y() * b.x() <= 0.0)
          throw GeometryError("quad cell " + std::to_string(c) + " is not strictly convex");
      }
    }
  }
  for (const BoundaryTag& t : tags) {
    const index_t e = find_edge(t.a, t.b);
    if (e < 0)
      throw TopologyError("tag '" + t.name + "' names a non-existent edge (" +
                          std::to_string(t.a) + ", " + std::to_string(t.b) + ")");
    if (!topo_.edges[e].is_boundary())
      throw TopologyError("tag '" + t.name + "' is attached to an interior edge");
    tags_[e] = t.name;
  }
}

index_t Mesh2D::find_edge(index_t a, index_t b) const {
  auto [x, y] = sorted_pair(a, b);
  auto it = std::lower_bound(topo_.edges.begin(), topo_.edges.end(), std::pair{x, y},
                             [](const EdgeRecord& e, const std::pair<index_t, index_t>& k) {
                               return std::tie(e.nodes[0], e.nodes[1]) < std::tie(k.first, k.second);
                             });
  if (it == topo_.edges.end() || it->nodes[0] != x || it->nodes[1] != y) return -1;
  return static_cast<index_t>(it - topo_.edges.begin());
}

std::vector<std::string> Mesh2D::tag_names() const {
  std::vector<std::string> names;
  for (const auto& [e, n] : tags_) names.push_back(n);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

bool Mesh2D::has_tag(const std::string& name) const {
  return std::any_of(tags_.begin(), tags_.end(), [&](const auto& kv) { return kv.second == name; });
}

std::vector<index_t> Mesh2D::edges_with_tag(const std::string& name) const {
  std::vector<index_t> out;
  for (const auto& [e, n] : tags_)
    if (n == name) out.push_back(e);
  if (out.empty()) throw ParameterError("unknown boundary tag '" + name + "'");
  return out;
}

std::vector<BoundaryTag> Mesh2D::tag_list() const {
  std::vector<BoundaryTag> out;
  for (const auto& [e, n] : tags_) out.push_back({topo_.edges[e].nodes[0], topo_.edges[e].nodes[1], n});
  return out;
}

double Mesh2D::cell_area(index_t c) const { return signed_area(cells_[c], nodes_); }

Vec2 Mesh2D::centroid(index_t c) const {
  const Cell& cell = cells_[c];
  Vec2 s = Vec2::Zero();
  for (int i = 0; i < cell.num_vertices(); ++i) s += nodes_[cell.v[i]];
  return s / cell.num_vertices();
}

bool Mesh2D::has_kind(CellKind kind) const {
  return std::any_of(cells_.begin(), cells_.end(), [&](const Cell& c) { return c.kind == kind; });
}

std::vector<int> Mesh2D::regions() const {
  std::vector<int> r;
  for (const Cell& c : cells_) r.push_back(c.region);
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

double Mesh2D::max_edge_length() const {
  double h = 0.0;
  for (const EdgeRecord& e : topo_.edges) h = std::max(h, e.length);
  return h;
}

namespace {

/// Appends a structured quad (CCW corner list) either as one quad or as two
/// triangles split along the diagonal through its lowest node id.
void push_quad(std::vector<Cell>& cells, std::array<index_t, 4> q, int region, CellKind kind) {
  if (kind == CellKind::quad) {
    cells.push_back({CellKind::quad, region, q});
    return;
  }
  const int p = static_cast<int>(std::min_element(q.begin(), q.end()) - q.begin());
  const auto at = [&](int k) { return q[(p + k) % 4]; };
  cells.push_back({CellKind::tri, region, {at(0), at(1), at(2), -1}});
  cells.push_back({CellKind::tri, region, {at(0), at(2), at(3), -1}});
}

}  // namespace

Mesh2D gen_rectangle(double length, double height, int nx, int ny, CellKind kind,
                     std::optional<double> interface_x) {
  if (nx < 1 || ny < 1) throw ParameterError("gen_rectangle: nx and ny must be >= 1");
  if (!(length > 0.0) || !(height > 0.0))
    throw ParameterError("gen_rectangle: length and height must be positive");
  double split = length;
  if (interface_x) {
    if (!(*interface_x > 0.0 && *interface_x < length))
      throw ParameterError("gen_rectangle: interface_x must lie strictly inside (0, l)");
    const double cols = *interface_x / length * nx;
    if (std::abs(cols - std::round(cols)) > 1e-9)
      throw ParameterError("gen_rectangle: interface x = " + std::to_string(*interface_x) +
                           " is not a grid line for nx = " + std::to_string(nx));
    split = *interface_x;
  }
  const index_t stride = nx + 1;
  std::vector<Vec2> nodes;
  nodes.reserve(static_cast<std::size_t>(stride) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) nodes.emplace_back(length * i / nx, height * j / ny);

  std::vector<Cell> cells;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const index_t n00 = j * stride + i;
      const double xc = length * (i + 0.5) / nx;
      const int region = xc < split ? 1 : 2;
      push_quad(cells, {n00, n00 + 1, n00 + stride + 1, n00 + stride}, region, kind);
    }
  }
  std::vector<BoundaryTag> tags;
  for (int i = 0; i < nx; ++i) {
    tags.push_back({i, i + 1, "bottom"});
    tags.push_back({ny * stride + i, ny * stride + i + 1, "top"});
  }
  for (int j = 0; j < ny; ++j) {
    tags.push_back({j * stride, (j + 1) * stride, "left"});
    tags.push_back({j * stride + nx, (j + 1) * stride + nx, "right"});
  }
  return Mesh2D(std::move(nodes), std::move(cells), std::move(tags));
}

Mesh2D gen_annulus(double r_o, double r_i, std::optional<double> r_m, int n_r, int n_theta,
                   CellKind kind) {
  if (!(r_i > 0.0 && r_o > r_i))
    throw ParameterError("gen_annulus: radii must satisfy r_o > r_i > 0");
  if (r_m && !(*r_m > r_i && *r_m < r_o))
    throw ParameterError("gen_annulus: ring radius must satisfy r_o > r_m > r_i");
  if (n_r < (r_m ? 2 : 1) || n_theta < 3)
    throw ParameterError("gen_annulus: need n_r >= 1 (>= 2 with a ring) and n_theta >= 3");

  // Geometric radial grading, with r_m as an exact grid line.
  std::vector<double> radii;
  auto graded = [](double a, double b, int n, std::vector<double>& out) {
    for (int j = 0; j < n; ++j) out.push_back(a * std::pow(b / a, static_cast<double>(j) / n));
  };
  int ring_layers = 0;
  if (r_m) {
    const double frac = std::log(*r_m / r_i) / std::log(r_o / r_i);
    ring_layers = std::clamp(static_cast<int>(std::lround(frac * n_r)), 1, n_r - 1);
    graded(r_i, *r_m, ring_layers, radii);
    graded(*r_m, r_o, n_r - ring_layers, radii);
  } else {
    graded(r_i, r_o, n_r, radii);
  }
  radii.push_back(r_o);

  const double dtheta = 2.0 * std::numbers::pi / n_theta;
  std::vector<Vec2> nodes;
  for (int j = 0; j <= n_r; ++j) {
    for (int k = 0; k < n_theta; ++k) {
      const double th = (k + 0.5) * dtheta;
      nodes.emplace_back(radii[j] * std::cos(th), radii[j] * std::sin(th));
    }
  }
  const auto id = [&](int j, int k) { return static_cast<index_t>(j * n_theta + (k % n_theta)); };
  std::vector<Cell> cells;
  for (int j = 0; j < n_r; ++j) {
    const int region = (r_m && j < ring_layers) ? 2 : 1;
    for (int k = 0; k < n_theta; ++k)
      push_quad(cells, {id(j, k), id(j + 1, k), id(j + 1, k + 1), id(j, k + 1)}, region, kind);
  }
  std::vector<BoundaryTag> tags;
  for (int k = 0; k < n_theta; ++k) {
    tags.push_back({id(0, k), id(0, k + 1), "inner"});
    tags.push_back({id(n_r, k), id(n_r, k + 1), "outer"});
  }
  return Mesh2D(std::move(nodes), std::move(cells), std::move(tags));
}

void write_mesh(std::ostream& os, const Mesh2D& mesh) {
  std::ostringstream buf;
  buf.precision(17);
  buf << "mm-mesh v1\n";
  buf << "nodes " << mesh.num_nodes() << '\n';
  for (const Vec2& p : mesh.nodes()) buf << p.x() << ' ' << p.y() << '\n';
  buf << "cells " << mesh.num_cells() << '\n';
  for (const Cell& c : mesh.cells()) {
    buf << to_string(c.kind) << ' ' << c.region;
    for (int i = 0; i < c.num_vertices(); ++i) buf << ' ' << c.v[i];
    buf << '\n';
  }
  const auto tags = mesh.tag_list();
  buf << "tags " << tags.size() << '\n';
  for (const BoundaryTag& t : tags) buf << t.a << ' ' << t.b << ' ' << t.name << '\n';
  os << buf.str();
  if (!os) throw Error("write_mesh: output stream failure");
}

Mesh2D read_mesh(std::istream& is) {
  std::string line;
  int lineno = 0;
  auto next = [&]() -> std::istringstream {
    while (std::getline(is, line)) {
      ++lineno;
      if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos)
        return std::istringstream(line);
    }
    throw ParameterError("read_mesh: unexpected end of input after line " + std::to_string(lineno));
  };
  auto fail = [&](const std::string& what) {
    throw ParameterError("read_mesh: line " + std::to_string(lineno) + ": " + what);
  };
  auto section = [&](const char* name) {
    auto ls = next();
    std::string key;
    long n = -1;
    if (!(ls >> key >> n) || key != name || n < 0) fail(std::string("expected '") + name + " N'");
    return n;
  };

  {
    auto ls = next();
    std::string magic, version;
    ls >> magic >> version;
    if (magic != "mm-mesh" || version != "v1") fail("missing 'mm-mesh v1' header");
  }
  std::vector<Vec2> nodes;
  for (long i = 0, n = section("nodes"); i < n; ++i) {
    auto ls = next();
    double x, y;
    if (!(ls >> x >> y)) fail("expected 'x y'");
    nodes.emplace_back(x, y);
  }
  std::vector<Cell> cells;
  for (long i = 0, n = section("cells"); i < n; ++i) {
    auto ls = next();
    std::string kind;
    Cell c;
    if (!(ls >> kind >> c.region)) fail("expected 'kind region n0 n1 ...'");
    if (kind == "tri") c.kind = CellKind::tri;
    else if (kind == "quad") c.kind = CellKind::quad;
    else fail("unknown cell kind '" + kind + "'");
    for (int k = 0; k < c.num_vertices(); ++k)
      if (!(ls >> c.v[k])) fail("too few node ids for " + kind);
    cells.push_back(c);
  }
  std::vector<BoundaryTag> tags;
  for (long i = 0, n = section("tags"); i < n; ++i) {
    auto ls = next();
    BoundaryTag t;
    if (!(ls >> t.a >> t.b >> t.name)) fail("expected 'a b name'");
    tags.push_back(t);
  }
  return Mesh2D(std::move(nodes), std::move(cells), std::move(tags));
}

}  // namespace rmm
