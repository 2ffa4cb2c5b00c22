#pragma once

#include <array>
#include <optional>

#include "rmm/common.hpp"
#include "rmm/mesh.hpp"

namespace rmm {

/// Affine (triangle) or bilinear (quad) map from the reference cell to a
/// straight-sided physical cell, X(xi) = sum_a N_a(xi) x_a over the vertices.
class GeometryMap {
 public:
  GeometryMap(CellKind kind, std::span<const Vec2> vertices, index_t cell_id = -1);
  GeometryMap(const Mesh2D& mesh, index_t cell);

  CellKind kind() const { return kind_; }
  index_t cell() const { return cell_; }
  const Vec2& vertex(int a) const { return x_[a]; }
  int num_vertices() const { return kind_ == CellKind::tri ? 3 : 4; }

  Vec2 point(const Vec2& xi) const;
  /// J = dX/dxi, column j holds dX/dxi_j.
  Mat2 jacobian(const Vec2& xi) const;

  /// Newton inversion of X; nullopt if the iteration fails to converge.
  std::optional<Vec2> inverse(const Vec2& x) const;
  /// True if x lies in the cell (reference coordinates within tol).
  bool contains(const Vec2& x, double tol = 1e-10) const;

 private:
  CellKind kind_;
  std::array<Vec2, 4> x_{};
  index_t cell_ = -1;
};

/// Throws GeometryError if det J is not positive; the message names the cell.
double checked_det(const Mat2& J, index_t cell = -1);

/// grad N = J^{-T} grad_xi N.
Vec2 map_scalar_gradient(const Mat2& J, const Vec2& ref_grad);

/// beta = L for k = 1, L/2 for k = 2.
double beta_normalization(int order, double edge_length);

struct MappedVector {
  Vec2 value;
  double curl;
};

/// Covariant Piola transform with orientation and normalization:
/// psi = alpha beta J^{-T} v, curl psi = alpha beta curl_xi v / det J.
MappedVector piola_map(const Mat2& J, double detJ, int alpha, double beta, const Vec2& v,
                       double ref_curl);

}  // namespace rmm
