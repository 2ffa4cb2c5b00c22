#include "rmm/mapping.hpp"

#include <cmath>
#include <string>

#include "rmm/elements.hpp"

namespace rmm {

namespace {

std::string cell_label(index_t cell) {
  return cell >= 0 ? "cell " + std::to_string(cell) : std::string("cell");
}

}  // namespace

GeometryMap::GeometryMap(CellKind kind, std::span<const Vec2> vertices, index_t cell_id)
    : kind_(kind), cell_(cell_id) {
  if (static_cast<int>(vertices.size()) < num_vertices())
    throw ContractError("GeometryMap: too few vertices");
  for (int a = 0; a < num_vertices(); ++a) x_[a] = vertices[a];
}

GeometryMap::GeometryMap(const Mesh2D& mesh, index_t cell) : cell_(cell) {
  const Cell& c = mesh.cells()[cell];
  kind_ = c.kind;
  for (int a = 0; a < c.num_vertices(); ++a) x_[a] = mesh.nodes()[c.v[a]];
}

Vec2 GeometryMap::point(const Vec2& xi) const {
  const ScalarBasis b = lagrange_eval(kind_, 1, xi);
  Vec2 p = Vec2::Zero();
  for (int a = 0; a < b.n; ++a) p += b.value[a] * x_[a];
  return p;
}

Mat2 GeometryMap::jacobian(const Vec2& xi) const {
  const ScalarBasis b = lagrange_eval(kind_, 1, xi);
  Mat2 J = Mat2::Zero();
  for (int a = 0; a < b.n; ++a) J += x_[a] * b.grad[a].transpose();
  return J;
}

std::optional<Vec2> GeometryMap::inverse(const Vec2& x) const {
  Vec2 xi = kind_ == CellKind::tri ? Vec2(1.0 / 3.0, 1.0 / 3.0) : Vec2(0.0, 0.0);
  const double scale = (x_[1] - x_[0]).norm() + (x_[2] - x_[0]).norm();
  for (int it = 0; it < 50; ++it) {
    const Vec2 r = point(xi) - x;
    const Mat2 J = jacobian(xi);
    if (std::abs(J.determinant()) < 1e-300) return std::nullopt;
    const Vec2 dxi = J.lu().solve(r);
    xi -= dxi;
    if (dxi.norm() < 1e-14 * (1.0 + xi.norm()) || r.norm() < 1e-15 * scale) return xi;
  }
  return std::nullopt;
}

bool GeometryMap::contains(const Vec2& x, double tol) const {
  const auto xi = inverse(x);
  if (!xi) return false;
  if (kind_ == CellKind::tri)
    return xi->x() >= -tol && xi->y() >= -tol && xi->x() + xi->y() <= 1.0 + tol;
  return std::abs(xi->x()) <= 1.0 + tol && std::abs(xi->y()) <= 1.0 + tol;
}

double checked_det(const Mat2& J, index_t cell) {
  const double d = J.determinant();
  if (!(d > 0.0)) throw GeometryError(cell_label(cell) + ": non-positive Jacobian determinant");
  return d;
}

Vec2 map_scalar_gradient(const Mat2& J, const Vec2& ref_grad) {
  const double d = J.determinant();
  if (d == 0.0 || !std::isfinite(d)) throw GeometryError("singular Jacobian in gradient map");
  return J.transpose().lu().solve(ref_grad);
}

double beta_normalization(int order, double edge_length) {
  if (order != 1 && order != 2) throw ContractError("beta_normalization: order must be 1 or 2");
  if (!(edge_length > 0.0)) throw GeometryError("beta_normalization: non-positive edge length");
  return order == 1 ? edge_length : 0.5 * edge_length;
}

MappedVector piola_map(const Mat2& J, double detJ, int alpha, double beta, const Vec2& v,
                       double ref_curl) {
  if (detJ == 0.0 || !std::isfinite(detJ)) throw GeometryError("singular Jacobian in Piola map");
  const double s = alpha * beta;
  return {s * J.transpose().lu().solve(v), s * ref_curl / detJ};
}

}  // namespace rmm
