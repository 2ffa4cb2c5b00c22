#pragma once

#include <vector>

#include "rmm/common.hpp"

namespace rmm {

struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return points.size(); }
};

/// Reference-cell rule exact for polynomials up to `degree` (0..8).
/// Triangles (area 1/2) use symmetric positive-weight rules, quads ([-1,1]^2)
/// tensor Gauss-Legendre. Rules are built once and cached.
const QuadratureRule& quadrature(CellKind kind, int degree);

/// n-point Gauss-Legendre rule on [-1, 1], n >= 1; points ascending.
void gauss_legendre(int n, std::vector<double>& points, std::vector<double>& weights);

}  // namespace rmm
