#include "rmm/quadrature.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

namespace rmm {

void gauss_legendre(int n, std::vector<double>& points, std::vector<double>& weights) {
  if (n < 1) throw ContractError("gauss_legendre: n must be >= 1");
  points.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    points[i] = -x;
    points[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) points[n / 2] = 0.0;
}

namespace {

struct TriBuilder {
  QuadratureRule rule;
  void centroid(double w) { add(1.0 / 3.0, 1.0 / 3.0, w); }
  void s21(double a, double w) {
    const double b = 1.0 - 2.0 * a;
    add(a, a, w);
    add(a, b, w);
    add(b, a, w);
  }
  void s111(double a, double b, double w) {
    const double c = 1.0 - a - b;
    add(a, b, w);
    add(b, a, w);
    add(a, c, w);
    add(c, a, w);
    add(b, c, w);
    add(c, b, w);
  }
  // Weights are tabulated for unit measure; the reference triangle has area 1/2.
  void add(double x, double y, double w) {
    rule.points.emplace_back(x, y);
    rule.weights.push_back(0.5 * w);
  }
};

QuadratureRule build_tri(int degree) {
  TriBuilder b;
  if (degree <= 1) {
    b.centroid(1.0);
    b.rule.degree = 1;
  } else if (degree == 2) {
    b.s21(1.0 / 6.0, 1.0 / 3.0);
    b.rule.degree = 2;
  } else if (degree <= 4) {
    b.s21(0.44594849091596483, 0.22338158967801136);
    b.s21(0.09157621350977077, 0.10995174365532195);
    b.rule.degree = 4;
  } else if (degree == 5) {
    const double s = std::sqrt(15.0);
    b.centroid(9.0 / 40.0);
    b.s21((6.0 - s) / 21.0, (155.0 - s) / 1200.0);
    b.s21((6.0 + s) / 21.0, (155.0 + s) / 1200.0);
    b.rule.degree = 5;
  } else if (degree == 6) {
    b.s21(0.2492867451708709, 0.11678627572644561);
    b.s21(0.06308901449151025, 0.05084490637021827);
    b.s111(0.05314504984478933, 0.31035245103381437, 0.08285107561833473);
    b.rule.degree = 6;
  } else {
    b.centroid(0.144315607677787);
    b.s21(0.459292588292723, 0.095091634267285);
    b.s21(0.17056930775176, 0.103217370534718);
    b.s21(0.050547228317031, 0.032458497623198);
    b.s111(0.008394777409958, 0.263112829634638, 0.027230314174435);
    b.rule.degree = 8;
  }
  return b.rule;
}

QuadratureRule build_quad(int degree) {
  const int n = std::max(1, (degree + 2) / 2);
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule rule;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      rule.points.emplace_back(x[i], x[j]);
      rule.weights.push_back(w[i] * w[j]);
    }
  rule.degree = 2 * n - 1;
  return rule;
}

}  // namespace

const QuadratureRule& quadrature(CellKind kind, int degree) {
  if (degree < 0 || degree > 8)
    throw ContractError("quadrature: unsupported degree " + std::to_string(degree) +
                        " (supported 0..8)");
  static std::array<QuadratureRule, 9> tri, quad;
  static std::once_flag once;
  std::call_once(once, [] {
    for (int d = 0; d <= 8; ++d) {
      tri[d] = build_tri(d);
      quad[d] = build_quad(d);
    }
  });
  return kind == CellKind::tri ? tri[degree] : quad[degree];
}

}  // namespace rmm
