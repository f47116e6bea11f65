#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdwg/mesh.hpp"

namespace pdwg {

/// Nodes and weights on a reference cell: the unit triangle
/// {x, y >= 0, x + y <= 1} for triangle rules, the interval [0,1] for edge
/// rules (column 0 of `points` is the parameter, column 1 is zero).
struct QuadRule {
  Eigen::Matrix<double, Eigen::Dynamic, 2> points;
  Eigen::VectorXd weights;
  int exactness = 0;
  int size() const { return static_cast<int>(weights.size()); }
};

/// Requested polynomial exactness beyond this is refused rather than
/// silently downgraded.
inline constexpr int kMaxQuadExactness = 60;

/// Exactness used whenever non-polynomial problem data (exact solutions,
/// sources, boundary values) is integrated. Generous enough that the
/// quadrature error of smooth data stays at round-off even on the coarse
/// two-element mesh, where trigonometric data is far from resolved.
inline constexpr int kDataQuadExactness = 20;

namespace detail {

/// Gauss-Legendre nodes/weights on [-1,1] via Newton iteration on the
/// three-term recurrence; accurate to machine precision for the sizes
/// used here.
inline void gauss_legendre(int n, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  x.resize(n);
  w.resize(n);
  const auto legendre = [n](double z, double& pn, double& dpn) {
    double p0 = 1.0, p1 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2 * j + 1) * z * p1 - j * p2) / (j + 1);
    }
    // p0 = P_n(z), p1 = P_{n-1}(z)
    pn = p0;
    dpn = n * (z * p0 - p1) / (z * z - 1.0);
  };
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pn = 0.0, dpn = 0.0;
    // Newton until the step no longer moves the iterate, i.e. the node is
    // converged to the last bit; the cap only guards against ulp cycling.
    for (int iter = 0; iter < 100; ++iter) {
      legendre(z, pn, dpn);
      const double next = z - pn / dpn;
      if (next == z) break;
      z = next;
    }
    legendre(z, pn, dpn);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dpn * dpn);
  }
}

inline int points_for_exactness(int exactness) { return exactness / 2 + 1; }

/// Gauss rule on [0,1] with the given point count; no range guard, callers
/// validate the requested exactness themselves.
inline QuadRule interval_rule(int n) {
  Eigen::VectorXd x, w;
  gauss_legendre(n, x, w);
  QuadRule r;
  r.points.setZero(n, 2);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.points(i, 0) = 0.5 * (x[i] + 1.0);
    r.weights[i] = 0.5 * w[i];
  }
  r.exactness = 2 * n - 1;
  return r;
}

}  // namespace detail

/// Gauss rule on [0,1], exact for polynomials of degree <= exactness.
inline QuadRule edge_quadrature(int exactness) {
  if (exactness < 0 || exactness > kMaxQuadExactness)
    throw std::invalid_argument("edge_quadrature: unsupported exactness " +
                                std::to_string(exactness));
  return detail::interval_rule(detail::points_for_exactness(exactness));
}

/// Tensor rule on the unit triangle collapsed along x + y = 1, exact for
/// total degree <= exactness. The y-direction picks up a factor (1 - x)
/// from the Jacobian, so the x-rule runs one degree hotter.
inline QuadRule tri_quadrature(int exactness) {
  if (exactness < 0 || exactness > kMaxQuadExactness)
    throw std::invalid_argument("tri_quadrature: unsupported exactness " +
                                std::to_string(exactness));
  const QuadRule qu = detail::interval_rule(detail::points_for_exactness(exactness + 1));
  const QuadRule qv = detail::interval_rule(detail::points_for_exactness(exactness));
  QuadRule r;
  const int n = qu.size() * qv.size();
  r.points.resize(n, 2);
  r.weights.resize(n);
  int p = 0;
  for (int i = 0; i < qu.size(); ++i) {
    const double u = qu.points(i, 0);
    for (int j = 0; j < qv.size(); ++j, ++p) {
      r.points(p, 0) = u;
      r.points(p, 1) = qv.points(j, 0) * (1.0 - u);
      r.weights[p] = qu.weights[i] * qv.weights[j] * (1.0 - u);
    }
  }
  r.exactness = exactness;
  return r;
}

/// Quadrature mapped to a physical cell.
struct MappedRule {
  std::vector<Vec2> points;
  Eigen::VectorXd weights;
  int size() const { return static_cast<int>(weights.size()); }
};

inline MappedRule map_to_triangle(const QuadRule& r, const Vec2& a, const Vec2& b,
                                  const Vec2& c) {
  MappedRule m;
  m.points.resize(r.size());
  m.weights.resize(r.size());
  const double jac = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  for (int i = 0; i < r.size(); ++i) {
    m.points[i] = a + r.points(i, 0) * (b - a) + r.points(i, 1) * (c - a);
    m.weights[i] = r.weights[i] * jac;
  }
  return m;
}

/// The rule's parameter column stays meaningful: point i sits at
/// a + t_i (b - a) with t_i = r.points(i,0).
inline MappedRule map_to_edge(const QuadRule& r, const Vec2& a, const Vec2& b) {
  MappedRule m;
  m.points.resize(r.size());
  m.weights.resize(r.size());
  const double len = (b - a).norm();
  for (int i = 0; i < r.size(); ++i) {
    m.points[i] = a + r.points(i, 0) * (b - a);
    m.weights[i] = r.weights[i] * len;
  }
  return m;
}

}  // namespace pdwg
