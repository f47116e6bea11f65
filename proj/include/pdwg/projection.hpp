#pragma once

#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "pdwg/basis.hpp"
#include "pdwg/fields.hpp"
#include "pdwg/quadrature.hpp"

namespace pdwg {

inline Eigen::MatrixXd tri_mass_matrix(const TriBasis& basis, const Vec2& a, const Vec2& b,
                                       const Vec2& c) {
  const MappedRule q = map_to_triangle(tri_quadrature(2 * basis.degree()), a, b, c);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (int p = 0; p < q.size(); ++p) {
    const Eigen::VectorXd v = basis.values(q.points[p]);
    m.noalias() += q.weights[p] * v * v.transpose();
  }
  return m;
}

inline Eigen::MatrixXd edge_mass_matrix(const EdgeBasis& basis, double length) {
  const QuadRule q = edge_quadrature(2 * basis.degree());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (int p = 0; p < q.size(); ++p) {
    const Eigen::VectorXd v = basis.values(q.points(p, 0));
    m.noalias() += length * q.weights[p] * v * v.transpose();
  }
  return m;
}

namespace detail {
inline Eigen::VectorXd solve_spd(const Eigen::MatrixXd& m, const Eigen::VectorXd& rhs,
                                 const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": mass matrix not positive definite");
  return llt.solve(rhs);
}
}  // namespace detail

/// Coefficients of the L2 projection of f onto the span of `basis` over the
/// triangle (a,b,c). `exactness` controls the moment quadrature; it must be
/// at least basis.degree() + degree(f) for polynomial f to be reproduced
/// exactly.
inline Eigen::VectorXd project_onto_triangle(const ScalarField& f, const TriBasis& basis,
                                             const Vec2& a, const Vec2& b, const Vec2& c,
                                             int exactness) {
  const MappedRule q = map_to_triangle(tri_quadrature(exactness), a, b, c);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis.size());
  for (int p = 0; p < q.size(); ++p)
    rhs.noalias() += q.weights[p] * f(q.points[p]) * basis.values(q.points[p]);
  return detail::solve_spd(tri_mass_matrix(basis, a, b, c), rhs, "project_onto_triangle");
}

/// Same on the edge from a to b, parameterized by t in [0,1].
inline Eigen::VectorXd project_onto_edge(const ScalarField& f, const EdgeBasis& basis,
                                         const Vec2& a, const Vec2& b, int exactness) {
  const QuadRule q = edge_quadrature(exactness);
  const double len = (b - a).norm();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis.size());
  for (int p = 0; p < q.size(); ++p) {
    const double t = q.points(p, 0);
    rhs.noalias() += len * q.weights[p] * f(a + t * (b - a)) * basis.values(t);
  }
  return detail::solve_spd(edge_mass_matrix(basis, len), rhs, "project_onto_edge");
}

}  // namespace pdwg
