#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "pdwg/assembly.hpp"
#include "pdwg/fields.hpp"
#include "pdwg/projection.hpp"
#include "pdwg/spaces.hpp"

namespace pdwg {

/// Primal error ||e_h||_0. For k = 2 the approximation is piecewise
/// constant and the error is measured against the centroid interpolant,
///   ||e_h||_0 = ( sum_T |T| (u_h|_T - u(x_T))^2 )^(1/2);
/// for k > 2 it is the L2 distance to the elementwise projection of u.
inline double error_primal(const PrimalSpace& ps, const Eigen::VectorXd& u_h,
                           const ScalarField& u_exact) {
  const TriMesh& m = ps.mesh();
  double acc = 0.0;
  if (ps.k() == 2) {
    for (int t = 0; t < m.n_triangles(); ++t) {
      const double d = u_h[ps.offset(t)] - u_exact(m.centroid(t));
      acc += m.area(t) * d * d;
    }
  } else {
    const Eigen::VectorXd proj = project_primal(ps, u_exact);
    for (int t = 0; t < m.n_triangles(); ++t) {
      const auto tri = m.corners(t);
      const Eigen::MatrixXd mass = tri_mass_matrix(ps.basis(t), tri[0], tri[1], tri[2]);
      const Eigen::VectorXd d = u_h.segment(ps.offset(t), ps.per_element()) -
                                proj.segment(ps.offset(t), ps.per_element());
      acc += d.dot(mass * d);
    }
  }
  return std::sqrt(acc);
}

/// L2-type norms of the three components of a weak function:
///   ||lambda_0||_0 over the elements, and for the edge pieces
///   ||lambda_b||_0 = ( sum_T h_T ||lambda_b||^2_dT )^(1/2)
/// and likewise for lambda_n, so interior edges count once per adjacent
/// element.
struct LambdaNorms {
  double l0 = 0.0;
  double lb = 0.0;
  double ln = 0.0;
};

inline LambdaNorms lambda_norms(const WGSpace& sp, const Eigen::VectorXd& lambda) {
  const TriMesh& m = sp.mesh();
  LambdaNorms out;
  double a0 = 0.0, ab = 0.0, an = 0.0;

  const EdgeBasis trace = sp.trace_basis();
  const EdgeBasis flux = sp.flux_basis();
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto tri = m.corners(t);
    const Eigen::MatrixXd mass = tri_mass_matrix(sp.interior_basis(t), tri[0], tri[1], tri[2]);
    const Eigen::VectorXd c = lambda.segment(sp.interior_offset(t), sp.interior_dim());
    a0 += c.dot(mass * c);

    const double ht = m.diameter(t);
    for (int le = 0; le < 3; ++le) {
      const int e = m.triangle_edge(t, le);
      const double len = m.edge(e).length;
      const Eigen::VectorXd cb = lambda.segment(sp.trace_offset(e), sp.trace_dim());
      ab += ht * cb.dot(edge_mass_matrix(trace, len) * cb);
      const Eigen::VectorXd cn = lambda.segment(sp.flux_offset(e), sp.flux_dim());
      an += ht * cn.dot(edge_mass_matrix(flux, len) * cn);
    }
  }
  out.l0 = std::sqrt(a0);
  out.lb = std::sqrt(ab);
  out.ln = std::sqrt(an);
  return out;
}

/// Stabilizer energy norm |||sigma||| = s(sigma, sigma)^(1/2).
inline double triple_bar(const WGSpace& sp, const TensorField& a, const Eigen::VectorXd& sigma) {
  return std::sqrt(std::max(0.0, stabilizer_form(sp, a, sigma, sigma)));
}

/// Discrete H1-type norm of the primal space,
///   |||v|||_1^2 = sum_T h_T^2 ||L v||_T^2
///               + sum_e h_e ||[a grad v . n]||_e^2 + h_e^{-1} ||[v]||_e^2,
/// with one-sided boundary jumps kept exactly on the segments where the
/// paired weak-space coefficients survive the subspace constraints; this is
/// the norm the inf-sup witness reproduces identically.
inline double triple_bar_1(const WGSpace& sp, const PrimalSpace& ps, const TensorField& a,
                           const Eigen::VectorXd& v) {
  const TriMesh& m = sp.mesh();
  const int ex = sp.quad_exactness();
  double acc = 0.0;

  for (int t = 0; t < m.n_triangles(); ++t) {
    const TriBasis basis = ps.basis(t);
    const double ht = m.diameter(t);
    const auto tri = m.corners(t);
    const MappedRule q = map_to_triangle(tri_quadrature(ex), tri[0], tri[1], tri[2]);
    for (int p = 0; p < q.size(); ++p) {
      const Vec2& x = q.points[p];
      const Eigen::Matrix2d ax = a.value(x);
      const Vec2 da = a.row_divergence(x);
      double lv = 0.0;
      for (int j = 0; j < basis.size(); ++j)
        lv += v[ps.offset(t) + j] * ((ax.array() * basis.hessian(j, x).array()).sum() +
                                     da.dot(basis.gradient(j, x)));
      acc += ht * ht * q.weights[p] * lv * lv;
    }
  }

  const std::vector<EdgeClass>& cls = sp.edge_classes();
  const QuadRule eq = edge_quadrature(ex);
  for (int e = 0; e < m.n_edges(); ++e) {
    const Edge& E = m.edge(e);
    const Vec2 &pa = m.vertex(E.v[0]), &pb = m.vertex(E.v[1]);
    const double he = E.length;
    const bool keep_trace = !cls[e].gamma_nc;
    const bool keep_flux = !cls[e].gamma_dc;
    if (!keep_trace && !keep_flux) continue;
    for (int p = 0; p < eq.size(); ++p) {
      const double tp = eq.points(p, 0);
      const Vec2 x = pa + tp * (pb - pa);
      const double w = eq.weights[p] * E.length;
      const auto plus = detail::primal_edge_trace(ps, a, v, E.tri[0], x, E.normal);
      detail::EdgeTraceEval minus;
      if (E.tri[1] >= 0) minus = detail::primal_edge_trace(ps, a, v, E.tri[1], x, E.normal);
      if (keep_trace) {
        const double jc = plus.conormal - minus.conormal;
        acc += w * he * jc * jc;
      }
      if (keep_flux) {
        const double jv = plus.value - minus.value;
        acc += w / he * jv * jv;
      }
    }
  }
  return std::sqrt(acc);
}

}  // namespace pdwg
