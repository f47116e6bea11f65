#pragma once

// Independent reference implementations used to cross-check the library:
// closed-form integrals, an integration-by-parts route to the weak-operator
// moments, and a dense brute-force assembly. These deliberately avoid the
// library's assembly code paths; they share only the mesh and the basis
// evaluators, which are themselves pinned against closed forms.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "pdwg/assembly.hpp"
#include "pdwg/basis.hpp"
#include "pdwg/mesh.hpp"
#include "pdwg/quadrature.hpp"
#include "pdwg/spaces.hpp"

namespace oracle {

using pdwg::Vec2;

/// Exact integral of x^p y^q over the unit triangle {x,y >= 0, x+y <= 1}:
/// p! q! / (p+q+2)!. Evaluated as a telescoping product to stay exact in
/// floating point for the exponents used in tests.
inline double tri_monomial_integral(int p, int q) {
  long double r = 1.0L;
  for (int i = 1; i <= q; ++i) r *= static_cast<long double>(i) / (p + i);
  r /= static_cast<long double>(p + q + 1) * (p + q + 2);
  return static_cast<double>(r);
}

/// Strong operator L w = a : Hess w + div(a) . grad w applied to one basis
/// function at a point.
inline double strong_op(const pdwg::TriBasis& basis, const pdwg::TensorField& a, int j,
                        const Vec2& x) {
  const Eigen::Matrix2d ax = a.value(x);
  const Eigen::Matrix2d h = basis.hessian(j, x);
  const Vec2 g = basis.gradient(j, x);
  return ax(0, 0) * h(0, 0) + ax(0, 1) * h(0, 1) + ax(1, 0) * h(1, 0) + ax(1, 1) * h(1, 1) +
         a.row_divergence(x).dot(g);
}

/// Weak-operator moments on element t computed through the other
/// integration-by-parts identity (valid for symmetric tensors):
///   (L_w sigma, w)_T = (L sigma_0, w)_T
///                    + <sigma_0 - sigma_b, a grad w . n>_dT
///                    - <a grad sigma_0 . n - sigma_n, w>_dT.
inline Eigen::MatrixXd weak_moments_by_parts(const pdwg::WGSpace& sp, const pdwg::TensorField& a,
                                             int t) {
  const pdwg::TriMesh& m = sp.mesh();
  const pdwg::TriBasis test = sp.test_basis(t);
  const pdwg::TriBasis trial = sp.interior_basis(t);
  const pdwg::EdgeBasis trace = sp.trace_basis();
  const pdwg::EdgeBasis flux = sp.flux_basis();
  const int ex = 2 * sp.k() + 6;  // deliberately not the production order

  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(test.size(), sp.local_dim());

  const auto tri = m.corners(t);
  const pdwg::MappedRule vq = pdwg::map_to_triangle(pdwg::tri_quadrature(ex), tri[0], tri[1], tri[2]);
  for (int p = 0; p < vq.size(); ++p) {
    const Vec2& x = vq.points[p];
    for (int i = 0; i < test.size(); ++i)
      for (int j = 0; j < trial.size(); ++j)
        r(i, sp.local_interior(j)) += vq.weights[p] * strong_op(trial, a, j, x) * test.value(i, x);
  }

  const pdwg::QuadRule eq = pdwg::edge_quadrature(ex);
  for (int le = 0; le < 3; ++le) {
    const int e = m.triangle_edge(t, le);
    const pdwg::Edge& edge = m.edge(e);
    const double sgn = m.triangle_edge_sign(t, le);
    const Vec2 n_t = sgn * edge.normal;
    const Vec2 &pa = m.vertex(edge.v[0]), &pb = m.vertex(edge.v[1]);
    for (int p = 0; p < eq.size(); ++p) {
      const double tp = eq.points(p, 0);
      const Vec2 x = pa + tp * (pb - pa);
      const double w = eq.weights[p] * edge.length;
      const Eigen::Matrix2d ax = a.value(x);
      for (int i = 0; i < test.size(); ++i) {
        const double test_conormal = (ax * test.gradient(i, x)).dot(n_t);
        const double test_val = test.value(i, x);
        for (int j = 0; j < trial.size(); ++j) {
          const double trial_conormal = (ax * trial.gradient(j, x)).dot(n_t);
          r(i, sp.local_interior(j)) +=
              w * (trial.value(j, x) * test_conormal - trial_conormal * test_val);
        }
        for (int j = 0; j < trace.size(); ++j)
          r(i, sp.local_trace(le, j)) -= w * trace.value(j, tp) * test_conormal;
        for (int j = 0; j < flux.size(); ++j)
          r(i, sp.local_flux(le, j)) += w * sgn * flux.value(j, tp) * test_val;
      }
    }
  }
  return r;
}

/// Stabilizer element matrix assembled entry by entry from the defining
/// boundary products, again at a non-production quadrature order.
inline Eigen::MatrixXd stabilizer_by_definition(const pdwg::WGSpace& sp,
                                                const pdwg::TensorField& a, int t) {
  const pdwg::TriMesh& m = sp.mesh();
  const pdwg::TriBasis trial = sp.interior_basis(t);
  const pdwg::EdgeBasis trace = sp.trace_basis();
  const pdwg::EdgeBasis flux = sp.flux_basis();
  const double ht = m.diameter(t);
  const int n = sp.local_dim();
  const int ex = 2 * sp.k() + 6;

  // Trace values of (sigma_0 - sigma_b) and (a grad sigma_0 . n - sigma_n)
  // for every local coefficient at one boundary point.
  const auto eval_all = [&](int le, double tp, const Vec2& x, const Vec2& n_t, double sgn,
                            Eigen::VectorXd& d0, Eigen::VectorXd& d1) {
    d0.setZero(n);
    d1.setZero(n);
    const Eigen::Matrix2d ax = a.value(x);
    for (int j = 0; j < trial.size(); ++j) {
      d0[sp.local_interior(j)] = trial.value(j, x);
      d1[sp.local_interior(j)] = (ax * trial.gradient(j, x)).dot(n_t);
    }
    for (int j = 0; j < trace.size(); ++j) d0[sp.local_trace(le, j)] = -trace.value(j, tp);
    for (int j = 0; j < flux.size(); ++j) d1[sp.local_flux(le, j)] = -sgn * flux.value(j, tp);
  };

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd d0(n), d1(n);
  const pdwg::QuadRule eq = pdwg::edge_quadrature(ex);
  for (int le = 0; le < 3; ++le) {
    const int e = m.triangle_edge(t, le);
    const pdwg::Edge& edge = m.edge(e);
    const double sgn = m.triangle_edge_sign(t, le);
    const Vec2 &pa = m.vertex(edge.v[0]), &pb = m.vertex(edge.v[1]);
    for (int p = 0; p < eq.size(); ++p) {
      const double tp = eq.points(p, 0);
      const Vec2 x = pa + tp * (pb - pa);
      const double w = eq.weights[p] * edge.length;
      eval_all(le, tp, x, sgn * edge.normal, sgn, d0, d1);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          s(i, j) += w * (d0[i] * d0[j] / ht + ht * d1[i] * d1[j]);
    }
  }
  return s;
}

/// Dense reduced saddle system built from the oracle element pieces and a
/// directly integrated right-hand side.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> dense_saddle_system(
    const pdwg::WGSpace& sp, const pdwg::PrimalSpace& ps, const pdwg::TensorField& a,
    const pdwg::LoadData& load) {
  const pdwg::TriMesh& m = sp.mesh();
  const std::vector<int>& red = sp.reduced_index();
  const int nl = sp.reduced_dim();
  const int n = nl + ps.dim();
  Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  const int ex = 2 * sp.k() + 6;

  for (int t = 0; t < m.n_triangles(); ++t) {
    const Eigen::MatrixXd s_loc = stabilizer_by_definition(sp, a, t);
    const Eigen::MatrixXd b_loc = weak_moments_by_parts(sp, a, t);
    const std::vector<int> g = sp.local_to_global(t);
    for (int i = 0; i < sp.local_dim(); ++i) {
      if (red[g[i]] < 0) continue;
      for (int j = 0; j < sp.local_dim(); ++j)
        if (red[g[j]] >= 0) mat(red[g[i]], red[g[j]]) += s_loc(i, j);
    }
    for (int i = 0; i < ps.per_element(); ++i)
      for (int j = 0; j < sp.local_dim(); ++j)
        if (red[g[j]] >= 0) {
          mat(nl + ps.offset(t) + i, red[g[j]]) += b_loc(i, j);
          mat(red[g[j]], nl + ps.offset(t) + i) += b_loc(i, j);
        }

    const auto tri = m.corners(t);
    const pdwg::TriBasis trial = sp.interior_basis(t);
    const pdwg::MappedRule vq =
        pdwg::map_to_triangle(pdwg::tri_quadrature(ex), tri[0], tri[1], tri[2]);
    for (int p = 0; p < vq.size(); ++p)
      for (int j = 0; j < trial.size(); ++j) {
        const int rj = red[sp.interior_offset(t) + j];
        rhs[rj] -= vq.weights[p] * load.f(vq.points[p]) * trial.value(j, vq.points[p]);
      }
  }

  const pdwg::EdgeBasis trace = sp.trace_basis();
  const pdwg::EdgeBasis flux = sp.flux_basis();
  const std::vector<pdwg::EdgeClass>& cls = sp.edge_classes();
  const pdwg::QuadRule eq = pdwg::edge_quadrature(ex);
  for (int e = 0; e < m.n_edges(); ++e) {
    if (!cls[e].boundary) continue;
    const pdwg::Edge& edge = m.edge(e);
    const Vec2 &pa = m.vertex(edge.v[0]), &pb = m.vertex(edge.v[1]);
    for (int p = 0; p < eq.size(); ++p) {
      const double tp = eq.points(p, 0);
      const Vec2 x = pa + tp * (pb - pa);
      const double w = eq.weights[p] * edge.length;
      if (cls[e].gamma_n && load.g2)
        for (int j = 0; j < trace.size(); ++j) {
          const int rj = red[sp.trace_offset(e) + j];
          if (rj >= 0) rhs[rj] -= w * load.g2(x, edge.normal) * trace.value(j, tp);
        }
      if (cls[e].gamma_d && load.g1)
        for (int j = 0; j < flux.size(); ++j) {
          const int rj = red[sp.flux_offset(e) + j];
          if (rj >= 0) rhs[rj] += w * load.g1(x) * flux.value(j, tp);
        }
    }
  }
  return {mat, rhs};
}

}  // namespace oracle
