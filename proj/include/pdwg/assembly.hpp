#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "pdwg/fields.hpp"
#include "pdwg/mesh.hpp"
#include "pdwg/projection.hpp"
#include "pdwg/quadrature.hpp"
#include "pdwg/spaces.hpp"

namespace pdwg {

/// Problem data: volume source f, Dirichlet datum g1 on the Dirichlet
/// segment, Neumann datum g2 on the Neumann segment (flux with respect to
/// the outward normal, which the assembly passes alongside the point).
struct LoadData {
  ScalarField f;
  ScalarField g1;
  FluxField g2;
};

/// Reduced symmetric saddle system
///   [ S  B^T ] [lambda]   [F]
///   [ B  0   ] [  u   ] = [0]
/// over the unconstrained weak-space coefficients (first n_lambda rows)
/// and the primal coefficients (last n_u rows).
struct SaddleSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  int n_lambda = 0;
  int n_u = 0;
  std::vector<std::string> warnings;
};

inline SaddleSystem assemble(const WGSpace& sp, const PrimalSpace& ps, const TensorField& a,
                             const LoadData& load) {
  if (&sp.mesh() != &ps.mesh())
    throw std::invalid_argument("assemble: weak and primal space use different meshes");
  if (sp.k() != ps.k())
    throw std::invalid_argument("assemble: weak and primal space degree mismatch");

  const TriMesh& m = sp.mesh();
  const std::vector<int>& red = sp.reduced_index();
  SaddleSystem sys;
  sys.n_lambda = sp.reduced_dim();
  sys.n_u = ps.dim();
  const int n = sys.n_lambda + sys.n_u;
  sys.rhs = Eigen::VectorXd::Zero(n);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(m.n_triangles()) *
                (sp.local_dim() * sp.local_dim() + 2 * sp.local_dim() * ps.per_element()));

  // Matrix entries are polynomial and handled inside the local operators;
  // the load integrals see arbitrary data and use the data-grade rules.
  const QuadRule tq = tri_quadrature(kDataQuadExactness);
  const QuadRule eq = edge_quadrature(kDataQuadExactness);

  for (int t = 0; t < m.n_triangles(); ++t) {
    const Eigen::MatrixXd s_loc = local_stabilizer(sp, a, t);
    const Eigen::MatrixXd b_loc = weak_operator_moments(sp, a, t);
    const std::vector<int> g = sp.local_to_global(t);

    for (int i = 0; i < sp.local_dim(); ++i) {
      const int ri = red[g[i]];
      if (ri < 0) continue;
      for (int j = 0; j < sp.local_dim(); ++j) {
        const int rj = red[g[j]];
        if (rj < 0 || s_loc(i, j) == 0.0) continue;
        trips.emplace_back(ri, rj, s_loc(i, j));
      }
    }
    for (int i = 0; i < ps.per_element(); ++i) {
      const int row = sys.n_lambda + ps.offset(t) + i;
      for (int j = 0; j < sp.local_dim(); ++j) {
        const int rj = red[g[j]];
        if (rj < 0 || b_loc(i, j) == 0.0) continue;
        trips.emplace_back(row, rj, b_loc(i, j));
        trips.emplace_back(rj, row, b_loc(i, j));
      }
    }

    // -(f, sigma_0)_T
    const auto tri = m.corners(t);
    const MappedRule vq = map_to_triangle(tq, tri[0], tri[1], tri[2]);
    const TriBasis trial = sp.interior_basis(t);
    for (int p = 0; p < vq.size(); ++p) {
      const double w = vq.weights[p] * load.f(vq.points[p]);
      if (w == 0.0) continue;
      for (int j = 0; j < trial.size(); ++j) {
        const int rj = red[sp.interior_offset(t) + j];
        sys.rhs[rj] -= w * trial.value(j, vq.points[p]);
      }
    }
  }

  // Boundary data: -<g2, sigma_b> on the Neumann segment and
  // +<g1, sigma_n> on the Dirichlet segment (sigma_n coefficients are
  // stored against the edge normal, which is outward on the boundary).
  const EdgeBasis trace = sp.trace_basis();
  const EdgeBasis flux = sp.flux_basis();
  const std::vector<EdgeClass>& cls = sp.edge_classes();
  bool used_g1 = false, used_g2 = false;
  for (int e = 0; e < m.n_edges(); ++e) {
    const EdgeClass& c = cls[e];
    if (!c.boundary || (!c.gamma_n && !c.gamma_d)) continue;
    const Edge& E = m.edge(e);
    const Vec2 &pa = m.vertex(E.v[0]), &pb = m.vertex(E.v[1]);
    for (int p = 0; p < eq.size(); ++p) {
      const double tp = eq.points(p, 0);
      const Vec2 x = pa + tp * (pb - pa);
      const double w = eq.weights[p] * E.length;
      if (c.gamma_n) {
        used_g2 = true;
        const double g2v = load.g2 ? load.g2(x, E.normal) : 0.0;
        for (int j = 0; j < trace.size(); ++j) {
          const int rj = red[sp.trace_offset(e) + j];
          if (rj >= 0) sys.rhs[rj] -= w * g2v * trace.value(j, tp);
        }
      }
      if (c.gamma_d) {
        used_g1 = true;
        const double g1v = load.g1 ? load.g1(x) : 0.0;
        for (int j = 0; j < flux.size(); ++j) {
          const int rj = red[sp.flux_offset(e) + j];
          if (rj >= 0) sys.rhs[rj] += w * g1v * flux.value(j, tp);
        }
      }
    }
  }
  if (load.g1 && !used_g1)
    sys.warnings.push_back("Dirichlet datum supplied but the Dirichlet segment is empty");
  if (load.g2 && !used_g2)
    sys.warnings.push_back("Neumann datum supplied but the Neumann segment is empty");

  Eigen::SparseMatrix<double> mat(n, n);
  mat.setFromTriplets(trips.begin(), trips.end());
  mat.makeCompressed();
  sys.matrix = std::move(mat);
  return sys;
}

struct LinearSolve {
  Eigen::VectorXd x;
  double residual = 0.0;  ///< relative algebraic residual
  bool success = false;
  std::string message;
};

/// Direct sparse solve. The saddle matrix is symmetric indefinite;
/// SparseLU pivots enough to handle it, and the relative residual is
/// reported so callers can flag degraded factorizations.
inline LinearSolve solve_linear(const Eigen::SparseMatrix<double>& matrix,
                                const Eigen::VectorXd& rhs) {
  LinearSolve out;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(matrix);
  if (lu.info() != Eigen::Success) {
    out.message = "sparse factorization failed: " + lu.lastErrorMessage();
    return out;
  }
  out.x = lu.solve(rhs);
  if (!out.x.allFinite()) {
    out.message = "solver produced non-finite values";
    return out;
  }
  const double bnorm = rhs.norm();
  const double rnorm = (matrix * out.x - rhs).norm();
  out.residual = bnorm > 0.0 ? rnorm / bnorm : rnorm;
  out.success = true;
  return out;
}

struct SolveResult {
  Eigen::VectorXd lambda;  ///< full weak-space layout; constrained entries zero
  Eigen::VectorXd u;       ///< primal-space layout
  double residual = 0.0;   ///< relative algebraic residual of the reduced solve
  bool success = false;
  std::string message;
};

inline SolveResult solve(const SaddleSystem& sys, const WGSpace& sp, const PrimalSpace& ps) {
  SolveResult out;
  out.lambda = Eigen::VectorXd::Zero(sp.dim());
  out.u = Eigen::VectorXd::Zero(ps.dim());

  const LinearSolve lin = solve_linear(sys.matrix, sys.rhs);
  out.residual = lin.residual;
  out.message = lin.message;
  if (!lin.success) return out;

  const std::vector<int>& red = sp.reduced_index();
  for (int i = 0; i < sp.dim(); ++i)
    if (red[i] >= 0) out.lambda[i] = lin.x[red[i]];
  out.u = lin.x.tail(ps.dim());
  out.success = true;
  return out;
}

struct WitnessResult {
  Eigen::VectorXd rho;  ///< weak-space layout with constrained entries zeroed
  double lhs = 0.0;     ///< b(v, rho)
  double rhs = 0.0;     ///< the matching discrete norm |||v|||_1^2
};

namespace detail {

/// Value of v and of a grad v . n_e on edge e seen from triangle t, at
/// edge parameter tp, for a primal coefficient vector.
struct EdgeTraceEval {
  double value = 0.0;
  double conormal = 0.0;
};

inline EdgeTraceEval primal_edge_trace(const PrimalSpace& ps, const TensorField& a,
                                       const Eigen::VectorXd& v, int t, const Vec2& x,
                                       const Vec2& n_e) {
  const TriBasis basis = ps.basis(t);
  EdgeTraceEval out;
  const Eigen::Matrix2d ax = a.value(x);
  for (int j = 0; j < basis.size(); ++j) {
    const double c = v[ps.offset(t) + j];
    out.value += c * basis.value(j, x);
    out.conormal += c * (ax * basis.gradient(j, x)).dot(n_e);
  }
  return out;
}

}  // namespace detail

/// The dual element certifying stability: for v in the primal space,
///   rho = { h_T^2 L v,  -h_e [a grad v . n],  h_e^{-1} [v] }
/// with jumps taken across the fixed edge normal ([w] = w|_plus - w|_minus
/// where the normal points from plus to minus; on the boundary the jump is
/// the one-sided trace). Components of the constrained subspace are zeroed.
/// By construction b(v, rho) equals the discrete norm |||v|||_1^2 reported
/// in `rhs`, which makes the inf-sup bound checkable to round-off.
inline WitnessResult inf_sup_witness(const WGSpace& sp, const PrimalSpace& ps,
                                     const TensorField& a, const Eigen::VectorXd& v) {
  const TriMesh& m = sp.mesh();
  const int ex = sp.quad_exactness();
  WitnessResult out;
  out.rho = Eigen::VectorXd::Zero(sp.dim());

  double norm_sq = 0.0;

  // Interior component h_T^2 L v, projected onto P_k(T); L v is already a
  // polynomial of degree <= k for the tensors used here, so the projection
  // just re-expands it.
  for (int t = 0; t < m.n_triangles(); ++t) {
    const TriBasis basis = ps.basis(t);
    const double ht = m.diameter(t);
    const ScalarField lv = [&](const Vec2& x) {
      const Eigen::Matrix2d ax = a.value(x);
      const Vec2 da = a.row_divergence(x);
      double acc = 0.0;
      for (int j = 0; j < basis.size(); ++j)
        acc += v[ps.offset(t) + j] * ((ax.array() * basis.hessian(j, x).array()).sum() +
                                      da.dot(basis.gradient(j, x)));
      return acc;
    };
    const auto tri = m.corners(t);
    out.rho.segment(sp.interior_offset(t), sp.interior_dim()) =
        ht * ht * project_onto_triangle(lv, sp.interior_basis(t), tri[0], tri[1], tri[2], ex);

    const MappedRule vq = map_to_triangle(tri_quadrature(ex), tri[0], tri[1], tri[2]);
    double acc = 0.0;
    for (int p = 0; p < vq.size(); ++p) acc += vq.weights[p] * lv(vq.points[p]) * lv(vq.points[p]);
    norm_sq += ht * ht * acc;
  }

  // Edge components from the jumps of v and of its conormal derivative.
  const std::vector<EdgeClass>& cls = sp.edge_classes();
  const EdgeBasis trace = sp.trace_basis();
  const EdgeBasis flux = sp.flux_basis();
  const QuadRule eq = edge_quadrature(ex);
  for (int e = 0; e < m.n_edges(); ++e) {
    const Edge& E = m.edge(e);
    const Vec2 &pa = m.vertex(E.v[0]), &pb = m.vertex(E.v[1]);
    const double he = E.length;
    const bool keep_trace = !cls[e].gamma_nc;  // sigma_b dofs survive here
    const bool keep_flux = !cls[e].gamma_dc;   // sigma_n dofs survive here

    const ScalarField jump_v = [&](const Vec2& x) {
      double val = detail::primal_edge_trace(ps, a, v, E.tri[0], x, E.normal).value;
      if (E.tri[1] >= 0)
        val -= detail::primal_edge_trace(ps, a, v, E.tri[1], x, E.normal).value;
      return val;
    };
    const ScalarField jump_conormal = [&](const Vec2& x) {
      double val = detail::primal_edge_trace(ps, a, v, E.tri[0], x, E.normal).conormal;
      if (E.tri[1] >= 0)
        val -= detail::primal_edge_trace(ps, a, v, E.tri[1], x, E.normal).conormal;
      return val;
    };

    if (keep_trace)
      out.rho.segment(sp.trace_offset(e), sp.trace_dim()) =
          -he * project_onto_edge(jump_conormal, trace, pa, pb, ex);
    if (keep_flux)
      out.rho.segment(sp.flux_offset(e), sp.flux_dim()) =
          project_onto_edge(jump_v, flux, pa, pb, ex) / he;

    for (int p = 0; p < eq.size(); ++p) {
      const double tp = eq.points(p, 0);
      const Vec2 x = pa + tp * (pb - pa);
      const double w = eq.weights[p] * E.length;
      if (keep_trace) {
        const double jc = jump_conormal(x);
        norm_sq += w * he * jc * jc;
      }
      if (keep_flux) {
        const double jv = jump_v(x);
        norm_sq += w / he * jv * jv;
      }
    }
  }

  out.rhs = norm_sq;
  out.lhs = coupling_form(sp, ps, a, v, out.rho);
  return out;
}

}  // namespace pdwg
