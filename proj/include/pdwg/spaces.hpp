#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "pdwg/basis.hpp"
#include "pdwg/fields.hpp"
#include "pdwg/mesh.hpp"
#include "pdwg/projection.hpp"
#include "pdwg/quadrature.hpp"

namespace pdwg {

/// Dual (weak-function) space of degree k >= 2: on each element an interior
/// polynomial sigma_0 in P_k(T), on each edge a single-valued trace sigma_b
/// in P_k(e) and a flux sigma_n in P_{k-1}(e) relative to the fixed edge
/// normal. Boundary conditions of the constrained subspace (sigma_b = 0
/// off the Neumann segment, sigma_n = 0 off the Dirichlet segment) are
/// realized by eliminating the affected coefficients; reduced_index() maps
/// surviving coefficients to the compact numbering used by the solver.
class WGSpace {
 public:
  WGSpace(const TriMesh& mesh, int k, const BoundaryConfig& bc)
      : mesh_(&mesh), k_(k), bc_(bc) {
    if (k < 2)
      throw std::invalid_argument("WGSpace: degree k must be >= 2, got " + std::to_string(k));
    classes_ = classify_edges(mesh, bc);
    ni_ = TriBasis::dimension(k);
    nb_ = k + 1;
    nf_ = k;
    trace_base_ = ni_ * mesh.n_triangles();
    flux_base_ = trace_base_ + nb_ * mesh.n_edges();
    dim_ = flux_base_ + nf_ * mesh.n_edges();

    constrained_.assign(dim_, false);
    for (int e = 0; e < mesh.n_edges(); ++e) {
      if (classes_[e].gamma_nc)
        for (int j = 0; j < nb_; ++j) constrained_[trace_offset(e) + j] = true;
      if (classes_[e].gamma_dc)
        for (int j = 0; j < nf_; ++j) constrained_[flux_offset(e) + j] = true;
    }
    reduced_index_.assign(dim_, -1);
    reduced_dim_ = 0;
    for (int i = 0; i < dim_; ++i)
      if (!constrained_[i]) reduced_index_[i] = reduced_dim_++;
  }

  const TriMesh& mesh() const { return *mesh_; }
  const BoundaryConfig& boundary_config() const { return bc_; }
  const std::vector<EdgeClass>& edge_classes() const { return classes_; }
  int k() const { return k_; }

  int interior_dim() const { return ni_; }  ///< coefficients of sigma_0 per element
  int trace_dim() const { return nb_; }     ///< coefficients of sigma_b per edge
  int flux_dim() const { return nf_; }      ///< coefficients of sigma_n per edge

  int dim() const { return dim_; }
  int reduced_dim() const { return reduced_dim_; }

  int interior_offset(int t) const { return ni_ * t; }
  int trace_offset(int e) const { return trace_base_ + nb_ * e; }
  int flux_offset(int e) const { return flux_base_ + nf_ * e; }

  const std::vector<bool>& constrained() const { return constrained_; }
  const std::vector<int>& reduced_index() const { return reduced_index_; }

  TriBasis interior_basis(int t) const {
    return TriBasis(k_, mesh_->centroid(t), mesh_->diameter(t));
  }
  /// P_{k-2}(T) basis shared with the primal space; the weak operator is
  /// expanded in it.
  TriBasis test_basis(int t) const {
    return TriBasis(k_ - 2, mesh_->centroid(t), mesh_->diameter(t));
  }
  EdgeBasis trace_basis() const { return EdgeBasis(k_); }
  EdgeBasis flux_basis() const { return EdgeBasis(k_ - 1); }

  /// Element-local coefficient layout:
  /// [ sigma_0 | sigma_b on edges 0,1,2 | sigma_n on edges 0,1,2 ].
  int local_dim() const { return ni_ + 3 * (nb_ + nf_); }
  int local_interior(int j) const { return j; }
  int local_trace(int le, int j) const { return ni_ + le * nb_ + j; }
  int local_flux(int le, int j) const { return ni_ + 3 * nb_ + le * nf_ + j; }

  std::vector<int> local_to_global(int t) const {
    std::vector<int> g(local_dim());
    int p = 0;
    for (int j = 0; j < ni_; ++j) g[p++] = interior_offset(t) + j;
    for (int le = 0; le < 3; ++le) {
      const int e = mesh_->triangle_edge(t, le);
      for (int j = 0; j < nb_; ++j) g[p++] = trace_offset(e) + j;
    }
    for (int le = 0; le < 3; ++le) {
      const int e = mesh_->triangle_edge(t, le);
      for (int j = 0; j < nf_; ++j) g[p++] = flux_offset(e) + j;
    }
    return g;
  }

  Eigen::VectorXd gather_local(const Eigen::VectorXd& global, int t) const {
    const std::vector<int> g = local_to_global(t);
    Eigen::VectorXd loc(local_dim());
    for (int i = 0; i < local_dim(); ++i) loc[i] = global[g[i]];
    return loc;
  }

  /// Zero out the coefficients eliminated by the constrained subspace.
  void apply_constraints(Eigen::VectorXd& v) const {
    for (int i = 0; i < dim_; ++i)
      if (constrained_[i]) v[i] = 0.0;
  }

  /// Moment quadrature order used by all local operators; generous enough
  /// to be exact for polynomial data of the degrees that occur here.
  int quad_exactness() const { return 2 * k_ + 4; }

 private:
  const TriMesh* mesh_;
  int k_;
  BoundaryConfig bc_;
  std::vector<EdgeClass> classes_;
  int ni_ = 0, nb_ = 0, nf_ = 0;
  int trace_base_ = 0, flux_base_ = 0, dim_ = 0;
  std::vector<bool> constrained_;
  std::vector<int> reduced_index_;
  int reduced_dim_ = 0;
};

/// Primal space M_h: piecewise P_{k-2}, discontinuous, no boundary
/// conditions. Shares the per-element basis with WGSpace::test_basis.
class PrimalSpace {
 public:
  PrimalSpace(const TriMesh& mesh, int k) : mesh_(&mesh), k_(k) {
    if (k < 2)
      throw std::invalid_argument("PrimalSpace: degree k must be >= 2, got " + std::to_string(k));
    per_element_ = TriBasis::dimension(k - 2);
  }

  const TriMesh& mesh() const { return *mesh_; }
  int k() const { return k_; }
  int per_element() const { return per_element_; }
  int dim() const { return per_element_ * mesh_->n_triangles(); }
  int offset(int t) const { return per_element_ * t; }
  TriBasis basis(int t) const {
    return TriBasis(k_ - 2, mesh_->centroid(t), mesh_->diameter(t));
  }

 private:
  const TriMesh* mesh_;
  int k_;
  int per_element_ = 0;
};

/// Moments of the discrete weak operator on element t: row i of the result
/// holds (L_w sigma, w_i)_T for the i-th P_{k-2}(T) test function and the
/// element-local coefficients of sigma, assembled from
///   (sigma_0, L w)_T - <sigma_b, a grad w . n>_dT + <sigma_n, w>_dT
/// with L w = a : Hess w + div(a) . grad w and n the element-outward
/// normal. Flux coefficients are stored against the fixed edge normal, so
/// each edge block picks up the element's orientation sign.
inline Eigen::MatrixXd weak_operator_moments(const WGSpace& sp, const TensorField& a, int t) {
  const TriMesh& m = sp.mesh();
  const TriBasis test = sp.test_basis(t);
  const TriBasis trial = sp.interior_basis(t);
  const EdgeBasis trace = sp.trace_basis();
  const EdgeBasis flux = sp.flux_basis();
  const int ex = sp.quad_exactness();

  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(test.size(), sp.local_dim());

  const auto tri = m.corners(t);
  const MappedRule vq = map_to_triangle(tri_quadrature(ex), tri[0], tri[1], tri[2]);
  for (int p = 0; p < vq.size(); ++p) {
    const Vec2& x = vq.points[p];
    const Eigen::Matrix2d ax = a.value(x);
    const Vec2 da = a.row_divergence(x);
    for (int i = 0; i < test.size(); ++i) {
      const double lw = (ax.array() * test.hessian(i, x).array()).sum() +
                        da.dot(test.gradient(i, x));
      if (lw == 0.0) continue;
      const double w = vq.weights[p] * lw;
      for (int j = 0; j < trial.size(); ++j)
        r(i, sp.local_interior(j)) += w * trial.value(j, x);
    }
  }

  const QuadRule eq = edge_quadrature(ex);
  for (int le = 0; le < 3; ++le) {
    const int e = m.triangle_edge(t, le);
    const Edge& E = m.edge(e);
    const double sgn = m.triangle_edge_sign(t, le);
    const Vec2 n_t = sgn * E.normal;
    const Vec2 &pa = m.vertex(E.v[0]), &pb = m.vertex(E.v[1]);
    for (int p = 0; p < eq.size(); ++p) {
      const double tp = eq.points(p, 0);
      const Vec2 x = pa + tp * (pb - pa);
      const double w = eq.weights[p] * E.length;
      const Eigen::Matrix2d ax = a.value(x);
      for (int i = 0; i < test.size(); ++i) {
        const double conormal = (ax * test.gradient(i, x)).dot(n_t);
        const double wv = test.value(i, x);
        for (int j = 0; j < trace.size(); ++j)
          r(i, sp.local_trace(le, j)) -= w * trace.value(j, tp) * conormal;
        for (int j = 0; j < flux.size(); ++j)
          r(i, sp.local_flux(le, j)) += w * sgn * flux.value(j, tp) * wv;
      }
    }
  }
  return r;
}

/// Coefficients of L_w sigma in the P_{k-2}(T) basis: the moments above hit
/// with the inverse test mass matrix.
inline Eigen::MatrixXd local_weak_operator(const WGSpace& sp, const TensorField& a, int t) {
  const auto tri = sp.mesh().corners(t);
  const Eigen::MatrixXd mass = tri_mass_matrix(sp.test_basis(t), tri[0], tri[1], tri[2]);
  Eigen::LLT<Eigen::MatrixXd> llt(mass);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("local_weak_operator: test mass matrix not positive definite");
  return llt.solve(weak_operator_moments(sp, a, t));
}

/// Element matrix of the stabilizer
///   s_T(lambda, sigma) = h_T^{-1} <lambda_0 - lambda_b, sigma_0 - sigma_b>_dT
///                      + h_T <a grad lambda_0 . n - lambda_n, a grad sigma_0 . n - sigma_n>_dT
/// in the element-local layout (symmetric positive semi-definite).
inline Eigen::MatrixXd local_stabilizer(const WGSpace& sp, const TensorField& a, int t) {
  const TriMesh& m = sp.mesh();
  const TriBasis trial = sp.interior_basis(t);
  const EdgeBasis trace = sp.trace_basis();
  const EdgeBasis flux = sp.flux_basis();
  const double ht = m.diameter(t);
  const int ex = sp.quad_exactness();

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(sp.local_dim(), sp.local_dim());
  Eigen::VectorXd jump0(sp.local_dim());
  Eigen::VectorXd jump1(sp.local_dim());

  const QuadRule eq = edge_quadrature(ex);
  for (int le = 0; le < 3; ++le) {
    const int e = m.triangle_edge(t, le);
    const Edge& E = m.edge(e);
    const double sgn = m.triangle_edge_sign(t, le);
    const Vec2 n_t = sgn * E.normal;
    const Vec2 &pa = m.vertex(E.v[0]), &pb = m.vertex(E.v[1]);
    for (int p = 0; p < eq.size(); ++p) {
      const double tp = eq.points(p, 0);
      const Vec2 x = pa + tp * (pb - pa);
      const double w = eq.weights[p] * E.length;
      const Eigen::Matrix2d ax = a.value(x);

      jump0.setZero();
      jump1.setZero();
      for (int j = 0; j < trial.size(); ++j) {
        jump0[sp.local_interior(j)] = trial.value(j, x);
        jump1[sp.local_interior(j)] = (ax * trial.gradient(j, x)).dot(n_t);
      }
      for (int j = 0; j < trace.size(); ++j)
        jump0[sp.local_trace(le, j)] = -trace.value(j, tp);
      for (int j = 0; j < flux.size(); ++j)
        jump1[sp.local_flux(le, j)] = -sgn * flux.value(j, tp);

      s.noalias() += (w / ht) * jump0 * jump0.transpose();
      s.noalias() += (w * ht) * jump1 * jump1.transpose();
    }
  }
  return s;
}

/// Interpolant Q_h w = {Q_0 w, Q_b w, Q_n(a grad w . n_e)} of a smooth
/// function into the weak space: componentwise L2 projections, with the
/// flux projected against the fixed edge normal.
inline Eigen::VectorXd project_Qh(const WGSpace& sp, const TensorField& a, const ScalarField& w,
                                  const VectorField& grad_w) {
  const TriMesh& m = sp.mesh();
  const int ex = kDataQuadExactness;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(sp.dim());
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto tri = m.corners(t);
    out.segment(sp.interior_offset(t), sp.interior_dim()) =
        project_onto_triangle(w, sp.interior_basis(t), tri[0], tri[1], tri[2], ex);
  }
  const EdgeBasis trace = sp.trace_basis();
  const EdgeBasis flux = sp.flux_basis();
  for (int e = 0; e < m.n_edges(); ++e) {
    const Edge& E = m.edge(e);
    const Vec2 &pa = m.vertex(E.v[0]), &pb = m.vertex(E.v[1]);
    out.segment(sp.trace_offset(e), sp.trace_dim()) = project_onto_edge(w, trace, pa, pb, ex);
    const Vec2 n_e = E.normal;
    const ScalarField conormal = [&](const Vec2& x) { return (a.value(x) * grad_w(x)).dot(n_e); };
    out.segment(sp.flux_offset(e), sp.flux_dim()) = project_onto_edge(conormal, flux, pa, pb, ex);
  }
  return out;
}

/// Elementwise L2 projection onto the primal space.
inline Eigen::VectorXd project_primal(const PrimalSpace& ps, const ScalarField& w) {
  const TriMesh& m = ps.mesh();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ps.dim());
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto tri = m.corners(t);
    out.segment(ps.offset(t), ps.per_element()) =
        project_onto_triangle(w, ps.basis(t), tri[0], tri[1], tri[2], kDataQuadExactness);
  }
  return out;
}

/// L_w sigma for a global coefficient vector, expanded element by element
/// in the primal-space layout.
inline Eigen::VectorXd apply_weak_operator(const WGSpace& sp, const PrimalSpace& ps,
                                           const TensorField& a, const Eigen::VectorXd& sigma) {
  Eigen::VectorXd out(ps.dim());
  for (int t = 0; t < sp.mesh().n_triangles(); ++t)
    out.segment(ps.offset(t), ps.per_element()) =
        local_weak_operator(sp, a, t) * sp.gather_local(sigma, t);
  return out;
}

namespace detail {

/// Trace and flux mismatches of a weak function at one boundary point of
/// element t: jump0 = sigma_0 - sigma_b and jump1 = a grad sigma_0 . n
/// - sigma_n against the element-outward normal.
struct WeakJumps {
  double jump0 = 0.0;
  double jump1 = 0.0;
};

inline WeakJumps weak_jumps(const WGSpace& sp, const TriBasis& trial, const EdgeBasis& trace,
                            const EdgeBasis& flux, const Eigen::Matrix2d& ax,
                            const Eigen::VectorXd& coeffs, int t, int e, double sgn,
                            const Vec2& n_t, double tp, const Vec2& x) {
  WeakJumps j;
  for (int i = 0; i < trial.size(); ++i) {
    const double c = coeffs[sp.interior_offset(t) + i];
    j.jump0 += c * trial.value(i, x);
    j.jump1 += c * (ax * trial.gradient(i, x)).dot(n_t);
  }
  for (int i = 0; i < trace.size(); ++i)
    j.jump0 -= coeffs[sp.trace_offset(e) + i] * trace.value(i, tp);
  for (int i = 0; i < flux.size(); ++i)
    j.jump1 -= sgn * coeffs[sp.flux_offset(e) + i] * flux.value(i, tp);
  return j;
}

}  // namespace detail

/// Global stabilizer form s(lambda, sigma). Evaluated from the pointwise
/// jumps rather than the assembled element matrices: the two agree exactly
/// in real arithmetic, but the factored form keeps s(sigma, sigma) at the
/// square of the jump round-off when the jumps cancel, instead of at the
/// round-off of the O(1) matrix entries.
inline double stabilizer_form(const WGSpace& sp, const TensorField& a,
                              const Eigen::VectorXd& lambda, const Eigen::VectorXd& sigma) {
  const TriMesh& m = sp.mesh();
  const EdgeBasis trace = sp.trace_basis();
  const EdgeBasis flux = sp.flux_basis();
  const QuadRule eq = edge_quadrature(sp.quad_exactness());
  double acc = 0.0;
  for (int t = 0; t < m.n_triangles(); ++t) {
    const TriBasis trial = sp.interior_basis(t);
    const double ht = m.diameter(t);
    for (int le = 0; le < 3; ++le) {
      const int e = m.triangle_edge(t, le);
      const Edge& E = m.edge(e);
      const double sgn = m.triangle_edge_sign(t, le);
      const Vec2 n_t = sgn * E.normal;
      const Vec2 &pa = m.vertex(E.v[0]), &pb = m.vertex(E.v[1]);
      for (int p = 0; p < eq.size(); ++p) {
        const double tp = eq.points(p, 0);
        const Vec2 x = pa + tp * (pb - pa);
        const double w = eq.weights[p] * E.length;
        const Eigen::Matrix2d ax = a.value(x);
        const detail::WeakJumps l =
            detail::weak_jumps(sp, trial, trace, flux, ax, lambda, t, e, sgn, n_t, tp, x);
        const detail::WeakJumps s =
            detail::weak_jumps(sp, trial, trace, flux, ax, sigma, t, e, sgn, n_t, tp, x);
        acc += w * (l.jump0 * s.jump0 / ht + ht * l.jump1 * s.jump1);
      }
    }
  }
  return acc;
}

/// Coupling form b(v, sigma) = sum_T (L_w sigma, v)_T for v in the primal
/// space and sigma in the weak space.
inline double coupling_form(const WGSpace& sp, const PrimalSpace& ps, const TensorField& a,
                            const Eigen::VectorXd& v, const Eigen::VectorXd& sigma) {
  double acc = 0.0;
  for (int t = 0; t < sp.mesh().n_triangles(); ++t) {
    const Eigen::VectorXd moments = weak_operator_moments(sp, a, t) * sp.gather_local(sigma, t);
    acc += v.segment(ps.offset(t), ps.per_element()).dot(moments);
  }
  return acc;
}

}  // namespace pdwg
