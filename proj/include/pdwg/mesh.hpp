#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace pdwg {

using Vec2 = Eigen::Vector2d;

/// Sides of the unit square boundary.
enum class Side : int { bottom = 0, right = 1, top = 2, left = 3 };

inline const char* side_name(Side s) {
  switch (s) {
    case Side::bottom: return "bottom";
    case Side::right: return "right";
    case Side::top: return "top";
    case Side::left: return "left";
  }
  return "?";
}

/// Subset of the four square sides, stored as a bitmask.
class SideSet {
 public:
  SideSet() = default;
  SideSet(std::initializer_list<Side> sides) {
    for (Side s : sides) insert(s);
  }
  void insert(Side s) { bits_ |= mask(s); }
  bool contains(Side s) const { return (bits_ & mask(s)) != 0; }
  bool empty() const { return bits_ == 0; }
  int count() const {
    int c = 0;
    for (int i = 0; i < 4; ++i) c += (bits_ >> i) & 1u;
    return c;
  }
  bool operator==(const SideSet&) const = default;

 private:
  static unsigned mask(Side s) { return 1u << static_cast<int>(s); }
  unsigned bits_ = 0;
};

/// Which square sides carry the over-specified Dirichlet (g1) and Neumann
/// (g2) data. The two sets may overlap, and their union need not cover the
/// whole boundary; that is the point of the formulation.
struct BoundaryConfig {
  SideSet dirichlet;
  SideSet neumann;
};

struct Edge {
  std::array<int, 2> v{-1, -1};    ///< endpoint vertex ids, v[0] < v[1]
  std::array<int, 2> tri{-1, -1};  ///< adjacent triangles; tri[1] = -1 on the boundary
  Vec2 normal = Vec2::Zero();      ///< unit normal, outward w.r.t. tri[0]
  double length = 0.0;
  int side = -1;                   ///< Side index for boundary edges, -1 inside
  bool on_boundary() const { return tri[1] < 0; }
};

/// Conforming triangulation of the unit square built from the two-triangle
/// coarse mesh by uniform midpoint refinement. Triangles are stored
/// counter-clockwise; every edge carries a fixed unit normal (outward with
/// respect to its lower-numbered neighbour) so that edge-based unknowns are
/// single-valued and each element sees the shared normal up to the sign
/// reported by triangle_edge_sign().
class TriMesh {
 public:
  /// Two CCW triangles split along the (0,0)-(1,1) diagonal:
  ///
  ///   (0,1) +-----+ (1,1)
  ///         |    /|
  ///         | T1/ |
  ///         |  /  |
  ///         | /T0 |
  ///   (0,0) +-----+ (1,0)
  static TriMesh coarse_unit_square() {
    std::vector<Vec2> v = {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    std::vector<std::array<int, 3>> t = {{0, 1, 2}, {0, 2, 3}};
    return TriMesh(std::move(v), std::move(t), 0);
  }

  /// One sweep of midpoint refinement: each triangle becomes four similar
  /// children, so boundary edges stay on their parent's square side.
  TriMesh refined() const {
    std::vector<Vec2> verts = vertices_;
    std::vector<int> mid(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      mid[e] = static_cast<int>(verts.size());
      verts.push_back(0.5 * (vertices_[edges_[e].v[0]] + vertices_[edges_[e].v[1]]));
    }
    std::vector<std::array<int, 3>> tris;
    tris.reserve(4 * triangles_.size());
    for (int t = 0; t < n_triangles(); ++t) {
      const auto& [a, b, c] = triangles_[t];
      const int m0 = mid[tri_edges_[t][0]];  // midpoint of (a,b)
      const int m1 = mid[tri_edges_[t][1]];  // midpoint of (b,c)
      const int m2 = mid[tri_edges_[t][2]];  // midpoint of (c,a)
      tris.push_back({a, m0, m2});
      tris.push_back({m0, b, m1});
      tris.push_back({m2, m1, c});
      tris.push_back({m0, m1, m2});
    }
    return TriMesh(std::move(verts), std::move(tris), level_ + 1);
  }

  /// Mesh with n = 1/h elements per side; n must be a power of two.
  static TriMesh with_inv_h(int n) {
    if (n < 1 || (n & (n - 1)) != 0)
      throw std::invalid_argument("TriMesh::with_inv_h: 1/h must be a power of two, got " +
                                  std::to_string(n));
    TriMesh m = coarse_unit_square();
    while (m.inv_h() < n) m = m.refined();
    return m;
  }

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_triangles() const { return static_cast<int>(triangles_.size()); }
  int n_edges() const { return static_cast<int>(edges_.size()); }
  int level() const { return level_; }
  int inv_h() const { return 1 << level_; }
  double mesh_size() const { return 1.0 / inv_h(); }

  const Vec2& vertex(int i) const { return vertices_[i]; }
  const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }
  const Edge& edge(int e) const { return edges_[e]; }

  /// Global edge id of local edge i of triangle t; local edge i joins
  /// vertices i and (i+1) mod 3.
  int triangle_edge(int t, int i) const { return tri_edges_[t][i]; }

  /// +1 if the stored edge normal is outward for triangle t, else -1.
  double triangle_edge_sign(int t, int i) const { return tri_edge_signs_[t][i]; }

  double area(int t) const { return areas_[t]; }
  const Vec2& centroid(int t) const { return centroids_[t]; }
  /// Element size h_T (longest edge).
  double diameter(int t) const { return diameters_[t]; }

  std::array<Vec2, 3> corners(int t) const {
    return {vertices_[triangles_[t][0]], vertices_[triangles_[t][1]],
            vertices_[triangles_[t][2]]};
  }

  /// Plain-text dump of the full mesh topology (vertices, triangles, edges
  /// with adjacency, side tags and normals), for debugging and golden tests.
  void dump(std::ostream& os) const {
    os << "mesh level=" << level_ << " 1/h=" << inv_h() << " vertices=" << n_vertices()
       << " triangles=" << n_triangles() << " edges=" << n_edges() << "\n";
    os << "# vertices: id x y\n";
    for (int i = 0; i < n_vertices(); ++i)
      os << i << " " << vertices_[i].x() << " " << vertices_[i].y() << "\n";
    os << "# triangles: id v0 v1 v2\n";
    for (int t = 0; t < n_triangles(); ++t)
      os << t << " " << triangles_[t][0] << " " << triangles_[t][1] << " "
         << triangles_[t][2] << "\n";
    os << "# edges: id v0 v1 tri0 tri1 side nx ny\n";
    for (int e = 0; e < n_edges(); ++e) {
      const Edge& E = edges_[e];
      os << e << " " << E.v[0] << " " << E.v[1] << " " << E.tri[0] << " " << E.tri[1]
         << " " << (E.side < 0 ? "-" : side_name(static_cast<Side>(E.side))) << " "
         << E.normal.x() << " " << E.normal.y() << "\n";
    }
  }

 private:
  TriMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles, int level)
      : vertices_(std::move(vertices)), triangles_(std::move(triangles)), level_(level) {
    build_topology();
  }

  void build_topology() {
    const int nt = n_triangles();
    areas_.resize(nt);
    centroids_.resize(nt);
    diameters_.resize(nt);
    tri_edges_.resize(nt);
    tri_edge_signs_.resize(nt);

    std::map<std::pair<int, int>, int> edge_of;
    for (int t = 0; t < nt; ++t) {
      const auto& tri = triangles_[t];
      const Vec2 &A = vertices_[tri[0]], &B = vertices_[tri[1]], &C = vertices_[tri[2]];
      const double twice = (B.x() - A.x()) * (C.y() - A.y()) - (B.y() - A.y()) * (C.x() - A.x());
      if (twice <= 0.0)
        throw std::runtime_error("TriMesh: triangle " + std::to_string(t) +
                                 " is degenerate or not counter-clockwise");
      areas_[t] = 0.5 * twice;
      centroids_[t] = (A + B + C) / 3.0;

      for (int i = 0; i < 3; ++i) {
        const int a = tri[i], b = tri[(i + 1) % 3];
        const auto key = std::minmax(a, b);
        auto it = edge_of.find(key);
        if (it == edge_of.end()) {
          Edge E;
          E.v = {key.first, key.second};
          E.tri[0] = t;
          const Vec2 d = vertices_[b] - vertices_[a];
          E.length = d.norm();
          E.normal = Vec2(d.y(), -d.x()) / E.length;  // outward for a CCW triangle
          const int id = static_cast<int>(edges_.size());
          edges_.push_back(E);
          edge_of.emplace(key, id);
          tri_edges_[t][i] = id;
          tri_edge_signs_[t][i] = 1.0;
        } else {
          Edge& E = edges_[it->second];
          if (E.tri[1] >= 0)
            throw std::runtime_error("TriMesh: edge shared by more than two triangles");
          E.tri[1] = t;
          tri_edges_[t][i] = it->second;
          tri_edge_signs_[t][i] = -1.0;
        }
      }
      diameters_[t] = std::max({(B - A).norm(), (C - B).norm(), (A - C).norm()});
    }

    // Boundary side tags. All vertex coordinates are dyadic rationals, so
    // the comparisons below are exact.
    for (Edge& E : edges_) {
      if (!E.on_boundary()) continue;
      const Vec2 &P = vertices_[E.v[0]], &Q = vertices_[E.v[1]];
      if (P.y() == 0.0 && Q.y() == 0.0)
        E.side = static_cast<int>(Side::bottom);
      else if (P.x() == 1.0 && Q.x() == 1.0)
        E.side = static_cast<int>(Side::right);
      else if (P.y() == 1.0 && Q.y() == 1.0)
        E.side = static_cast<int>(Side::top);
      else if (P.x() == 0.0 && Q.x() == 0.0)
        E.side = static_cast<int>(Side::left);
      else
        throw std::runtime_error("TriMesh: boundary edge not on any side of the unit square");
    }
  }

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<std::array<double, 3>> tri_edge_signs_;
  std::vector<double> areas_;
  std::vector<Vec2> centroids_;
  std::vector<double> diameters_;
  int level_ = 0;
};

/// Membership of each edge in the data segments Gamma_D / Gamma_N and their
/// boundary complements. Interior edges belong to none of them.
struct EdgeClass {
  bool boundary = false;
  bool gamma_d = false;
  bool gamma_n = false;
  bool gamma_dc = false;  ///< boundary minus Gamma_D
  bool gamma_nc = false;  ///< boundary minus Gamma_N
};

inline std::vector<EdgeClass> classify_edges(const TriMesh& mesh, const BoundaryConfig& bc) {
  std::vector<EdgeClass> cls(mesh.n_edges());
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Edge& E = mesh.edge(e);
    if (!E.on_boundary()) continue;
    if (E.side < 0 || E.side > 3)
      throw std::runtime_error("classify_edges: boundary edge without a side tag");
    const Side s = static_cast<Side>(E.side);
    EdgeClass& c = cls[e];
    c.boundary = true;
    c.gamma_d = bc.dirichlet.contains(s);
    c.gamma_n = bc.neumann.contains(s);
    c.gamma_dc = !c.gamma_d;
    c.gamma_nc = !c.gamma_n;
  }
  return cls;
}

}  // namespace pdwg
