#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdwg/mesh.hpp"

namespace pdwg {

namespace detail {
inline double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}
}  // namespace detail

/// Scaled monomials ((x - xc)/h)^p ((y - yc)/h)^q of total degree <= k,
/// ordered degree by degree with the y-power increasing within a degree:
/// 1, X, Y, X^2, XY, Y^2, ... Centering at the element centroid and scaling
/// by h_T keeps the local mass matrices uniformly conditioned under
/// refinement.
class TriBasis {
 public:
  TriBasis(int degree, const Vec2& center, double scale)
      : degree_(degree), center_(center), scale_(scale) {
    if (degree < 0) throw std::invalid_argument("TriBasis: negative degree");
    if (scale <= 0) throw std::invalid_argument("TriBasis: non-positive scale");
    powers_.reserve(dimension(degree));
    for (int d = 0; d <= degree; ++d)
      for (int q = 0; q <= d; ++q) powers_.push_back({d - q, q});
  }

  static int dimension(int degree) { return (degree + 1) * (degree + 2) / 2; }

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(powers_.size()); }
  const std::array<int, 2>& powers(int i) const { return powers_[i]; }

  double value(int i, const Vec2& x) const {
    const auto [p, q] = powers_[i];
    return detail::ipow(X(x), p) * detail::ipow(Y(x), q);
  }

  Vec2 gradient(int i, const Vec2& x) const {
    const auto [p, q] = powers_[i];
    const double gx = p == 0 ? 0.0 : p * detail::ipow(X(x), p - 1) * detail::ipow(Y(x), q) / scale_;
    const double gy = q == 0 ? 0.0 : q * detail::ipow(X(x), p) * detail::ipow(Y(x), q - 1) / scale_;
    return {gx, gy};
  }

  Eigen::Matrix2d hessian(int i, const Vec2& x) const {
    const auto [p, q] = powers_[i];
    const double s2 = scale_ * scale_;
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    if (p >= 2) h(0, 0) = p * (p - 1) * detail::ipow(X(x), p - 2) * detail::ipow(Y(x), q) / s2;
    if (q >= 2) h(1, 1) = q * (q - 1) * detail::ipow(X(x), p) * detail::ipow(Y(x), q - 2) / s2;
    if (p >= 1 && q >= 1) {
      h(0, 1) = p * q * detail::ipow(X(x), p - 1) * detail::ipow(Y(x), q - 1) / s2;
      h(1, 0) = h(0, 1);
    }
    return h;
  }

  Eigen::VectorXd values(const Vec2& x) const {
    Eigen::VectorXd v(size());
    for (int i = 0; i < size(); ++i) v[i] = value(i, x);
    return v;
  }

 private:
  double X(const Vec2& x) const { return (x.x() - center_.x()) / scale_; }
  double Y(const Vec2& x) const { return (x.y() - center_.y()) / scale_; }

  int degree_;
  Vec2 center_;
  double scale_;
  std::vector<std::array<int, 2>> powers_;
};

/// Monomials (t - 1/2)^j in the edge parameter t in [0,1]; every edge is
/// parameterized from its lower-numbered to its higher-numbered vertex, so
/// the coefficients of an edge unknown are single-valued.
class EdgeBasis {
 public:
  explicit EdgeBasis(int degree) : degree_(degree) {
    if (degree < 0) throw std::invalid_argument("EdgeBasis: negative degree");
  }
  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }
  double value(int j, double t) const { return detail::ipow(t - 0.5, j); }
  Eigen::VectorXd values(double t) const {
    Eigen::VectorXd v(size());
    for (int j = 0; j < size(); ++j) v[j] = value(j, t);
    return v;
  }

 private:
  int degree_;
};

}  // namespace pdwg
