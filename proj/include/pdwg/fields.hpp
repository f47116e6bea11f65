#pragma once

#include <functional>

#include <Eigen/Dense>

#include "pdwg/mesh.hpp"

namespace pdwg {

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

/// Flux-type boundary datum: value at x with respect to the supplied unit
/// normal (the assembly always passes the domain-outward normal).
using FluxField = std::function<double(const Vec2&, const Vec2&)>;

/// Symmetric uniformly positive definite diffusion tensor a(x), together
/// with its row-wise divergence (d/dx a00 + d/dy a01, d/dx a10 + d/dy a11),
/// which the strong operator L w = div(a grad w) = div(a) . grad w + a : Hess w
/// needs pointwise.
struct TensorField {
  std::function<Eigen::Matrix2d(const Vec2&)> value;
  VectorField row_divergence;
  bool is_constant = false;

  static TensorField identity() {
    TensorField a;
    a.value = [](const Vec2&) { return Eigen::Matrix2d::Identity(); };
    a.row_divergence = [](const Vec2&) { return Vec2::Zero().eval(); };
    a.is_constant = true;
    return a;
  }
};

}  // namespace pdwg
