#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdwg/assembly.hpp"
#include "pdwg/fields.hpp"
#include "pdwg/mesh.hpp"

namespace pdwg {

/// Which pass/fail bands a case's convergence history is held to.
enum class CheckKind {
  machine_accuracy,  ///< exact solution in the discrete space; errors at round-off
  mixed_bands,       ///< well-posed mixed data; full first/second order bands
  cauchy_bands,      ///< over-specified data; bands on the finest-level rates
  primal_only_bands  ///< only the primal error is band-checked
};

/// A manufactured solution together with its diffusion tensor, source,
/// boundary-data segments and the refinement levels of its bundled run.
struct ManufacturedCase {
  std::string name;
  std::string description;
  std::string group;  ///< configuration family used to group suite outputs
  CheckKind kind = CheckKind::cauchy_bands;
  ScalarField u;
  VectorField grad_u;
  TensorField a;
  ScalarField f;
  BoundaryConfig bc;
  std::vector<int> levels;
};

/// The non-constant diffusion tensor used by the variable-coefficient runs.
inline TensorField variable_tensor() {
  TensorField a;
  a.value = [](const Vec2& p) {
    const double x = p.x(), y = p.y();
    Eigen::Matrix2d m;
    m << 1.0 + x * x, 0.25 * x * y, 0.25 * x * y, 1.0 + y * y;
    return m;
  };
  a.row_divergence = [](const Vec2& p) { return Vec2(2.25 * p.x(), 2.25 * p.y()); };
  a.is_constant = false;
  return a;
}

namespace detail {

inline ManufacturedCase make_case(std::string name, std::string group, CheckKind kind,
                                  std::string solution, bool variable_a, BoundaryConfig bc,
                                  std::vector<int> levels) {
  using std::numbers::pi;
  ManufacturedCase c;
  c.name = std::move(name);
  c.group = std::move(group);
  c.kind = kind;
  c.bc = bc;
  c.levels = std::move(levels);
  c.a = variable_a ? variable_tensor() : TensorField::identity();

  const auto side_list = [](const SideSet& s) {
    std::string out;
    for (Side sd : {Side::bottom, Side::right, Side::top, Side::left})
      if (s.contains(sd)) {
        if (!out.empty()) out += "/";
        out += side_name(sd);
      }
    return out.empty() ? std::string("none") : out;
  };

  if (solution == "one") {
    c.u = [](const Vec2&) { return 1.0; };
    c.grad_u = [](const Vec2&) { return Vec2::Zero().eval(); };
    c.f = [](const Vec2&) { return 0.0; };
    c.description = "u = 1";
  } else if (solution == "sin_sin") {
    c.u = [](const Vec2& p) { return std::sin(p.x()) * std::sin(p.y()); };
    c.grad_u = [](const Vec2& p) {
      return Vec2(std::cos(p.x()) * std::sin(p.y()), std::sin(p.x()) * std::cos(p.y()));
    };
    if (variable_a)
      c.f = [](const Vec2& p) {
        const double x = p.x(), y = p.y();
        const double sx = std::sin(x), cx = std::cos(x), sy = std::sin(y), cy = std::cos(y);
        return (2.0 + x * x + y * y) * sx * sy - 0.5 * x * y * cx * cy -
               2.25 * x * cx * sy - 2.25 * y * sx * cy;
      };
    else
      c.f = [](const Vec2& p) { return 2.0 * std::sin(p.x()) * std::sin(p.y()); };
    c.description = "u = sin(x) sin(y)";
  } else if (solution == "cos_cos") {
    c.u = [](const Vec2& p) { return std::cos(p.x()) * std::cos(p.y()); };
    c.grad_u = [](const Vec2& p) {
      return Vec2(-std::sin(p.x()) * std::cos(p.y()), -std::cos(p.x()) * std::sin(p.y()));
    };
    c.f = [](const Vec2& p) { return 2.0 * std::cos(p.x()) * std::cos(p.y()); };
    c.description = "u = cos(x) cos(y)";
  } else if (solution == "sin_cos") {
    c.u = [](const Vec2& p) { return std::sin(p.x()) * std::cos(p.y()); };
    c.grad_u = [](const Vec2& p) {
      return Vec2(std::cos(p.x()) * std::cos(p.y()), -std::sin(p.x()) * std::sin(p.y()));
    };
    if (variable_a)
      c.f = [](const Vec2& p) {
        const double x = p.x(), y = p.y();
        const double sx = std::sin(x), cx = std::cos(x), sy = std::sin(y), cy = std::cos(y);
        return (2.0 + x * x + y * y) * sx * cy + 0.5 * x * y * cx * sy -
               2.25 * x * cx * cy + 2.25 * y * sx * sy;
      };
    else
      c.f = [](const Vec2& p) { return 2.0 * std::sin(p.x()) * std::cos(p.y()); };
    c.description = "u = sin(x) cos(y)";
  } else if (solution == "sinpi_sinpi") {
    c.u = [=](const Vec2& p) { return std::sin(pi * p.x()) * std::sin(pi * p.y()); };
    c.grad_u = [=](const Vec2& p) {
      return Vec2(pi * std::cos(pi * p.x()) * std::sin(pi * p.y()),
                  pi * std::sin(pi * p.x()) * std::cos(pi * p.y()));
    };
    if (variable_a)
      c.f = [=](const Vec2& p) {
        const double x = p.x(), y = p.y();
        const double sx = std::sin(pi * x), cx = std::cos(pi * x);
        const double sy = std::sin(pi * y), cy = std::cos(pi * y);
        return pi * pi * (2.0 + x * x + y * y) * sx * sy -
               0.5 * pi * pi * x * y * cx * cy - 2.25 * pi * x * cx * sy -
               2.25 * pi * y * sx * cy;
      };
    else
      c.f = [=](const Vec2& p) {
        return 2.0 * pi * pi * std::sin(pi * p.x()) * std::sin(pi * p.y());
      };
    c.description = "u = sin(pi x) sin(pi y)";
  } else if (solution == "sinpi_cospi") {
    c.u = [=](const Vec2& p) { return std::sin(pi * p.x()) * std::cos(pi * p.y()); };
    c.grad_u = [=](const Vec2& p) {
      return Vec2(pi * std::cos(pi * p.x()) * std::cos(pi * p.y()),
                  -pi * std::sin(pi * p.x()) * std::sin(pi * p.y()));
    };
    if (variable_a)
      c.f = [=](const Vec2& p) {
        const double x = p.x(), y = p.y();
        const double sx = std::sin(pi * x), cx = std::cos(pi * x);
        const double sy = std::sin(pi * y), cy = std::cos(pi * y);
        return pi * pi * (2.0 + x * x + y * y) * sx * cy +
               0.5 * pi * pi * x * y * cx * sy - 2.25 * pi * x * cx * cy +
               2.25 * pi * y * sx * sy;
      };
    else
      c.f = [=](const Vec2& p) {
        return 2.0 * pi * pi * std::sin(pi * p.x()) * std::cos(pi * p.y());
      };
    c.description = "u = sin(pi x) cos(pi y)";
  } else if (solution == "bubble") {
    c.u = [](const Vec2& p) {
      return p.x() * p.y() * (1.0 - p.x()) * (1.0 - p.y());
    };
    c.grad_u = [](const Vec2& p) {
      const double x = p.x(), y = p.y();
      return Vec2((1.0 - 2.0 * x) * (y - y * y), (x - x * x) * (1.0 - 2.0 * y));
    };
    if (variable_a)
      c.f = [](const Vec2& p) {
        const double x = p.x(), y = p.y();
        const double X = x - x * x, Y = y - y * y;
        return 2.0 * (1.0 + x * x) * Y + 2.0 * (1.0 + y * y) * X -
               0.5 * x * y * (1.0 - 2.0 * x) * (1.0 - 2.0 * y) -
               2.25 * x * (1.0 - 2.0 * x) * Y - 2.25 * y * (1.0 - 2.0 * y) * X;
      };
    else
      c.f = [](const Vec2& p) {
        const double x = p.x(), y = p.y();
        return 2.0 * (x - x * x + y - y * y);
      };
    c.description = "u = x y (1-x) (1-y)";
  } else if (solution == "exp") {
    c.u = [](const Vec2& p) { return std::exp(p.x() * p.y()); };
    c.grad_u = [](const Vec2& p) {
      const double e = std::exp(p.x() * p.y());
      return Vec2(p.y() * e, p.x() * e);
    };
    if (variable_a)
      c.f = [](const Vec2& p) {
        const double x = p.x(), y = p.y();
        const double e = std::exp(x * y);
        return -e * ((1.0 + x * x) * y * y + 0.5 * x * y * (1.0 + x * y) +
                     (1.0 + y * y) * x * x + 4.5 * x * y);
      };
    else
      c.f = [](const Vec2& p) {
        return -(p.x() * p.x() + p.y() * p.y()) * std::exp(p.x() * p.y());
      };
    c.description = "u = exp(x y)";
  } else {
    throw std::invalid_argument("make_case: unknown solution tag " + solution);
  }

  c.description += variable_a ? ", a = [1+x^2, xy/4; xy/4, 1+y^2]" : ", a = I";
  c.description += ", Dirichlet data on " + side_list(bc.dirichlet) + ", Neumann data on " +
                   side_list(bc.neumann);
  return c;
}

}  // namespace detail

/// All bundled convergence experiments, grouped by boundary-configuration
/// family: `mixed` separates the data, `cauchy` over-specifies part of the
/// boundary and leaves the rest without any condition.
inline const std::vector<ManufacturedCase>& catalog() {
  static const std::vector<ManufacturedCase> cases = [] {
    using enum Side;
    const BoundaryConfig cauchy_bottom{{bottom}, {bottom}};
    const BoundaryConfig cauchy_left{{left}, {left}};
    const BoundaryConfig mixed{{bottom, top}, {left, right}};
    const BoundaryConfig cauchy_dleft{{bottom, top, left}, {bottom, top}};
    const BoundaryConfig cauchy_tb{{bottom, top}, {bottom, top}};
    const BoundaryConfig cauchy_nleft{{bottom, top}, {bottom, top, left}};
    const BoundaryConfig cauchy_split{{bottom, top, left}, {bottom, top, right}};
    const std::vector<int> all{1, 2, 4, 8, 16, 32};
    const std::vector<int> from2{2, 4, 8, 16, 32};

    std::vector<ManufacturedCase> v;
    v.push_back(detail::make_case("constant_one", "exactness", CheckKind::machine_accuracy,
                                  "one", false, cauchy_bottom, all));
    v.push_back(detail::make_case("constant_one_left", "exactness",
                                  CheckKind::machine_accuracy, "one", false, cauchy_left, all));
    v.push_back(detail::make_case("sin_sin_varcoef", "mixed_varcoef", CheckKind::mixed_bands,
                                  "sin_sin", true, mixed, from2));
    v.push_back(detail::make_case("sinpi_cospi_varcoef", "mixed_varcoef",
                                  CheckKind::mixed_bands, "sinpi_cospi", true, mixed, all));
    v.push_back(detail::make_case("bubble_varcoef", "mixed_varcoef", CheckKind::mixed_bands,
                                  "bubble", true, mixed, all));
    v.push_back(detail::make_case("exp_varcoef", "mixed_varcoef", CheckKind::mixed_bands,
                                  "exp", true, mixed, from2));
    v.push_back(detail::make_case("sin_sin_cauchy", "cauchy_dleft", CheckKind::cauchy_bands,
                                  "sin_sin", false, cauchy_dleft, all));
    v.push_back(detail::make_case("cos_cos_cauchy", "cauchy_dleft", CheckKind::cauchy_bands,
                                  "cos_cos", false, cauchy_dleft, from2));
    v.push_back(detail::make_case("bubble_cauchy", "cauchy_dleft", CheckKind::cauchy_bands,
                                  "bubble", false, cauchy_dleft, all));
    v.push_back(detail::make_case("exp_cauchy", "cauchy_dleft", CheckKind::cauchy_bands,
                                  "exp", false, cauchy_dleft, all));
    v.push_back(detail::make_case("sinpi_sinpi_topbot", "cauchy_topbot",
                                  CheckKind::cauchy_bands, "sinpi_sinpi", false, cauchy_tb,
                                  all));
    v.push_back(detail::make_case("bubble_topbot", "cauchy_topbot", CheckKind::cauchy_bands,
                                  "bubble", false, cauchy_tb, from2));
    v.push_back(detail::make_case("exp_varcoef_topbot", "cauchy_topbot_varcoef",
                                  CheckKind::cauchy_bands, "exp", true, cauchy_tb, from2));
    v.push_back(detail::make_case("sin_cos_varcoef_nleft", "cauchy_nleft_varcoef",
                                  CheckKind::cauchy_bands, "sin_cos", true, cauchy_nleft, all));
    v.push_back(detail::make_case("exp_varcoef_nleft", "cauchy_nleft_varcoef",
                                  CheckKind::cauchy_bands, "exp", true, cauchy_nleft, all));
    v.push_back(detail::make_case("sin_cos_suite", "cauchy_split_varcoef",
                                  CheckKind::primal_only_bands, "sin_cos", true, cauchy_split,
                                  from2));
    v.push_back(detail::make_case("sinpi_sinpi_suite", "cauchy_split_varcoef",
                                  CheckKind::primal_only_bands, "sinpi_sinpi", true,
                                  cauchy_split, from2));
    v.push_back(detail::make_case("sin_sin_suite", "cauchy_split_varcoef",
                                  CheckKind::primal_only_bands, "sin_sin", true, cauchy_split,
                                  from2));
    v.push_back(detail::make_case("exp_suite", "cauchy_split_varcoef",
                                  CheckKind::primal_only_bands, "exp", true, cauchy_split,
                                  from2));
    return v;
  }();
  return cases;
}

inline const ManufacturedCase& get_case(const std::string& name) {
  for (const ManufacturedCase& c : catalog())
    if (c.name == name) return c;
  std::ostringstream os;
  os << "unknown case '" << name << "'; available:";
  for (const ManufacturedCase& c : catalog()) os << " " << c.name;
  throw std::invalid_argument(os.str());
}

/// Boundary data derived from the exact solution; the Neumann datum is the
/// conormal flux with respect to whatever outward normal the assembly
/// hands in.
inline LoadData make_load(const ManufacturedCase& c) {
  LoadData load;
  load.f = c.f;
  load.g1 = c.u;
  load.g2 = [a = c.a, grad = c.grad_u](const Vec2& x, const Vec2& n) {
    return (a.value(x) * grad(x)).dot(n);
  };
  return load;
}

/// Finite-difference self-check of a case: the stated gradient must match
/// the difference quotients of u, the stated source must satisfy
/// f = -div(a grad u), the tensor must be symmetric positive definite and
/// its stated row divergence consistent. Returns the largest deviation.
inline double validate_case(const ManufacturedCase& c, int samples = 40,
                            unsigned seed = 0x5eed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> coord(0.05, 0.95);
  const double h = 1e-5;
  double worst = 0.0;
  const auto track = [&worst](double dev) { worst = std::max(worst, std::abs(dev)); };

  for (int s = 0; s < samples; ++s) {
    const Vec2 x(coord(rng), coord(rng));
    const Vec2 ex(1.0, 0.0), ey(0.0, 1.0);

    const Vec2 g = c.grad_u(x);
    track((c.u(x + h * ex) - c.u(x - h * ex)) / (2 * h) - g.x());
    track((c.u(x + h * ey) - c.u(x - h * ey)) / (2 * h) - g.y());

    const Eigen::Matrix2d ax = c.a.value(x);
    track(ax(0, 1) - ax(1, 0));
    if (ax(0, 0) <= 0.0 || ax.determinant() <= 0.0)
      throw std::runtime_error("validate_case: tensor not positive definite at a sample");

    const Vec2 da = c.a.row_divergence(x);
    track((c.a.value(x + h * ex)(0, 0) - c.a.value(x - h * ex)(0, 0)) / (2 * h) +
          (c.a.value(x + h * ey)(0, 1) - c.a.value(x - h * ey)(0, 1)) / (2 * h) - da.x());
    track((c.a.value(x + h * ex)(1, 0) - c.a.value(x - h * ex)(1, 0)) / (2 * h) +
          (c.a.value(x + h * ey)(1, 1) - c.a.value(x - h * ey)(1, 1)) / (2 * h) - da.y());

    const auto flux = [&](const Vec2& p) { return (c.a.value(p) * c.grad_u(p)).eval(); };
    const double div_flux = (flux(x + h * ex).x() - flux(x - h * ex).x()) / (2 * h) +
                            (flux(x + h * ey).y() - flux(x - h * ey).y()) / (2 * h);
    track(div_flux + c.f(x));
  }
  return worst;
}

}  // namespace pdwg
