#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pdwg/assembly.hpp"
#include "pdwg/norms.hpp"
#include "pdwg/problems.hpp"
#include "support/oracles.hpp"

using namespace pdwg;

namespace {

LoadData zero_load() {
  LoadData load;
  load.f = [](const Vec2&) { return 0.0; };
  return load;
}

}  // namespace

TEST_CASE("saddle system has the expected block structure") {
  const TriMesh mesh = TriMesh::with_inv_h(2);
  const ManufacturedCase& c = get_case("bubble_varcoef");
  const WGSpace sp(mesh, 2, c.bc);
  const PrimalSpace ps(mesh, 2);
  const SaddleSystem sys = assemble(sp, ps, c.a, make_load(c));

  CHECK(sys.n_lambda == sp.reduced_dim());
  CHECK(sys.n_u == ps.dim());
  CHECK(sys.matrix.rows() == sys.n_lambda + sys.n_u);
  CHECK(sys.warnings.empty());

  const Eigen::MatrixXd dense(sys.matrix);
  CHECK((dense - dense.transpose()).lpNorm<Eigen::Infinity>() < 1e-13);
  // The primal-primal block is identically zero.
  CHECK(dense.bottomRightCorner(sys.n_u, sys.n_u).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("assembly rejects mismatched spaces") {
  const TriMesh m1 = TriMesh::with_inv_h(1);
  const TriMesh m2 = TriMesh::with_inv_h(2);
  const BoundaryConfig bc{{Side::bottom}, {Side::bottom}};
  const TensorField a = TensorField::identity();
  CHECK_THROWS_AS(assemble(WGSpace(m1, 2, bc), PrimalSpace(m2, 2), a, zero_load()),
                  std::invalid_argument);
  CHECK_THROWS_AS(assemble(WGSpace(m1, 2, bc), PrimalSpace(m1, 3), a, zero_load()),
                  std::invalid_argument);
}

TEST_CASE("zero data produces a zero right-hand side and zero solution") {
  const TriMesh mesh = TriMesh::with_inv_h(4);
  const BoundaryConfig bc{{Side::bottom}, {Side::bottom}};
  const WGSpace sp(mesh, 2, bc);
  const PrimalSpace ps(mesh, 2);
  const SaddleSystem sys = assemble(sp, ps, TensorField::identity(), zero_load());
  CHECK(sys.rhs.norm() == 0.0);

  const SolveResult sol = solve(sys, sp, ps);
  REQUIRE(sol.success);
  CHECK(sol.lambda.lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(sol.u.lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("assembled system matches a dense independently integrated one") {
  const TriMesh mesh = TriMesh::with_inv_h(2);
  const PrimalSpace ps(mesh, 2);
  for (const char* name : {"bubble_cauchy", "bubble_varcoef"}) {
    const ManufacturedCase& c = get_case(name);
    const WGSpace sp(mesh, 2, c.bc);
    const SaddleSystem sys = assemble(sp, ps, c.a, make_load(c));
    const auto [dense, rhs] = oracle::dense_saddle_system(sp, ps, c.a, make_load(c));
    CHECK((Eigen::MatrixXd(sys.matrix) - dense).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((sys.rhs - rhs).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("direct solver reproduces a hand-solved saddle point system") {
  // [2 0 1; 0 2 1; 1 1 0] x = (1, 2, 3) has the unique solution
  // x = (1.25, 1.75, -1.5).
  Eigen::SparseMatrix<double> m(3, 3);
  std::vector<Eigen::Triplet<double>> trips = {{0, 0, 2.0}, {1, 1, 2.0}, {0, 2, 1.0},
                                               {2, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}};
  m.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd b(3);
  b << 1.0, 2.0, 3.0;
  const LinearSolve sol = solve_linear(m, b);
  REQUIRE(sol.success);
  CHECK(sol.x[0] == Catch::Approx(1.25).epsilon(1e-14));
  CHECK(sol.x[1] == Catch::Approx(1.75).epsilon(1e-14));
  CHECK(sol.x[2] == Catch::Approx(-1.5).epsilon(1e-14));
  CHECK(sol.residual < 1e-14);
}

TEST_CASE("singular systems are reported, not returned") {
  Eigen::SparseMatrix<double> m(2, 2);
  std::vector<Eigen::Triplet<double>> trips = {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}};
  m.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd b(2);
  b << 1.0, 0.0;
  const LinearSolve sol = solve_linear(m, b);
  CHECK(!sol.success);
  CHECK(!sol.message.empty());
}

TEST_CASE("a solution in the discrete space is reproduced to round-off") {
  const ManufacturedCase& c = get_case("constant_one");
  const TriMesh mesh = TriMesh::with_inv_h(4);
  const WGSpace sp(mesh, 2, c.bc);
  const PrimalSpace ps(mesh, 2);
  const SaddleSystem sys = assemble(sp, ps, c.a, make_load(c));
  const SolveResult sol = solve(sys, sp, ps);
  REQUIRE(sol.success);
  CHECK(sol.residual < 1e-10);
  CHECK(error_primal(ps, sol.u, c.u) < 1e-10);
  const LambdaNorms ln = lambda_norms(sp, sol.lambda);
  CHECK(ln.l0 < 1e-10);
  CHECK(ln.lb < 1e-10);
  CHECK(ln.ln < 1e-10);
}

TEST_CASE("witness value on the coarse mesh by hand") {
  // v = 1 on the first triangle and 0 on the second, with every boundary
  // coefficient constrained: the only contribution comes from the diagonal
  // edge, where [v] = 1 and h_e = sqrt(2), so b(v, rho) = |||v|||_1^2
  // = h_e^{-1} * |e| = 1.
  const TriMesh mesh = TriMesh::coarse_unit_square();
  const WGSpace sp(mesh, 2, BoundaryConfig{});
  const PrimalSpace ps(mesh, 2);
  Eigen::VectorXd v(ps.dim());
  v << 1.0, 0.0;
  const WitnessResult w = inf_sup_witness(sp, ps, TensorField::identity(), v);
  CHECK(w.lhs == Catch::Approx(1.0).epsilon(1e-13));
  CHECK(w.rhs == Catch::Approx(1.0).epsilon(1e-13));
  const double n1 = triple_bar_1(sp, ps, TensorField::identity(), v);
  CHECK(n1 * n1 == Catch::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("witness identity holds for random primal functions") {
  std::mt19937 rng(97);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const TriMesh mesh = TriMesh::with_inv_h(2);
  const std::vector<BoundaryConfig> configs = {
      {{Side::bottom}, {Side::bottom}},
      {{Side::bottom, Side::top, Side::left}, {Side::bottom, Side::top}},
      {{Side::bottom, Side::top}, {Side::left, Side::right}}};
  for (const TensorField& a : {TensorField::identity(), variable_tensor()}) {
    for (const BoundaryConfig& bc : configs) {
      const WGSpace sp(mesh, 2, bc);
      const PrimalSpace ps(mesh, 2);
      for (int trial = 0; trial < 3; ++trial) {
        Eigen::VectorXd v(ps.dim());
        for (int i = 0; i < ps.dim(); ++i) v[i] = unit(rng);
        const WitnessResult w = inf_sup_witness(sp, ps, a, v);
        REQUIRE(w.rhs > 0.0);
        CHECK(std::abs(w.lhs - w.rhs) / w.rhs < 1e-11);
        const double n1 = triple_bar_1(sp, ps, a, v);
        CHECK(std::abs(n1 * n1 - w.rhs) / w.rhs < 1e-11);
        // The witness lives in the constrained subspace.
        Eigen::VectorXd rho = w.rho;
        sp.apply_constraints(rho);
        CHECK((rho - w.rho).lpNorm<Eigen::Infinity>() == 0.0);
      }
    }
  }
}

TEST_CASE("boundary data warnings fire when a segment is empty") {
  const TriMesh mesh = TriMesh::with_inv_h(1);
  const BoundaryConfig no_neumann{{Side::bottom}, {}};
  const WGSpace sp(mesh, 2, no_neumann);
  const PrimalSpace ps(mesh, 2);
  LoadData load = zero_load();
  load.g1 = [](const Vec2&) { return 1.0; };
  load.g2 = [](const Vec2&, const Vec2&) { return 1.0; };
  const SaddleSystem sys = assemble(sp, ps, TensorField::identity(), load);
  REQUIRE(sys.warnings.size() == 1);
  CHECK(sys.warnings[0].find("Neumann") != std::string::npos);
}
