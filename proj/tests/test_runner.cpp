#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "pdwg/runner.hpp"

using namespace pdwg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    std::mt19937_64 rng(std::random_device{}());
    path = fs::temp_directory_path() / ("pdwg_" + tag + "_" + std::to_string(rng()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  REQUIRE(is);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("bad configurations are rejected up front") {
  RunConfig cfg;
  cfg.case_name = "no_such_case";
  CHECK(run_case(cfg).status == RunStatus::config_error);

  cfg.case_name = "constant_one";
  cfg.k = 1;
  CHECK(run_case(cfg).status == RunStatus::config_error);

  cfg.k = 2;
  cfg.levels = {3};
  CHECK(run_case(cfg).status == RunStatus::config_error);

  cfg.levels = {4, 2};
  CHECK(run_case(cfg).status == RunStatus::config_error);

  cfg.levels = {2, 2};
  CHECK(run_case(cfg).status == RunStatus::config_error);
}

TEST_CASE("a quick run reproduces the exact constant solution") {
  RunConfig cfg;
  cfg.case_name = "constant_one";
  cfg.levels = {1, 2};
  const RunOutcome out = run_case(cfg);
  REQUIRE(out.status == RunStatus::ok);
  REQUIRE(out.report.rows.size() == 2);
  for (const ErrorRow& r : out.report.rows) {
    CHECK(r.eh < 1e-10);
    CHECK(r.l0 < 1e-10);
    CHECK(r.lb < 1e-10);
    CHECK(r.ln < 1e-10);
    CHECK(r.residual < 1e-8);
  }
  CHECK(check_report(get_case("constant_one"), out.report).empty());
}

TEST_CASE("reports are written where configured") {
  const TempDir dir("out");
  RunConfig cfg;
  cfg.case_name = "constant_one";
  cfg.levels = {1, 2};
  cfg.output_dir = dir.path.string();
  const RunOutcome out = run_case(cfg);
  REQUIRE(out.status == RunStatus::ok);
  const fs::path csv = dir.path / "case_constant_one.csv";
  const fs::path md = dir.path / "case_constant_one.md";
  REQUIRE(fs::exists(csv));
  REQUIRE(fs::exists(md));
  const std::string body = slurp(csv);
  CHECK(body.rfind("inv_h,eh,eh_order,l0,l0_order,lb,lb_order,ln,ln_order,residual\n", 0) == 0);
  CHECK(slurp(md).find("### constant_one") != std::string::npos);

  // csv-only format suppresses the markdown twin.
  const TempDir dir2("fmt");
  cfg.output_dir = dir2.path.string();
  cfg.format = OutputFormat::csv;
  REQUIRE(run_case(cfg).status == RunStatus::ok);
  CHECK(fs::exists(dir2.path / "case_constant_one.csv"));
  CHECK(!fs::exists(dir2.path / "case_constant_one.md"));
}

TEST_CASE("the output directory environment override wins") {
  const TempDir configured("cfg");
  const TempDir forced("env");
  RunConfig cfg;
  cfg.case_name = "constant_one";
  cfg.levels = {1};
  cfg.output_dir = configured.path.string();
  REQUIRE(setenv(kOutputDirEnv, forced.path.string().c_str(), 1) == 0);
  const RunOutcome out = run_case(cfg);
  unsetenv(kOutputDirEnv);
  REQUIRE(out.status == RunStatus::ok);
  CHECK(fs::exists(forced.path / "case_constant_one.csv"));
  CHECK(!fs::exists(configured.path / "case_constant_one.csv"));
}

TEST_CASE("diagnostics report the identity residuals") {
  RunConfig cfg;
  cfg.case_name = "constant_one";
  cfg.levels = {1};
  cfg.diagnostics = true;
  const RunOutcome out = run_case(cfg);
  REQUIRE(out.status == RunStatus::ok);
  bool found = false;
  for (const std::string& m : out.messages)
    if (m.find("commuting residual") != std::string::npos &&
        m.find("witness mismatch") != std::string::npos)
      found = true;
  CHECK(found);
}

TEST_CASE("identity residuals are small on real cases") {
  const TriMesh mesh = TriMesh::with_inv_h(2);
  CHECK(detail::commuting_residual(get_case("constant_one"), mesh, 2) < 1e-12);
  CHECK(detail::commuting_residual(get_case("bubble_cauchy"), mesh, 2) < 1e-12);
  CHECK(detail::commuting_residual(get_case("sin_sin_varcoef"), mesh, 2) < 1e-8);
  CHECK(detail::witness_mismatch(get_case("constant_one"), mesh, 2, 3, 1u) < 1e-10);
  CHECK(detail::witness_mismatch(get_case("sin_sin_varcoef"), mesh, 2, 3, 2u) < 1e-10);
}

TEST_CASE("report bands catch broken convergence histories") {
  const ManufacturedCase& exact = get_case("constant_one");
  ConvergenceReport rep;
  ErrorRow r;
  r.inv_h = 4;
  r.eh = r.l0 = r.lb = r.ln = 1e-3;
  rep.rows.push_back(r);
  CHECK(check_report(exact, rep).find("errors above") != std::string::npos);

  const ManufacturedCase& mixed = get_case("sin_sin_varcoef");
  ConvergenceReport conv;
  for (int i = 0; i < 3; ++i) {
    ErrorRow row;
    row.inv_h = 8 << i;
    const double s = std::pow(0.5, i);
    row.eh = 0.04 * s;
    row.l0 = 0.16 * s * s;
    row.lb = 0.08 * s * s;
    row.ln = 0.32 * s * s;
    conv.rows.push_back(row);
  }
  compute_orders(conv.rows);
  CHECK(check_report(mixed, conv).empty());

  ConvergenceReport flat = conv;
  flat.rows[1].lb = flat.rows[0].lb;
  flat.rows[2].lb = flat.rows[0].lb;
  compute_orders(flat.rows);
  CHECK(check_report(mixed, flat).find("dual rate") != std::string::npos);

  ConvergenceReport leaky = conv;
  leaky.rows[2].residual = 1e-6;
  CHECK(check_report(mixed, leaky).find("solver residual") != std::string::npos);

  const ManufacturedCase& cauchy = get_case("bubble_cauchy");
  ConvergenceReport slow = conv;
  slow.rows[2].eh = slow.rows[1].eh * 0.9;
  compute_orders(slow.rows);
  CHECK(check_report(cauchy, slow).find("primal rate") != std::string::npos);
}

TEST_CASE("the full suite runs on trimmed levels") {
  const TempDir dir("suite");
  const RunOutcome out = run_suite(dir.path.string(), OutputFormat::csv, 2);
  CHECK(out.status == RunStatus::ok);
  REQUIRE(fs::exists(dir.path / "summary.txt"));
  const std::string summary = slurp(dir.path / "summary.txt");
  CHECK(summary.find("exactness (constant_one)") != std::string::npos);
  CHECK(summary.find("bands skipped") != std::string::npos);
  CHECK(summary.find("all cases passed") != std::string::npos);
  CHECK(fs::exists(dir.path / "exactness_constant_one.csv"));
  CHECK(fs::exists(dir.path / "cauchy_dleft_bubble_cauchy.csv"));
  CHECK(!fs::exists(dir.path / "exactness_constant_one.md"));
}

TEST_CASE("case listing names every catalog entry") {
  const std::string listing = list_cases();
  for (const ManufacturedCase& c : catalog()) {
    CHECK(listing.find(c.name) != std::string::npos);
    CHECK(listing.find("group " + c.group) != std::string::npos);
  }
}
