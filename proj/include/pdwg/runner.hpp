#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "pdwg/assembly.hpp"
#include "pdwg/mesh.hpp"
#include "pdwg/norms.hpp"
#include "pdwg/problems.hpp"
#include "pdwg/report.hpp"
#include "pdwg/spaces.hpp"

namespace pdwg {

/// Environment variable that redirects all emitted report files.
inline constexpr const char* kOutputDirEnv = "PDWG_OUTPUT_DIR";

enum class OutputFormat { csv, markdown, both };

struct RunConfig {
  std::string case_name;
  int k = 2;
  std::vector<int> levels;  ///< empty means the case's bundled default levels
  std::string output_dir;   ///< empty means no files are written
  std::string output_stem;  ///< file basename; empty means "case_<name>"
  OutputFormat format = OutputFormat::both;
  bool diagnostics = false;
  double validation_tol = 1e-6;
};

enum class RunStatus : int {
  ok = 0,
  config_error = 1,
  validation_error = 2,
  solver_degraded = 3
};

struct RunOutcome {
  RunStatus status = RunStatus::ok;
  ConvergenceReport report;
  std::vector<std::string> messages;
};

namespace detail {

inline void check_config(const RunConfig& cfg) {
  if (cfg.k < 2) throw std::invalid_argument("config: k must be >= 2");
  int prev = 0;
  for (int n : cfg.levels) {
    if (n < 1 || (n & (n - 1)) != 0)
      throw std::invalid_argument("config: levels must be powers of two, got " +
                                  std::to_string(n));
    if (n <= prev) throw std::invalid_argument("config: levels must be strictly increasing");
    prev = n;
  }
}

inline std::filesystem::path resolve_output_dir(const std::string& configured) {
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return configured;
}

inline void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << body;
}

inline void emit_report(const ConvergenceReport& rep, const RunConfig& cfg,
                        const std::string& stem, std::vector<std::string>& messages) {
  const std::filesystem::path dir = resolve_output_dir(cfg.output_dir);
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  if (cfg.format != OutputFormat::markdown) {
    write_file(dir / (stem + ".csv"), to_csv(rep));
    messages.push_back("wrote " + (dir / (stem + ".csv")).string());
  }
  if (cfg.format != OutputFormat::csv) {
    write_file(dir / (stem + ".md"), to_markdown(rep));
    messages.push_back("wrote " + (dir / (stem + ".md")).string());
  }
}

/// Largest elementwise L2 residual of the commuting identity: applying the
/// discrete weak operator to the interpolated exact solution must equal the
/// elementwise projection of the strong operator applied to it, i.e. of -f.
inline double commuting_residual(const ManufacturedCase& c, const TriMesh& mesh, int k) {
  const WGSpace sp(mesh, k, c.bc);
  const PrimalSpace ps(mesh, k);
  const Eigen::VectorXd qh = project_Qh(sp, c.a, c.u, c.grad_u);
  const Eigen::VectorXd lhs = apply_weak_operator(sp, ps, c.a, qh);
  const Eigen::VectorXd rhs = project_primal(ps, [&](const Vec2& x) { return -c.f(x); });
  double worst = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto tri = mesh.corners(t);
    const Eigen::MatrixXd mass = tri_mass_matrix(ps.basis(t), tri[0], tri[1], tri[2]);
    const Eigen::VectorXd d = lhs.segment(ps.offset(t), ps.per_element()) -
                              rhs.segment(ps.offset(t), ps.per_element());
    worst = std::max(worst, std::sqrt(std::max(0.0, d.dot(mass * d))));
  }
  return worst;
}

/// Worst relative mismatch of b(v, rho_v) against |||v|||_1^2 over a few
/// random primal functions.
inline double witness_mismatch(const ManufacturedCase& c, const TriMesh& mesh, int k,
                               int samples, unsigned seed) {
  const WGSpace sp(mesh, k, c.bc);
  const PrimalSpace ps(mesh, k);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd v(ps.dim());
    for (int i = 0; i < ps.dim(); ++i) v[i] = unit(rng);
    const WitnessResult w = inf_sup_witness(sp, ps, c.a, v);
    const double norm1 = triple_bar_1(sp, ps, c.a, v);
    worst = std::max(worst, std::abs(w.lhs - norm1 * norm1) / std::max(norm1 * norm1, 1e-30));
  }
  return worst;
}

}  // namespace detail

/// Solve one case over its refinement levels and tabulate errors and rates.
inline RunOutcome run_case(const RunConfig& cfg) {
  RunOutcome out;
  const ManufacturedCase* c = nullptr;
  try {
    detail::check_config(cfg);
    c = &get_case(cfg.case_name);
  } catch (const std::exception& err) {
    out.status = RunStatus::config_error;
    out.messages.push_back(err.what());
    return out;
  }

  const double dev = validate_case(*c);
  if (dev > cfg.validation_tol) {
    out.status = RunStatus::validation_error;
    out.messages.push_back("case self-check failed: max deviation " + std::to_string(dev));
    return out;
  }

  out.report.case_name = c->name;
  out.report.description = c->description;
  out.report.k = cfg.k;
  const std::vector<int>& levels = cfg.levels.empty() ? c->levels : cfg.levels;
  const LoadData load = make_load(*c);

  for (int n : levels) {
    const TriMesh mesh = TriMesh::with_inv_h(n);
    const WGSpace sp(mesh, cfg.k, c->bc);
    const PrimalSpace ps(mesh, cfg.k);
    const SaddleSystem sys = assemble(sp, ps, c->a, load);
    for (const std::string& w : sys.warnings) out.messages.push_back("1/h=" + std::to_string(n) + ": " + w);
    const SolveResult sol = solve(sys, sp, ps);
    if (!sol.success) {
      out.status = RunStatus::solver_degraded;
      out.messages.push_back("1/h=" + std::to_string(n) + ": " + sol.message);
      continue;
    }

    const Eigen::VectorXd qh = project_Qh(sp, c->a, c->u, c->grad_u);
    ErrorRow row;
    row.inv_h = n;
    row.eh = error_primal(ps, sol.u, c->u);
    const LambdaNorms ln = lambda_norms(sp, sol.lambda);
    row.l0 = ln.l0;
    row.lb = ln.lb;
    row.ln = ln.ln;
    row.residual = sol.residual;
    out.report.rows.push_back(row);

    if (cfg.diagnostics) {
      std::ostringstream os;
      os << "1/h=" << n << " diagnostics: commuting residual "
         << detail::fmt_g(detail::commuting_residual(*c, mesh, cfg.k), 3) << ", witness mismatch "
         << detail::fmt_g(detail::witness_mismatch(*c, mesh, cfg.k, 3, 0xd1a6 + n), 3)
         << ", dual energy " << detail::fmt_g(triple_bar(sp, c->a, sol.lambda), 4);
      out.messages.push_back(os.str());
    }
  }
  compute_orders(out.report.rows);
  detail::emit_report(out.report, cfg,
                      cfg.output_stem.empty() ? "case_" + c->name : cfg.output_stem,
                      out.messages);
  return out;
}

/// Pass/fail bands applied to a finished report, by case kind. Returns an
/// empty string on success, else the failure description.
inline std::string check_report(const ManufacturedCase& c, const ConvergenceReport& rep) {
  std::ostringstream bad;
  const auto& rows = rep.rows;
  if (rows.empty()) return "no rows";
  const auto order_or = [](const std::optional<double>& o) { return o ? *o : 0.0; };

  switch (c.kind) {
    case CheckKind::machine_accuracy:
      for (const ErrorRow& r : rows) {
        if (r.inv_h > 8) continue;  // round-off growth on fine meshes tolerated
        if (r.eh > 1e-10 || r.l0 > 1e-10 || r.lb > 1e-10 || r.ln > 1e-10)
          bad << "errors above 1e-10 at 1/h=" << r.inv_h << "; ";
      }
      break;
    case CheckKind::mixed_bands: {
      if (rows.size() < 3) return "need at least three levels";
      const ErrorRow &r1 = rows[rows.size() - 2], &r2 = rows.back();
      const double eh = 0.5 * (order_or(r1.eh_order) + order_or(r2.eh_order));
      if (eh < 0.95 || eh > 1.6) bad << "primal rate " << eh << " outside [0.95,1.6]; ";
      for (auto [label, v1, v2] :
           {std::tuple{"l0", r1.l0_order, r2.l0_order}, std::tuple{"lb", r1.lb_order, r2.lb_order},
            std::tuple{"ln", r1.ln_order, r2.ln_order}}) {
        const double avg = 0.5 * (order_or(v1) + order_or(v2));
        if (avg < 1.6 || avg > 2.3)
          bad << "dual rate (" << label << ") " << avg << " outside [1.6,2.3]; ";
      }
      break;
    }
    case CheckKind::cauchy_bands: {
      const ErrorRow& last = rows.back();
      if (order_or(last.eh_order) < 0.95)
        bad << "primal rate " << order_or(last.eh_order) << " below 0.95; ";
      if (order_or(last.l0_order) < 1.4 || order_or(last.lb_order) < 1.4 ||
          order_or(last.ln_order) < 1.4)
        bad << "a dual rate fell below 1.4; ";
      break;
    }
    case CheckKind::primal_only_bands: {
      const ErrorRow& last = rows.back();
      if (order_or(last.eh_order) < 0.95)
        bad << "primal rate " << order_or(last.eh_order) << " below 0.95; ";
      break;
    }
  }
  for (const ErrorRow& r : rows)
    if (r.residual > 1e-8) bad << "solver residual " << r.residual << " at 1/h=" << r.inv_h << "; ";
  return bad.str();
}

/// Run every catalog case, write its report files, and summarize pass/fail
/// per case. `max_inv_h` (0 = no cap) trims the level lists for quick runs;
/// band checks are skipped for trimmed cases since the rates would be
/// pre-asymptotic.
inline RunOutcome run_suite(const std::string& output_dir, OutputFormat format,
                            int max_inv_h = 0) {
  RunOutcome out;
  std::ostringstream summary;
  int failures = 0;
  for (const ManufacturedCase& c : catalog()) {
    RunConfig cfg;
    cfg.case_name = c.name;
    cfg.output_dir = output_dir;
    cfg.output_stem = c.group + "_" + c.name;
    cfg.format = format;
    bool trimmed = false;
    if (max_inv_h > 0) {
      for (int n : c.levels)
        if (n <= max_inv_h) cfg.levels.push_back(n);
      trimmed = cfg.levels.size() < c.levels.size();
      if (cfg.levels.empty()) continue;
    }
    RunOutcome one = run_case(cfg);
    for (std::string& msg : one.messages) out.messages.push_back(c.name + ": " + std::move(msg));
    std::string verdict;
    if (one.status != RunStatus::ok) {
      verdict = "error";
      out.status = one.status;
      ++failures;
    } else if (trimmed) {
      verdict = "ran (bands skipped: levels capped)";
    } else {
      const std::string bad = check_report(c, one.report);
      verdict = bad.empty() ? "pass" : "FAIL " + bad;
      if (!bad.empty()) ++failures;
    }
    summary << c.group << " (" << c.name << "): " << verdict << "\n";
  }
  summary << (failures == 0 ? "all cases passed" : std::to_string(failures) + " case(s) failed")
          << "\n";
  out.messages.push_back(summary.str());
  if (failures > 0 && out.status == RunStatus::ok) out.status = RunStatus::validation_error;

  const std::filesystem::path dir = detail::resolve_output_dir(output_dir);
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    detail::write_file(dir / "summary.txt", summary.str());
  }
  return out;
}

inline std::string list_cases() {
  std::ostringstream os;
  for (const ManufacturedCase& c : catalog()) {
    os << c.name << "\n    group " << c.group << ": " << c.description << "\n    levels 1/h =";
    for (int n : c.levels) os << " " << n;
    os << "\n";
  }
  return os.str();
}

}  // namespace pdwg
