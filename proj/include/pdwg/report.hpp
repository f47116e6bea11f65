#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace pdwg {

/// One refinement level of a convergence experiment.
struct ErrorRow {
  int inv_h = 0;
  double eh = 0.0;
  double l0 = 0.0;
  double lb = 0.0;
  double ln = 0.0;
  std::optional<double> eh_order;
  std::optional<double> l0_order;
  std::optional<double> lb_order;
  std::optional<double> ln_order;
  double residual = 0.0;
};

struct ConvergenceReport {
  std::string case_name;
  std::string description;
  int k = 2;
  std::vector<ErrorRow> rows;
};

/// Observed rates log2(e(h)/e(h/2)) between consecutive rows. Rates are
/// left unset on the first row and whenever the coarser error has already
/// hit round-off (below 1e-12), where the ratio is noise.
inline void compute_orders(std::vector<ErrorRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].inv_h != 2 * rows[i - 1].inv_h)
      throw std::invalid_argument("compute_orders: mesh levels must double row to row");
    const auto rate = [](double coarse, double fine) -> std::optional<double> {
      if (coarse < 1e-12 || fine <= 0.0) return std::nullopt;
      return std::log2(coarse / fine);
    };
    rows[i].eh_order = rate(rows[i - 1].eh, rows[i].eh);
    rows[i].l0_order = rate(rows[i - 1].l0, rows[i].l0);
    rows[i].lb_order = rate(rows[i - 1].lb, rows[i].lb);
    rows[i].ln_order = rate(rows[i - 1].ln, rows[i].ln);
  }
}

namespace detail {

/// Locale-independent shortest-round-trip style formatting with a fixed
/// number of significant digits.
inline std::string fmt_g(double v, int digits) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, digits);
  if (res.ec != std::errc{}) return "nan";
  return std::string(buf, res.ptr);
}

inline std::string fmt_opt(const std::optional<double>& v, int digits, const char* none) {
  return v ? fmt_g(*v, digits) : std::string(none);
}

}  // namespace detail

/// CSV with a fixed header; order cells are empty when undefined.
inline std::string to_csv(const ConvergenceReport& rep) {
  std::ostringstream os;
  os << "inv_h,eh,eh_order,l0,l0_order,lb,lb_order,ln,ln_order,residual\n";
  for (const ErrorRow& r : rep.rows) {
    os << r.inv_h << "," << detail::fmt_g(r.eh, 7) << "," << detail::fmt_opt(r.eh_order, 7, "")
       << "," << detail::fmt_g(r.l0, 7) << "," << detail::fmt_opt(r.l0_order, 7, "") << ","
       << detail::fmt_g(r.lb, 7) << "," << detail::fmt_opt(r.lb_order, 7, "") << ","
       << detail::fmt_g(r.ln, 7) << "," << detail::fmt_opt(r.ln_order, 7, "") << ","
       << detail::fmt_g(r.residual, 3) << "\n";
  }
  return os.str();
}

/// Markdown table with the same nine data columns the CSV writer emits.
inline std::string to_markdown(const ConvergenceReport& rep) {
  std::ostringstream os;
  os << "### " << rep.case_name << "\n\n";
  if (!rep.description.empty()) os << rep.description << "\n\n";
  os << "| 1/h | $\\|e_h\\|_0$ | order | $\\|\\lambda_0\\|_0$ | order | $\\|\\lambda_b\\|_0$ "
        "| order | $\\|\\lambda_n\\|_0$ | order |\n";
  os << "|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const ErrorRow& r : rep.rows) {
    os << "| " << r.inv_h << " | " << detail::fmt_g(r.eh, 4) << " | "
       << detail::fmt_opt(r.eh_order, 4, "-") << " | " << detail::fmt_g(r.l0, 4) << " | "
       << detail::fmt_opt(r.l0_order, 4, "-") << " | " << detail::fmt_g(r.lb, 4) << " | "
       << detail::fmt_opt(r.lb_order, 4, "-") << " | " << detail::fmt_g(r.ln, 4) << " | "
       << detail::fmt_opt(r.ln_order, 4, "-") << " |\n";
  }
  return os.str();
}

}  // namespace pdwg
