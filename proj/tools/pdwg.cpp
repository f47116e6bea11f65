#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdwg/problems.hpp"
#include "pdwg/report.hpp"
#include "pdwg/runner.hpp"

namespace {

pdwg::OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return pdwg::OutputFormat::csv;
  if (s == "markdown" || s == "md") return pdwg::OutputFormat::markdown;
  if (s == "both") return pdwg::OutputFormat::both;
  throw CLI::ValidationError("--format", "expected csv, markdown or both");
}

/// JSON config file, merged under any explicit command-line flags:
/// { "case": "...", "k": 2, "levels": [1,2,4], "output_dir": "...",
///   "format": "csv|markdown|both", "diagnostics": false }
void apply_config_file(const std::string& path, pdwg::RunConfig& cfg) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& err) {
    throw std::runtime_error("config file " + path + ": " + err.what());
  }
  if (!j.is_object()) throw std::runtime_error("config file " + path + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "case")
      cfg.case_name = value.get<std::string>();
    else if (key == "k")
      cfg.k = value.get<int>();
    else if (key == "levels")
      cfg.levels = value.get<std::vector<int>>();
    else if (key == "output_dir")
      cfg.output_dir = value.get<std::string>();
    else if (key == "format")
      cfg.format = parse_format(value.get<std::string>());
    else if (key == "diagnostics")
      cfg.diagnostics = value.get<bool>();
    else
      throw std::runtime_error("config file " + path + ": unknown key '" + key + "'");
  }
}

int print_outcome(const pdwg::RunOutcome& out, bool print_table) {
  for (const std::string& msg : out.messages) std::cerr << msg << "\n";
  if (print_table && !out.report.rows.empty()) std::cout << pdwg::to_markdown(out.report);
  return static_cast<int>(out.status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primal-dual weak Galerkin solver for the elliptic Cauchy problem"};
  app.require_subcommand(1);

  std::string case_name, config_path, output_dir, format_str;
  std::vector<int> levels;
  int k = 2;
  bool diagnostics = false;

  CLI::App* run = app.add_subcommand("run", "solve one case over a refinement sequence");
  run->add_option("--case", case_name, "case name (see `list`)");
  run->add_option("--config", config_path, "JSON config file; flags override it");
  run->add_option("--levels", levels, "1/h values, e.g. --levels 1 2 4 8");
  run->add_option("-k,--degree", k, "polynomial degree of the dual space (>= 2)");
  run->add_option("--output-dir", output_dir, "directory for report files");
  run->add_option("--format", format_str, "csv, markdown or both");
  run->add_flag("--diagnostics", diagnostics, "per-level operator identity checks");

  int max_inv_h = 0;
  CLI::App* suite = app.add_subcommand("suite", "run every case and write all report tables");
  suite->add_option("--output-dir", output_dir, "directory for report files")->required();
  suite->add_option("--format", format_str, "csv, markdown or both");
  suite->add_option("--max-inv-h", max_inv_h, "cap the refinement level (0 = full)");

  CLI::App* list = app.add_subcommand("list", "list the bundled cases");

  CLI::App* validate = app.add_subcommand("validate", "finite-difference self-check of cases");
  validate->add_option("--case", case_name, "case to check (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Keep the documented exit-code contract: parse failures are config
    // errors (1); --help and --version still exit 0.
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(pdwg::RunStatus::config_error);
  }

  try {
    if (run->parsed()) {
      pdwg::RunConfig cfg;
      if (!config_path.empty()) apply_config_file(config_path, cfg);
      if (!case_name.empty()) cfg.case_name = case_name;
      if (!levels.empty()) cfg.levels = levels;
      if (run->count("-k") || run->count("--degree")) cfg.k = k;
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      if (!format_str.empty()) cfg.format = parse_format(format_str);
      if (diagnostics) cfg.diagnostics = true;
      if (cfg.case_name.empty()) {
        std::cerr << "run: no case given (use --case or a config file)\n";
        return static_cast<int>(pdwg::RunStatus::config_error);
      }
      return print_outcome(pdwg::run_case(cfg), true);
    }
    if (suite->parsed()) {
      const pdwg::OutputFormat fmt =
          format_str.empty() ? pdwg::OutputFormat::both : parse_format(format_str);
      return print_outcome(pdwg::run_suite(output_dir, fmt, max_inv_h), false);
    }
    if (list->parsed()) {
      std::cout << pdwg::list_cases();
      return 0;
    }
    if (validate->parsed()) {
      bool all_ok = true;
      for (const pdwg::ManufacturedCase& c : pdwg::catalog()) {
        if (!case_name.empty() && c.name != case_name) continue;
        const double dev = pdwg::validate_case(c);
        const bool ok = dev <= 1e-6;
        all_ok = all_ok && ok;
        std::cout << c.name << ": max deviation " << dev << (ok ? " (ok)" : " (FAIL)") << "\n";
      }
      if (!case_name.empty()) pdwg::get_case(case_name);  // unknown name -> error
      return all_ok ? 0 : static_cast<int>(pdwg::RunStatus::validation_error);
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return static_cast<int>(pdwg::RunStatus::config_error);
  }
  return 0;
}
