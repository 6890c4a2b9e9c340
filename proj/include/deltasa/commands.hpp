#pragma once

// The four CLI subcommands as library functions, so they can be driven from
// tests without spawning processes.

#include <iosfwd>
#include <string>
#include <vector>

#include "deltasa/config.hpp"

namespace deltasa {

/// Config echo, verdict with probes, provenance and the short-horizon flag.
json build_report(const AnalysisConfig& cfg, const CriterionVerdict& v);

/// Runs the pipeline and writes the report (to cfg.report_path or `out`),
/// plus oracle solution and block-norm CSVs when cfg.csv_dir is set.
json cmd_analyze(const AnalysisConfig& cfg, std::ostream& out);

struct SweepSpec {
  std::vector<double> gammas{1.0};
  std::vector<double> etas{0.0};
  std::vector<double> as;
  /// Alpha expression evaluated with each a.
  std::string alpha = "a*(1/d_n+1/d_{n+1})";
  double d1 = 1.0;
  DeficiencyConfig deficiency;
};

struct SweepRow {
  double gamma = 0.0;
  double eta = 0.0;
  double a = 0.0;
  std::string verdict;
  std::string certifying_test;
  double u_odd = 0.0;
  double u_even = 0.0;
  double delta0 = 0.0;
  double minimal_C1 = 0.0;
  double minimal_C2 = 0.0;
  std::string error;
};

/// Rows in (gamma, eta, a) lexicographic input order. Rows run in parallel;
/// a failing row is recorded with verdict "error" and the sweep continues.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

struct CheckResult {
  std::string group;
  std::string name;
  bool pass = false;
  std::string measured;
  std::string expected;
  double seconds = 0.0;
};

struct VerifyOptions {
  /// Comma-separated group names; empty runs everything.
  std::string only;
  long horizon = 1000000;
};

/// Group names accepted by VerifyOptions::only.
std::vector<std::string> verify_groups();

/// Runs the replication battery; `progress` (if given) receives one line per check.
std::vector<CheckResult> run_verify_paper(const VerifyOptions& opt, std::ostream* progress = nullptr);

/// Quantities accepted by plot_data.
std::vector<std::string> plot_quantities();

/// Two-column CSV (n, value) sampled at about `per_decade` log-spaced indices
/// up to the largest horizon; F and F_over_d start at n = 2. block_norms reports the natural log of the
/// l2 norm of block [2^k, 2^{k+1}) against its first index; residuals
/// uses the first oracle lambda.
void plot_data(const AnalysisConfig& cfg, const std::string& quantity, std::ostream& os, int per_decade = 20);

}  // namespace deltasa
