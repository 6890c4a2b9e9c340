// deltasa: self-adjointness and deficiency-index checks for B_{X,alpha}.
//
//   deltasa analyze --gamma 1 --eta 0 --alpha "a*(1/d_n+1/d_{n+1})" --a -0.5
//   deltasa sweep --gammas 0.6,0.75,1 --as -1.5,-0.5,0.5 --out sweep.csv
//   deltasa verify-paper [--only lemma1] [--horizon 1e4]
//   deltasa plot-data --quantity rho --gamma 1 --eta 0
//
// Exit codes: 0 success, 1 failed verification check, 2 usage error,
// 3 I/O error, 4 resource error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "deltasa/commands.hpp"

using namespace deltasa;

namespace {

struct CaseFlags {
  std::string config;
  std::string grid;
  std::optional<double> gamma;
  std::optional<double> eta;
  std::optional<double> d1;
  std::string alpha;
  std::optional<double> a;
  std::vector<std::string> horizons;
  std::optional<long> oracle_horizon;
  bool always_oracle = false;
};

void add_case_flags(CLI::App* cmd, CaseFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file (flags override it)");
  cmd->add_option("--grid", f.grid, "powerlog:gamma,eta[,d1] | constant:d | list:d1,d2,...");
  cmd->add_option("--gamma", f.gamma, "power-log exponent gamma");
  cmd->add_option("--eta", f.eta, "power-log exponent eta");
  cmd->add_option("--d1", f.d1, "free first gap of the power-log family");
  cmd->add_option("--alpha", f.alpha, "alpha expression, e.g. \"a*(1/d_n+1/d_{n+1}) + 1/n\", zero, list:...");
  cmd->add_option("--a", f.a, "value of a in the alpha expression");
  cmd->add_option("--horizons", f.horizons, "increasing horizons, e.g. 1e4 1e5 1e6")->delimiter(',');
  cmd->add_option("--oracle-horizon", f.oracle_horizon, "recurrence length for the oracle");
  cmd->add_flag("--always-oracle", f.always_oracle, "run the oracle even when a certificate exists");
}

AnalysisConfig build_config(const CaseFlags& f) {
  AnalysisConfig cfg;
  cfg.deficiency.horizons = default_horizons();
  if (!f.config.empty()) load_config_file(cfg, f.config);
  if (!f.grid.empty()) cfg.grid = parse_grid(f.grid);
  if (f.gamma || f.eta || f.d1) {
    if (cfg.grid.family != "power_log") cfg.grid = GridSpec{};
    if (f.gamma) cfg.grid.gamma = *f.gamma;
    if (f.eta) cfg.grid.eta = *f.eta;
    if (f.d1) cfg.grid.d1 = *f.d1;
  }
  if (!f.alpha.empty()) cfg.alpha = f.alpha;
  if (f.a) cfg.a = *f.a;
  if (!f.horizons.empty()) {
    cfg.deficiency.horizons.clear();
    for (const auto& h : f.horizons) cfg.deficiency.horizons.push_back(parse_horizon(h));
  }
  if (f.oracle_horizon) cfg.deficiency.oracle_horizon = *f.oracle_horizon;
  if (f.always_oracle) cfg.deficiency.always_run_oracle = true;
  return cfg;
}

std::vector<double> parse_values(const std::vector<std::string>& items, const char* what) {
  std::vector<double> out;
  for (const auto& s : items) {
    if (s.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(s, &used));
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw UsageError(std::string(what) + ": cannot read '" + s + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-adjointness and deficiency indices of Jacobi matrices from delta-interaction grids"};
  app.require_subcommand(1);

  CaseFlags analyze_flags;
  std::string out_path;
  std::string csv_dir;
  bool timings = false;
  auto* analyze = app.add_subcommand("analyze", "run the verdict pipeline on one case and emit a JSON report");
  add_case_flags(analyze, analyze_flags);
  analyze->add_option("--out", out_path, "report path (default stdout)");
  analyze->add_option("--csv-dir", csv_dir, "directory for oracle solution and block-norm CSVs");
  analyze->add_flag("--timings", timings, "include wall-clock per stage (makes the report non-reproducible)");

  std::vector<std::string> gammas{"1"};
  std::vector<std::string> etas{"0"};
  std::vector<std::string> as;
  std::string sweep_alpha = "a*(1/d_n+1/d_{n+1})";
  double sweep_d1 = 1.0;
  std::vector<std::string> sweep_horizons;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "verdicts over a (gamma, eta, a) grid as CSV");
  sweep->add_option("--gammas", gammas, "gamma values")->delimiter(',');
  sweep->add_option("--etas", etas, "eta values")->delimiter(',');
  sweep->add_option("--as", as, "values of a (required)")->delimiter(',');
  sweep->add_option("--alpha", sweep_alpha, "alpha expression in terms of a");
  sweep->add_option("--d1", sweep_d1, "first gap");
  sweep->add_option("--horizons", sweep_horizons, "increasing horizons")->delimiter(',');
  sweep->add_option("--out", sweep_out, "CSV path (default stdout)");

  std::string only;
  std::string verify_horizon = "1e6";
  auto* verify = app.add_subcommand("verify-paper", "run the replication battery");
  verify->add_option("--only", only, "comma-separated groups: wallis, lemma1, scaling, glimits, fbound, expansion, "
                                     "christ_stolz, phase, identity, oracle");
  verify->add_option("--horizon", verify_horizon, "horizon N; tolerances loosen below 1e6");

  CaseFlags plot_flags;
  std::string quantity;
  int per_decade = 20;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot-data", "two-column CSV of a quantity for plotting");
  add_case_flags(plot, plot_flags);
  plot->add_option("--quantity", quantity, "F | F_over_d | rho | block_norms | residuals")->required();
  plot->add_option("--per-decade", per_decade, "log-spaced samples per decade");
  plot->add_option("--out", plot_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*analyze) {
      AnalysisConfig cfg = build_config(analyze_flags);
      if (!out_path.empty()) cfg.report_path = out_path;
      if (!csv_dir.empty()) cfg.csv_dir = csv_dir;
      if (timings) cfg.with_timings = true;
      const json report = cmd_analyze(cfg, std::cout);
      const auto& r = report["result"];
      std::cerr << "verdict: " << r["verdict"].get<std::string>() << " via "
                << r["certifying_test"].get<std::string>() << '\n';
      return 0;
    }
    if (*sweep) {
      SweepSpec spec;
      spec.gammas = parse_values(gammas, "gammas");
      spec.etas = parse_values(etas, "etas");
      spec.as = parse_values(as, "as");
      spec.alpha = sweep_alpha;
      spec.d1 = sweep_d1;
      spec.deficiency.horizons = default_horizons();
      if (!sweep_horizons.empty()) {
        spec.deficiency.horizons.clear();
        for (const auto& h : sweep_horizons) spec.deficiency.horizons.push_back(parse_horizon(h));
      }
      const auto rows = run_sweep(spec);
      if (sweep_out.empty()) {
        write_sweep_csv(std::cout, rows);
      } else {
        std::ofstream f(sweep_out);
        if (!f) throw std::ios_base::failure("cannot write " + sweep_out);
        write_sweep_csv(f, rows);
      }
      return 0;
    }
    if (*verify) {
      VerifyOptions opt;
      opt.only = only;
      opt.horizon = parse_horizon(verify_horizon);
      const auto results = run_verify_paper(opt, &std::cout);
      std::size_t failed = 0;
      for (const auto& r : results) failed += r.pass ? 0 : 1;
      std::cout << results.size() - failed << '/' << results.size() << " checks passed\n";
      return failed == 0 ? 0 : 1;
    }
    if (*plot) {
      const AnalysisConfig cfg = build_config(plot_flags);
      if (plot_out.empty()) {
        plot_data(cfg, quantity, std::cout, per_decade);
      } else {
        std::ofstream f(plot_out);
        if (!f) throw std::ios_base::failure("cannot write " + plot_out);
        plot_data(cfg, quantity, f, per_decade);
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
