#pragma once

// Analysis configuration: JSON file, command-line overrides, and the small
// alpha language. The language covers only the families the criteria can
// classify analytically:
//
//   zero
//   list:v1,v2,...            explicit values, last one held
//   sum of terms, each a product of
//     numbers, a, n, n^p, ln, ln^q and (1/d_n+1/d_{n+1})
//   e.g.  a*(1/d_n+1/d_{n+1}) + 1/n     -2*n^1*ln^1     -(1/d_n+1/d_{n+1})
//
// The coefficient `a` takes its value from the separate `a` setting.

#include <optional>
#include <string>
#include <vector>

#include "deltasa/deficiency.hpp"
#include "deltasa/report.hpp"

namespace deltasa {

struct GridSpec {
  std::string family = "power_log";  // power_log | constant | explicit
  double gamma = 1.0;
  double eta = 0.0;
  double d1 = 1.0;
  double d = 1.0;
  std::vector<double> gaps;
  TailRule tail = TailRule::Periodic;

  [[nodiscard]] GridSequence build() const;
};

/// "powerlog:g,e[,d1]", "constant:d" or "list:d1,d2,...".
GridSpec parse_grid(const std::string& text);

/// Parses the alpha language; `a` is required when the text mentions it.
AlphaSequence parse_alpha(const std::string& text, std::optional<double> a);

inline constexpr long kShortHorizon = 10000;

struct AnalysisConfig {
  GridSpec grid;
  std::string alpha = "zero";
  std::optional<double> a;
  DeficiencyConfig deficiency;
  std::string report_path;  // empty: stdout
  std::string csv_dir;      // empty: no CSV dumps
  bool with_timings = false;

  /// Checks the invariants (increasing horizons, positive tolerances).
  void validate() const;
  [[nodiscard]] json echo() const;
};

/// Default horizons, honouring DELTA_SPEC_HORIZON (largest horizon N; the
/// list becomes N/100, N/10, N).
std::vector<long> default_horizons();

/// Parses a horizon such as "1e6" or "250000".
long parse_horizon(const std::string& text);

/// Applies a JSON config document onto `cfg`. Unknown keys are usage errors.
void apply_json(AnalysisConfig& cfg, const json& doc);
void load_config_file(AnalysisConfig& cfg, const std::string& path);

}  // namespace deltasa
