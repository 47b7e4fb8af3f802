#pragma once

// Experiment orchestration: config loading, Monte Carlo vs limit-law
// comparison, scaling regressions, and report persistence.

#include "saddle/limit_laws.hpp"
#include "saddle/sde.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace saddle {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string system_file;
  std::string mode = "verify";
  std::vector<double> eps_grid;  // strictly decreasing in (0,1)
  double alpha = 1.0;
  double p = 0.0;                // 0: midpoint of the admissible range
  double delta = 0.5;
  double y2 = 0.0;               // normal-form entry height; 0: from f(x0)
  long n_paths = 10000;
  uint64_t seed = 1;
  double h = 0;                  // 0: engine default
  int order_R = 0;               // 0: generating-relation order + 1
  std::string output_dir = "out";
  KernelVariant kernel = KernelVariant::LambdaPlus;
  Mixture2D chi_law = Mixture2D::standard_normal();
  double ks_threshold = 0.05;
  double exponent_tol = 0.1;
  double max_censored_fraction = 0.05;

  // All relative paths resolve against the config file's directory.
  std::string base_dir = ".";

  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig parse(const std::string& json_text, const std::string& base_dir);
  std::string resolve(const std::string& path) const;
};

struct EpsResult {
  double eps = 0;
  double ks_sign = 0, ks_transverse = 0, ks_time = 0;
  double iqr_y2 = 0;           // IQR of the unrescaled transverse exit coordinate
  double mean_exit_time = 0;
  double top_bottom_fraction = 0, censored_fraction = 0, escaped_fraction = 0;
  long side_hits = 0;
  double max_tau_hat_identity_error = 0;
  double max_time_identity_error = 0;
};

struct VerificationReport {
  std::string system_name;
  double alpha = 0, beta_expected = 0, p = 0, delta = 0;
  double var_N_plus = 0, sigma_plus = 0, sigma_minus = 0;
  std::vector<EpsResult> per_eps;
  double beta_estimate = 0, beta_stderr = 0;
  double time_slope_estimate = 0, time_slope_expected = 0;
  bool ks_pass = false, ks_monotone_pass = false, beta_pass = false, censoring_pass = false;
  bool pass = false;
  std::vector<std::vector<ExitSample>> samples_per_eps;  // for CSV emission
};

/// Full Monte Carlo vs limit-law verification over the eps grid.
VerificationReport run_verification(const ExperimentConfig& config);

nlohmann::json report_to_json(const VerificationReport& report);

/// Writes report.json, summary.txt and samples/*.csv. Deterministic file
/// contents for identical reports; rejects non-finite statistics with the
/// offending field named.
void emit_report(const VerificationReport& report, const std::string& output_dir);

}  // namespace saddle
