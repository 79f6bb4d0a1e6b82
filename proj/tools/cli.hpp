#pragma once

#include "she/report.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace she::cli {

enum ExitCode : int { kSuccess = 0, kValidation = 1, kRuntime = 2, kOracleFailure = 3 };

/// Fully resolved options shared by every subcommand.
struct RunConfig {
    double eta = 0.4;
    int kappa = 1;
    double nbar0 = 5.0;
    std::string lambda_s = "inf";
    double tail_eps = 1e-12;
    double tmax = 0.0; // Omega*t; 0 = automatic
    int samples = 200;
    double gamma_s = 1.0;
    double gamma_h = 1.0;
    double t_reset = 10.0;
    double t_therm = 20.0;
    double t_extract = 0.0; // Omega*t; 0 = first nbar minimum
    std::string out = "-";
    std::string format = "csv";
    int workers = 1;

    // Empty lists select the per-command defaults.
    std::vector<int> kappas;
    std::vector<double> nbar0s;
    double eta_min = 0.01;
    double eta_max = 1.2;
    int eta_count = 120;
    int scan_count = 4096;
    double refine_tol = 1e-10;
    double ripple = 1e-6;
    int bound_points = 201;
    double inject_eta_mismatch = 0.0;
    int oracle_samples = 50;
};

/// Rejects inconsistent options before any computation starts.
void validate(const RunConfig& cfg);

report::Document cmd_dynamics(const RunConfig& cfg);
report::Document cmd_find_tf(const RunConfig& cfg);
report::Document cmd_sweep_eta(const RunConfig& cfg);
report::Document cmd_sweep_nbar(const RunConfig& cfg);
report::Document cmd_bound(const RunConfig& cfg);
report::Document cmd_cycle(const RunConfig& cfg);
/// Sets all_passed in the summary; the caller maps a failure to kOracleFailure.
report::Document cmd_oracle_check(const RunConfig& cfg);

/// Parses argv, runs the selected subcommand and writes its output.
/// Returns the process exit code; diagnostics go to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace she::cli
