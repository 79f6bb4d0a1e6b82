#pragma once

#include "she/open_system.hpp"
#include "she/raman.hpp"
#include "she/sweep.hpp"

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace she {

enum class Stage { Extract, Reset, Therm };

[[nodiscard]] std::string_view stage_name(Stage stage);

struct CycleConfig {
    EngineParams params;
    std::optional<double> t_extract; // units 1/Omega; unset = first nbar minimum
    double t_reset = 10.0;           // units 1/gamma_s
    double t_therm = 20.0;           // units 1/gamma_h
    double gamma_s = 1.0;
    double gamma_h = 1.0;
    int samples_per_stage = 200;
    TimeScan scan;
    /// Inverse vibrational temperature used for the free-entropy account;
    /// unset = ln(1 + 1/nbar0).
    std::optional<double> lambda_v;
};

/// One sample of the cycle. t is stage-local: Omega*t during extraction,
/// gamma_s*t during reset and gamma_h*t during re-thermalization.
struct TrajectoryPoint {
    Stage stage = Stage::Extract;
    double t = 0.0;
    double nbar = 0.0;
    double p_down = 0.0;
    double s_spin = 0.0;
    double s_vib = 0.0;
    double s_joint = 0.0;
    // Free-entropy bookkeeping relative to point A; NaN for a polarized spin.
    double delta_f = 0.0;
    double free_entropy_slack = 0.0; // -dF - (lambda_s Ws + lambda_v Wv) >= 0
};

struct CycleTrajectory {
    std::vector<TrajectoryPoint> points;
    std::array<WorkLedger, 3> ledgers{}; // per stage, system-side changes
    std::array<JointPopulations, 4> corners; // A, B, C, A'
    double t_extract = 0.0;
    double nbar_error = 0.0; // |nbar_end - nbar0|
    double pdown_end = 0.0;
    int kappa = 1;
    double nbar0 = 0.0;
};

/// Free-entropy account F = lambda_s A_s + lambda_v A_v - S(rho), with the
/// charges chosen so that each unitless work is minus the change of its charge:
/// A_s = -<J_z>/hbar and A_v = -nbar/kappa.
struct FreeEntropyAccount {
    double lambda_s = 0.0;
    double lambda_v = 0.0;
    double a_s = 0.0;
    double a_v = 0.0;
    double entropy = 0.0;
    double f_tilde = 0.0;
    double delta_f = 0.0; // relative to the reference state
};

struct CycleBalance {
    WorkLedger totals;
    double reset_spintherm = 0.0; // <J_z> gained from the spin bath during reset
    double therm_heat = 0.0;      // quanta returned by the hot bath
};

void validate(const CycleConfig& config);

[[nodiscard]] CycleTrajectory run_cycle(const CycleConfig& config);

[[nodiscard]] FreeEntropyAccount free_entropy(const JointPopulations& state, const JointPopulations& reference,
                                              SpinTemperature spin, double lambda_v, int kappa);

[[nodiscard]] CycleBalance balance_report(const CycleTrajectory& trajectory);

} // namespace she
