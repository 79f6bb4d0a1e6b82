#pragma once

#include "she/raman.hpp"

#include <vector>

namespace she {

/// Time scan used to locate the first minimum of nbar(t).
/// omega_t_max <= 0 selects the automatic window 4*pi/Omega_min, where
/// Omega_min is the slowest nonzero block frequency with thermal weight above
/// 1e-6. The grid step never exceeds pi/(16*Omega_max) over weighted blocks.
struct TimeScan {
    double omega_t_max = 0.0;
    int count = 4096;
    double refine_tol = 1e-10; // relative bracket width of the golden-section refinement
    double ripple = 1e-6;      // quanta; shallower dips are not minima
};

struct TfResult {
    double t_f = 0.0;      // units 1/Omega
    double nbar_tf = 0.0;
    double window = 0.0;   // scanned window, units 1/Omega
    double grid_step = 0.0;
};

/// First local minimum of nbar(t) deeper than scan.ripple, refined by golden-section search.
/// Throws ComputationError when no minimum exists inside the scan window.
[[nodiscard]] TfResult find_tf(const EngineParams& params, const TimeScan& scan = {});
[[nodiscard]] TfResult find_tf(const RamanModel& model, const TimeScan& scan = {});

/// Automatic scan window for a model; exposed for reporting.
[[nodiscard]] double auto_scan_window(const RamanModel& model);

struct EtaGrid {
    double min = 0.01;
    double max = 1.2;
    int count = 120;

    [[nodiscard]] double at(int i) const;
};

struct SweepSpec {
    std::vector<int> kappa_values{1, 5, 10};
    std::vector<double> nbar0_values{0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0};
    EtaGrid eta_grid;
    TimeScan t_scan;
    double tail_eps = 1e-12;
    int workers = 1;
};

/// Work at the end of the extraction stage for one eta.
struct EtaPoint {
    double eta = 0.0;
    double work = 0.0; // units hbar*nu
    double t_f = 0.0;
    bool found = false; // false: no nbar minimum in the window, work recorded as 0
};

struct EtaCurve {
    int kappa = 1;
    double nbar0 = 0.0;
    std::vector<EtaPoint> points; // grid points in grid order
    double eta_opt = 0.0;
    double w_opt = 0.0;
    double t_f_opt = 0.0;
    bool refined = false; // parabolic vertex improved on the best grid point
};

struct SweepRow {
    int kappa = 1;
    double nbar0 = 0.0;
    double eta_opt = 0.0;
    double w_opt = 0.0;
    double t_f_opt = 0.0;
    double bound_w_max = 0.0;
    bool bound_violated = false;
    EtaCurve curve;
};

struct SweepResult {
    std::vector<SweepRow> rows; // kappa-major, in spec order
};

void validate(const SweepSpec& spec);

[[nodiscard]] EtaPoint evaluate_eta(double eta, int kappa, double nbar0, const SweepSpec& spec);
[[nodiscard]] EtaCurve sweep_eta(int kappa, double nbar0, const SweepSpec& spec);
[[nodiscard]] SweepResult sweep_nbar(const SweepSpec& spec);

} // namespace she
